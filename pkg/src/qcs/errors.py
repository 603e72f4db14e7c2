"""Exception hierarchy shared by all qcs modules."""


class QCSError(Exception):
    pass


class InvalidParameterError(QCSError, ValueError):
    pass


class InfeasibleBudgetError(InvalidParameterError):
    """No decay exponent in (1, 2] meets the requested l1/l2 ratio."""


class ShapeError(QCSError, ValueError):
    pass


class NumericalError(QCSError, ArithmeticError):
    pass


class ConvergenceError(NumericalError):
    def __init__(self, message, residual):
        super().__init__(f"{message} (final residual {residual:.3e})")
        self.residual = residual


class ConfigError(QCSError, ValueError):
    pass
