"""Dithered quantized compressive sensing with projected back projection."""
from .errors import (
    ConfigError, ConvergenceError, InfeasibleBudgetError, InvalidParameterError,
    NumericalError, QCSError, ShapeError,
)
from .pbp import Reconstruction, back_project, pbp_reconstruct, qiht
from .quantizer import Dithering, Measurements, QuantizerConfig, quantize, sense
from .sensing import SensingOperator, new_operator
from .signals import Signal, gen_compressible, gen_lowrank, gen_sparse

__version__ = "0.1.0"
