"""Sparse residual trees and forests for scattered-data approximation."""
from .data import Dataset, load_csv, rmae, save_csv
from .errors import (
    DataFormatError,
    DegenerateGeometryError,
    InvalidArgumentError,
    NumericalError,
    SrtfError,
    UnsupportedVersionError,
)
from .exploration import KernelSpec, Refinement, explore_refinement, shape_parameter
from .forest import SrfModel, predict_srf, train_srf
from .functions import TEST_FUNCTIONS, test_function_eval
from .lsq import IncrementalQR
from .params import WorkingParams
from .sampling import halton_sequence, quasi_uniform_extend
from .serialization import deserialize_model, serialize_model
from .tree import SrtModel, TrainingReport, predict_srt, rae, train_srt

__version__ = "0.1.0"

__all__ = [
    "DataFormatError", "Dataset", "DegenerateGeometryError", "IncrementalQR", "InvalidArgumentError",
    "KernelSpec", "NumericalError", "Refinement", "SrfModel", "SrtModel", "SrtfError", "TEST_FUNCTIONS",
    "TrainingReport", "UnsupportedVersionError", "WorkingParams", "deserialize_model", "explore_refinement",
    "halton_sequence", "load_csv", "predict_srf", "predict_srt", "quasi_uniform_extend", "rae", "rmae",
    "save_csv", "serialize_model", "shape_parameter", "test_function_eval", "train_srf", "train_srt",
]
