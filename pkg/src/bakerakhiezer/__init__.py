"""Exact construction and verification of Baker-Akhiezer functions for
Macdonald and Koornwinder difference operators."""
from .bafunc import BaFunction, construct_ba_iterative, construct_ba_linear, evaluate, specialize_lambda
from .errors import BAError
from .rootdata import RootDatum, build_root_datum

__all__ = ["BAError", "BaFunction", "RootDatum", "build_root_datum", "construct_ba_iterative",
           "construct_ba_linear", "evaluate", "specialize_lambda"]
__version__ = "0.1.0"
