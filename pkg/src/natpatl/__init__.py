"""Model checking of natural-strategy probabilistic ATL over stochastic game structures."""

__version__ = "0.1.0"

from .cgs import Cgs, Distribution, History, validate_cgs, successors
from .logic import parse_formula, classify, to_text
from .natstrat import NatStrategy, parse_strategy, complexity, match_index, act, enumerate_det
from .checker import CheckConfig, check, check_positive_np_path

__all__ = [
    "Cgs",
    "Distribution",
    "History",
    "validate_cgs",
    "successors",
    "parse_formula",
    "classify",
    "to_text",
    "NatStrategy",
    "parse_strategy",
    "complexity",
    "match_index",
    "act",
    "enumerate_det",
    "CheckConfig",
    "check",
    "check_positive_np_path",
]
