"""Round-elimination toolkit for locally checkable labeling problems."""

__version__ = "0.1.0"

from .problems import Problem, CondensedConfiguration, parse_problem, format_problem
from .roundelim import apply_re, apply_rere, detect_fixed_point, RenamingPolicy

__all__ = [
    "Problem",
    "CondensedConfiguration",
    "parse_problem",
    "format_problem",
    "apply_re",
    "apply_rere",
    "detect_fixed_point",
    "RenamingPolicy",
    "__version__",
]
