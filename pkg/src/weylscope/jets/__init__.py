"""Expression parsing and truncated multivariate Taylor-jet arithmetic."""

from .algebra import MAX_ORDER, NVARS, ncoef, tables
from .expr import (Add, Call, Div, Expression, Mul, Neg, Num, Pow, Sub, Var,
                   eval_jets, parse_expression, to_source)
from .jet import Jet, atan, cos, exp, fd_jet, jet_eval, log, sin, sqrt

__all__ = [
    "MAX_ORDER", "NVARS", "ncoef", "tables",
    "Expression", "Num", "Var", "Neg", "Add", "Sub", "Mul", "Div", "Pow",
    "Call", "parse_expression", "to_source", "eval_jets",
    "Jet", "jet_eval", "fd_jet", "exp", "log", "sin", "cos", "sqrt", "atan",
]
