"""Approximate conservation laws of perturbed PDE systems.

Computes and verifies multiplier/flux pairs for systems containing a small
parameter, in three flavors: the consistent direct method (expanded
dependent variables, one approximate Euler operator per dependent variable),
the unexpanded-multiplier method (approach A), and the fully-expanded
hierarchy method (approach B).  All arithmetic is exact rational.
"""

from .atoms import FuncAtom, Jet, Sym, SymbolTable, coeff_sym
from .expr import (
    EvalError,
    Expr,
    ExprError,
    NormalForm,
    UnsupportedFormError,
    add,
    atoms_of,
    eval_rational,
    mul,
    negate,
    normalize,
    partial,
    pow_int,
    substitute,
)
from .jets import (
    EpsilonSeries,
    EulerKind,
    collect_eps,
    consistent_euler,
    euler,
    expand_epsilon,
    expand_epsilon_recursive,
    per_order_euler,
    recursion_R,
    total_derivative,
    unexpanded_euler,
)
from .kernel import BACKEND as KERNEL_BACKEND
from .parser import ParseError, parse
from .printer import print_poly

__version__ = "0.1.0"

__all__ = [
    "EpsilonSeries",
    "EulerKind",
    "EvalError",
    "Expr",
    "ExprError",
    "FuncAtom",
    "Jet",
    "KERNEL_BACKEND",
    "NormalForm",
    "ParseError",
    "Sym",
    "SymbolTable",
    "UnsupportedFormError",
    "add",
    "atoms_of",
    "coeff_sym",
    "collect_eps",
    "consistent_euler",
    "euler",
    "eval_rational",
    "expand_epsilon",
    "expand_epsilon_recursive",
    "mul",
    "negate",
    "normalize",
    "parse",
    "partial",
    "per_order_euler",
    "pow_int",
    "print_poly",
    "recursion_R",
    "substitute",
    "total_derivative",
    "unexpanded_euler",
]
