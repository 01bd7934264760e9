import pytest

from approxlaws import SymbolTable, normalize, parse
from approxlaws.problem import parse_problem_text

DIFFUSION = """
name = diffusion
independent = t, x
dependent = u
order = 1
equation = u_t - u^-2*u_xx + 2*u^-3*u_x^2 - eps*(1 + u^-2)*u_x
leading = u_t
"""

KDV = """
name = kdv-burgers
independent = t, x
dependent = u
order = 1
equation = u_t + u*u_x + u_xxx - eps*u_xx
leading = u_t
"""

WAVE = """
name = wave
independent = t, x
dependent = u
parameters = c, lambda
functions = f(u)
order = 1
equation = u_xx - 1/c^2*u_tt - lambda*u^3 - eps*f(u)
leading = u_tt
"""


@pytest.fixture
def table():
    return SymbolTable(["t", "x"], ["u", "v"], ["c"], [("f", "u")])


@pytest.fixture
def diffusion():
    return parse_problem_text(DIFFUSION).problem


@pytest.fixture
def kdv():
    return parse_problem_text(KDV).problem


@pytest.fixture
def wave():
    return parse_problem_text(WAVE).problem


@pytest.fixture
def P(table):
    """Parse + normalize in the shared two-variable context."""
    return lambda s: normalize(parse(s, table))
