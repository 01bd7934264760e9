"""Expression kernel: normalization, arithmetic, differentiation,
substitution, exact evaluation, printing."""

from fractions import Fraction

import pytest

from approxlaws import (
    FuncAtom,
    NormalForm,
    UnsupportedFormError,
    add,
    eval_rational,
    mul,
    negate,
    normalize,
    parse,
    partial,
    pow_int,
    print_poly,
    substitute,
)
from approxlaws.expr import EvalError


def test_parse_kdv_left_hand_side(table, P):
    e = P("u_t + u*u_x + u_xxx - eps*u_xx")
    ut = table.jet("u", None, ("t",))
    u = table.jet("u")
    ux = table.jet("u", None, ("x",))
    uxx = table.jet("u", None, ("x", "x"))
    uxxx = table.jet("u", None, ("x", "x", "x"))
    expected = add(ut, mul(u, ux), uxxx, negate(mul(table.eps, uxx)))
    assert e == expected


def test_parse_zero(P):
    assert P("0").is_zero()


def test_parse_laurent_monomial(table, P):
    e = P("u^-2 * u_x")
    assert e == mul(pow_int(table.jet("u"), -2), table.jet("u", None, ("x",)))


def test_normalize_binomial(table):
    u = table.jet("u")
    assert pow_int(add(u, 1), 2) == add(pow_int(u, 2), mul(2, u), 1)


def test_normalize_exponent_cancellation(table):
    u = table.jet("u")
    assert mul(pow_int(u, -2), pow_int(u, 2)) == normalize(1)


def test_normalize_cancellation_to_zero(table):
    u = table.jet("u")
    e = add(mul(table.eps, u), negate(mul(table.eps, u)))
    assert e.is_zero() and e._p == {}


def test_normalize_idempotent(P):
    e = P("(u + 1)^3 * (x - u)")
    assert normalize(normalize(e))._p == normalize(e)._p


def test_ring_ops(table):
    x = table.indep[1]
    u = table.jet("u")
    assert mul(x, x) == pow_int(x, 2)
    assert pow_int(u, -2) == normalize(parse("u^-2", table))
    e = mul(x, u)
    assert add(e, 0) == e


def test_negative_power_of_sum_rejected(table):
    u = table.jet("u")
    with pytest.raises(UnsupportedFormError):
        pow_int(add(u, 1), -1)


def test_negative_power_of_function_rejected(table):
    f = table.func_atom("f")
    with pytest.raises(UnsupportedFormError):
        pow_int(normalize(f), -1)


def test_partial_product(table):
    u, v = table.jet("u"), table.jet("v")
    assert partial(mul(pow_int(u, 2), v), u) == mul(2, u, v)


def test_partial_chain_rule(table):
    u0 = table.jet("u", 0)
    f = FuncAtom("f", 0, u0)
    assert partial(normalize(f), u0) == normalize(FuncAtom("f", 1, u0))


def test_partial_power_rule(table):
    u = table.jet("u")
    assert partial(pow_int(u, -1), u) == negate(pow_int(u, -2))


def test_partial_leibniz(P, table):
    a = P("t*u[0]^2*v[0]_x")
    b = P("x - u[0]*v[0]")
    u0 = table.jet("u", 0)
    assert partial(a * b, u0) == partial(a, u0) * b + a * partial(b, u0)


def test_substitute_expansion(table):
    u = table.jet("u")
    u0, u1 = table.jet("u", 0), table.jet("u", 1)
    image = add(u0, mul(table.eps, u1))
    out = substitute(pow_int(u, 2), {u: image})
    expected = normalize(parse("u[0]^2 + 2*eps*u[0]*u[1] + eps^2*u[1]^2", table))
    assert out == expected


def test_substitute_identity(P, table):
    e = P("t*u^2 - x*u_x")
    u = table.jet("u")
    assert substitute(e, {u: u}) == e


def test_substitute_leading_elimination(table):
    # KdV: u_t -> -u u_x - u_xxx + eps u_xx
    e = parse("u_t*u + x", table)
    ut = table.jet("u", None, ("t",))
    image = parse("-u*u_x - u_xxx + eps*u_xx", table)
    out = substitute(e, {ut: image})
    assert out == normalize(parse("u*(-u*u_x - u_xxx + eps*u_xx) + x", table))


def test_eval_square(table):
    u0 = table.jet("u", 0)
    assert eval_rational(pow_int(u0, 2), {u0: Fraction(3, 2)}) == Fraction(9, 4)


def test_eval_zero_expression(table):
    assert eval_rational(NormalForm({}), {}) == 0


def test_eval_laurent_zero_base(table):
    u0 = table.jet("u", 0)
    with pytest.raises(EvalError):
        eval_rational(pow_int(u0, -1), {u0: Fraction(0)})


def test_eval_unbound_atom(table):
    u0 = table.jet("u", 0)
    with pytest.raises(EvalError):
        eval_rational(normalize(u0), {})


def test_eval_function_samples(table):
    u0 = table.jet("u", 0)
    f = FuncAtom("f", 1, u0)
    val = eval_rational(mul(f, u0), {u0: Fraction(2)}, {("f", 1, Fraction(2)): Fraction(5)})
    assert val == 10


def test_print_eps_grouping(table):
    e = parse("x + eps*(t + x^2/2)", table)
    assert print_poly(normalize(e), table) == "x + eps*(t + x^2/2)"


def test_print_zero(table):
    assert print_poly(NormalForm({}), table) == "0"


def test_print_function_derivative_roundtrip(table):
    e = mul(FuncAtom("f", 1, table.jet("u", 0)), table.jet("u", 1))
    s = print_poly(e, table)
    assert "f'(u[0])" in s and "u[1]" in s
    assert normalize(parse(s, table)) == e


def test_print_multichar_independent_uses_der(table):
    from approxlaws import SymbolTable

    t2 = SymbolTable(["tau", "x"], ["u"])
    e = normalize(parse("der(u, tau, x) + u_x", t2))
    s = print_poly(e, t2)
    assert "der(u, tau, x)" in s
    assert normalize(parse(s, t2)) == e


def test_print_machine_roundtrip(P, table):
    cases = [
        "u_t + u*u_x + u_xxx - eps*u_xx",
        "2*u^-3*u_x^2 - 1/2*t^2*x*v",
        "f''(u)*u_x - c^2*v_tx",
        "x + eps*(t + x^2/2) + eps^2*u[2]",
        "der(u[1], t, x) - u[1]_tx",
    ]
    for text in cases:
        e = P(text)
        assert normalize(parse(print_poly(e, table), table)) == e
