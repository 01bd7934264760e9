"""Jet-space operators.

Total derivatives thread through every jet coordinate (all perturbation
orders at once), epsilon expansion turns expressions over unexpanded
variables into truncated series over order-tagged coordinates, the recursion
operator generates slot k+1 of such a series from slot k, and the three
Euler-operator families annihilate total divergences in their respective
variable sets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from . import kernel
from .atoms import (
    COEFF,
    EPS_SYM,
    FuncAtom,
    INDEP,
    Jet,
    Sym,
    atom_at,
    coeff_sym,
    intern,
)
from .expr import (
    NormalForm,
    UnsupportedFormError,
    as_poly,
    atom_poly,
    partial,
    poly_atom_ids,
    substitute,
)


@dataclass(frozen=True)
class EulerKind:
    """Which variational-derivative family to apply.

    ``consistent``: d/du_(0)alpha with total derivatives running over all
    expansion orders; ``unexpanded``: d/du_alpha over unexpanded jets;
    ``per-order``: d/du_(k)alpha for one fixed order k.
    """

    family: str
    alpha: int
    order: int | None = None

    def __post_init__(self):
        if self.family not in ("consistent", "unexpanded", "per-order"):
            raise ValueError(f"unknown Euler family {self.family!r}")
        if self.family == "per-order" and self.order is None:
            raise ValueError("per-order Euler kind needs an order")


@dataclass
class EpsilonSeries:
    """Truncated expansion sum_k eps^k coeffs[k] + O(eps^(order+1));
    slot k contains jets of perturbation order at most k."""

    order: int
    coeffs: list

    def __post_init__(self):
        assert len(self.coeffs) == self.order + 1

    def reconstruct(self) -> NormalForm:
        out = {}
        eid = intern(EPS_SYM)
        for k, c in enumerate(self.coeffs):
            mono = () if k == 0 else (eid, k)
            kernel.poly_iadd(out, kernel.poly_mul_mono(as_poly(c), mono, 1))
        return NormalForm(out)


def total_derivative(e, i: int) -> NormalForm:
    """D_i: partial in x_i plus threading through all jet coordinates."""
    p = as_poly(e)
    images = {}
    for aid in poly_atom_ids(p):
        a = atom_at(aid)
        if isinstance(a, Jet):
            images[aid] = atom_poly(a.lifted(i))
        elif isinstance(a, FuncAtom):
            chain = FuncAtom(a.fname, a.nd + 1, a.arg)
            images[aid] = {kernel.mono_mul((intern(chain), 1), (intern(a.arg.lifted(i)), 1)): 1}
        elif a.kind == INDEP and a.pos == i:
            images[aid] = {(): 1}
    return NormalForm(kernel.derive(p, images))


def total_derivative_chain(e, idxs) -> NormalForm:
    out = e
    for i in idxs:
        out = total_derivative(out, i)
    return out if isinstance(out, NormalForm) else NormalForm(as_poly(out))


# --- epsilon expansion ------------------------------------------------------


def _series_mul(s1, s2, p):
    out = [dict() for _ in range(p + 1)]
    for i, a in enumerate(s1):
        if not a:
            continue
        for j, b in enumerate(s2):
            if i + j > p:
                break
            if b:
                kernel.poly_iadd(out[i + j], kernel.poly_mul(a, b))
    return out


def _series_pow(s, n, p):
    out = [{(): 1}] + [dict() for _ in range(p)]
    base = s
    while n:
        if n & 1:
            out = _series_mul(out, base, p)
        n >>= 1
        if n:
            base = _series_mul(base, base, p)
    return out


def _gen_binom(n: int, j: int) -> int:
    num = 1
    for i in range(j):
        num *= n - i
    return num // math.factorial(j)


def _jet_series_pow(jet: Jet, exp: int, p: int):
    base = [atom_poly(jet.with_order(k)) for k in range(p + 1)]
    if exp >= 0:
        return _series_pow(base, exp, p)
    u0 = jet.with_order(0)
    u0_id = intern(u0)
    # u^exp = u0^exp * (1 + w)^exp, w = sum_{k>=1} eps^k u_(k)/u0
    w = [dict()] + [{kernel.mono_mul((intern(jet.with_order(k)), 1), (u0_id, -1)): 1} for k in range(1, p + 1)]
    out = [{(): 1}] + [dict() for _ in range(p)]
    wj = [{(): 1}] + [dict() for _ in range(p)]
    for j in range(1, p + 1):
        wj = _series_mul(wj, w, p)
        c = _gen_binom(exp, j)
        for k in range(p + 1):
            kernel.poly_iadd(out[k], wj[k], c)
    return [kernel.poly_mul_mono(slot, (u0_id, exp), 1) for slot in out]


def _func_series(fa: FuncAtom, p: int):
    if fa.arg.deriv:
        raise UnsupportedFormError("function arguments must be underived dependent variables")
    u0 = fa.arg.with_order(0)
    out = [atom_poly(FuncAtom(fa.fname, fa.nd, u0))] + [dict() for _ in range(p)]
    z = [dict()] + [atom_poly(fa.arg.with_order(k)) for k in range(1, p + 1)]
    zj = [{(): 1}] + [dict() for _ in range(p)]
    fact = 1
    for j in range(1, p + 1):
        zj = _series_mul(zj, z, p)
        fact *= j
        fj = intern(FuncAtom(fa.fname, fa.nd + j, u0))
        for k in range(p + 1):
            kernel.poly_iadd(out[k], kernel.poly_mul_mono(zj[k], (fj, 1), Fraction(1, fact)))
    return out


def collect_eps(e, pmax: int | None = None) -> list:
    """Split by powers of eps: slot k = coefficient polynomial of eps^k.
    Truncates above ``pmax`` when given; negative powers of eps are
    rejected."""
    slots: dict[int, dict] = {}
    eid = intern(EPS_SYM)
    top = 0
    for mono, c in as_poly(e).items():
        k = 0
        rest = []
        for j in range(0, len(mono), 2):
            if mono[j] == eid:
                k = mono[j + 1]
            else:
                rest.append(mono[j])
                rest.append(mono[j + 1])
        if k < 0:
            raise UnsupportedFormError("negative power of eps")
        if pmax is not None and k > pmax:
            continue
        slots.setdefault(k, {})[tuple(rest)] = c
        top = max(top, k)
    if pmax is not None:
        top = pmax
    return [slots.get(k, {}) for k in range(top + 1)]


def _scan_expansion_state(p):
    has_unexp = has_exp = False
    for aid in poly_atom_ids(p):
        a = atom_at(aid)
        if isinstance(a, Jet):
            if a.order is None:
                has_unexp = True
            else:
                has_exp = True
        elif isinstance(a, FuncAtom):
            if a.arg.order is None:
                has_unexp = True
            else:
                has_exp = True
    return has_unexp, has_exp


def expand_epsilon(e, p: int) -> EpsilonSeries:
    """Substitute the power-series expansion of every unexpanded dependent
    variable, Taylor-expand function applications, collect by powers of eps,
    and truncate at order ``p``.

    Expressions over already-expanded coordinates are collected only (their
    slots must respect the order invariant); mixing expanded and unexpanded
    atoms in one expression is rejected.
    """
    poly = as_poly(e)
    has_unexp, has_exp = _scan_expansion_state(poly)
    if has_unexp and has_exp:
        raise UnsupportedFormError("expression mixes expanded and unexpanded dependent variables")
    if not has_unexp:
        slots = collect_eps(poly, p)
        series = EpsilonSeries(p, [NormalForm(s) for s in slots])
        _check_order_invariant(series)
        return series
    eid = intern(EPS_SYM)
    out = [dict() for _ in range(p + 1)]
    for mono, c in poly.items():
        shift = 0
        factors = []
        plain = []
        for j in range(0, len(mono), 2):
            aid, exp = mono[j], mono[j + 1]
            a = atom_at(aid)
            if aid == eid:
                if exp < 0:
                    raise UnsupportedFormError("negative power of eps")
                shift = exp
            elif isinstance(a, Jet):
                factors.append(_jet_series_pow(a, exp, p))
            elif isinstance(a, FuncAtom):
                factors.append(_series_pow(_func_series(a, p), exp, p))
            else:
                plain.append(aid)
                plain.append(exp)
        if shift > p:
            continue
        s = [{tuple(plain): c}] + [dict() for _ in range(p)]
        for f in factors:
            s = _series_mul(s, f, p)
        for k in range(p + 1 - shift):
            kernel.poly_iadd(out[k + shift], s[k])
    return EpsilonSeries(p, [NormalForm(d) for d in out])


def _check_order_invariant(series: EpsilonSeries):
    for k, slot in enumerate(series.coeffs):
        for aid in poly_atom_ids(as_poly(slot)):
            a = atom_at(aid)
            o = None
            if isinstance(a, Jet):
                o = a.order
            elif isinstance(a, FuncAtom):
                o = a.arg.order
            if o is not None and o > k:
                raise UnsupportedFormError(
                    f"slot {k} contains a perturbation-order-{o} coordinate"
                )


# --- recursion operator -----------------------------------------------------


def recursion_R(e) -> NormalForm:
    """The linear Leibniz operator generating slot k+1 of an expansion from
    slot k: order-tagged jets shift up with a factor (order+1), ansatz
    coefficient tags shift up, and function applications chain through the
    first-order coordinate of their argument."""
    p = as_poly(e)
    images = {}
    for aid in poly_atom_ids(p):
        a = atom_at(aid)
        if isinstance(a, Jet):
            if a.order is None:
                raise UnsupportedFormError("recursion operator needs order-tagged coordinates")
            images[aid] = atom_poly(a.with_order(a.order + 1), c=a.order + 1)
        elif isinstance(a, FuncAtom):
            if a.arg.order != 0:
                raise UnsupportedFormError("recursion operator needs order-0 function arguments")
            chain = FuncAtom(a.fname, a.nd + 1, a.arg)
            u1 = a.arg.with_order(1)
            images[aid] = {kernel.mono_mul((intern(chain), 1), (intern(u1), 1)): 1}
        elif isinstance(a, Sym) and a.kind == COEFF:
            eq, order, idx = a.tag
            images[aid] = atom_poly(coeff_sym(eq, order + 1, idx))
    return NormalForm(kernel.derive(p, images))


def expand_epsilon_recursive(e, p: int) -> EpsilonSeries:
    """Expansion built by the recursion operator instead of substitution:
    slot 0 is e at eps=0 with variables replaced by their order-0
    coordinates, and slot k+1 = R[slot k]/(k+1).  Explicit eps content is
    collected first and shifted in."""
    parts = collect_eps(as_poly(e))
    out = [dict() for _ in range(p + 1)]
    subs0 = {}

    def order0(poly):
        for aid in poly_atom_ids(poly):
            a = atom_at(aid)
            if isinstance(a, Jet) and a.order is None:
                subs0[a] = a.with_order(0)
            elif isinstance(a, FuncAtom) and a.arg.order is None:
                subs0[a] = FuncAtom(a.fname, a.nd, a.arg.with_order(0))
        return substitute(NormalForm(poly), subs0)

    for shift, part in enumerate(parts):
        if shift > p:
            break
        slot = order0(part)
        kernel.poly_iadd(out[shift], as_poly(slot))
        for k in range(p - shift):
            slot = NormalForm(kernel.poly_scale(as_poly(recursion_R(slot)), Fraction(1, k + 1)))
            kernel.poly_iadd(out[shift + k + 1], as_poly(slot))
    return EpsilonSeries(p, [NormalForm(d) for d in out])


# --- Euler operators --------------------------------------------------------


def consistent_euler(alpha: int) -> EulerKind:
    return EulerKind("consistent", alpha)


def unexpanded_euler(alpha: int) -> EulerKind:
    return EulerKind("unexpanded", alpha)


def per_order_euler(alpha: int, k: int) -> EulerKind:
    return EulerKind("per-order", alpha, k)


def euler(e, kind: EulerKind, r: int | None = None) -> NormalForm:
    """E(e) = sum over multi-indices J of (-D)_J (de/dv_J) for the variable
    family of ``kind``.  The depth is the maximum derivative order present in
    the operand unless ``r`` restricts it."""
    p = as_poly(e)
    if kind.family == "consistent":
        want = 0
    elif kind.family == "unexpanded":
        want = None
    else:
        want = kind.order
    multi_indices = set()
    for aid in poly_atom_ids(p):
        a = atom_at(aid)
        if isinstance(a, FuncAtom):
            a = a.arg  # the chain rule makes f(u) depend on u
        if isinstance(a, Jet) and a.dep == kind.alpha and a.order == want:
            if r is None or len(a.deriv) <= r:
                multi_indices.add(a.deriv)
    out = {}
    nf = NormalForm(p)
    for J in sorted(multi_indices):
        term = partial(nf, Jet(kind.alpha, want, J))
        term = total_derivative_chain(term, J)
        kernel.poly_iadd(out, as_poly(term), -1 if len(J) % 2 else 1)
    return NormalForm(out)
