"""Expression values and their canonical normal form.

An :class:`Expr` is an immutable tree over rational literals, atoms, sums,
products and integer powers.  :func:`normalize` expands any expression into a
:class:`NormalForm`: a finite sum of monomials, each a rational coefficient
times integer (possibly negative) powers of atoms.  Normal forms are
themselves expressions, and all engine operations accept either
representation and return normal forms.

Laurent (negative) exponents are permitted on symbols and jet coordinates
only; negative powers of sums or of function applications are rejected as
unsupported forms (none occur in practice).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import kernel
from .atoms import FuncAtom, Jet, Sym, atom_at, intern, mono_atoms, mono_sort_key


class ExprError(Exception):
    pass


class UnsupportedFormError(ExprError):
    """Raised for forms outside the normal-form language (e.g. (u+1)^-1)."""


class EvalError(ExprError):
    pass


class Expr:
    __slots__ = ()

    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __sub__(self, other):
        return add(self, negate(other))

    def __rsub__(self, other):
        return add(other, negate(self))

    def __neg__(self):
        return negate(self)

    def __pow__(self, n):
        return pow_int(self, n)

    def __eq__(self, other):
        if isinstance(other, (Expr, int, Fraction, Sym, Jet, FuncAtom)):
            return normalize(self)._p == normalize(other)._p
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(normalize(self)._p.items()))


@dataclass(frozen=True, slots=True, eq=False)
class Rat(Expr):
    value: Fraction


@dataclass(frozen=True, slots=True, eq=False)
class AtomRef(Expr):
    atom: object


@dataclass(frozen=True, slots=True, eq=False)
class Add(Expr):
    args: tuple


@dataclass(frozen=True, slots=True, eq=False)
class Mul(Expr):
    args: tuple


@dataclass(frozen=True, slots=True, eq=False)
class Pow(Expr):
    base: object
    exp: int


class NormalForm(Expr):
    """Canonical monomial sum; the empty sum is the zero expression."""

    __slots__ = ("_p",)

    def __init__(self, p=None):
        self._p = {} if p is None else p

    def is_zero(self) -> bool:
        return not self._p

    def terms(self):
        """Monomials in canonical presentation order as
        ``(coefficient, [(atom, exponent), ...])`` pairs."""
        for mono in sorted(self._p, key=mono_sort_key):
            pairs = sorted(mono_atoms(mono), key=lambda ae: ae[0].sort_key())
            yield Fraction(self._p[mono]), pairs

    def coefficient_map(self):
        """Mapping from canonically-sorted atom tuples to coefficients."""
        return {
            tuple(pairs): c for c, pairs in ((c, tuple(p)) for c, p in self.terms())
        }

    def __len__(self):
        return len(self._p)

    def __bool__(self):
        return bool(self._p)

    def __repr__(self):
        if not self._p:
            return "NormalForm(0)"
        parts = []
        for c, pairs in self.terms():
            mono = "*".join(
                f"{a!r}" + (f"^{e}" if e != 1 else "") for a, e in pairs
            )
            parts.append(f"{c}" + (f"*{mono}" if mono else ""))
        return "NormalForm(" + " + ".join(parts) + ")"


def _coeff(x):
    if isinstance(x, int):
        return x
    if isinstance(x, Fraction):
        return int(x) if x.denominator == 1 else x
    raise UnsupportedFormError(f"not a rational coefficient: {x!r}")


def atom_poly(atom, exp=1, c=1):
    """The single-monomial normal-form dict ``c * atom**exp``."""
    if exp == 0:
        return {(): c}
    return {(intern(atom), exp): c}


def const_poly(c):
    c = _coeff(c)
    return {(): c} if c else {}


def as_poly(x) -> dict:
    """Normal-form dict of any expression-like value (shared, do not mutate)."""
    if isinstance(x, NormalForm):
        return x._p
    if isinstance(x, dict):
        return x
    if isinstance(x, (Sym, Jet, FuncAtom)):
        return atom_poly(x)
    if isinstance(x, (int, Fraction)):
        return const_poly(x)
    if isinstance(x, Rat):
        return const_poly(x.value)
    if isinstance(x, AtomRef):
        return atom_poly(x.atom)
    if isinstance(x, Add):
        out = {}
        for a in x.args:
            kernel.poly_iadd(out, as_poly(a))
        return out
    if isinstance(x, Mul):
        out = {(): 1}
        for a in x.args:
            out = kernel.poly_mul(out, as_poly(a))
        return out
    if isinstance(x, Pow):
        return poly_pow(as_poly(x.base), x.exp)
    raise UnsupportedFormError(f"cannot normalize {x!r}")


def mono_inv(mono):
    """Invert a monomial key; Laurent bases must be symbols or jets."""
    out = []
    for j in range(0, len(mono), 2):
        a = atom_at(mono[j])
        if isinstance(a, FuncAtom):
            raise UnsupportedFormError(
                "negative powers of function applications are unsupported"
            )
        out.append(mono[j])
        out.append(-mono[j + 1])
    return tuple(out)


def poly_pow(p, n: int) -> dict:
    if not isinstance(n, int):
        raise UnsupportedFormError(f"non-integer exponent {n!r}")
    if n == 0:
        return {(): 1}
    if n < 0:
        if len(p) != 1:
            raise UnsupportedFormError(
                "negative powers are only supported on atomic (single-monomial) bases"
            )
        ((mono, c),) = p.items()
        inv = {mono_inv(mono): _coeff(Fraction(1) / Fraction(c))}
        return poly_pow(inv, -n)
    # binary exponentiation
    out = {(): 1}
    base = p
    while n:
        if n & 1:
            out = kernel.poly_mul(out, base)
        n >>= 1
        if n:
            base = kernel.poly_mul(base, base)
    return out


def normalize(x) -> NormalForm:
    """Expanded canonical monomial sum of ``x``; idempotent."""
    if isinstance(x, NormalForm):
        return x
    return NormalForm(as_poly(x))


def add(*es) -> NormalForm:
    out = {}
    for e in es:
        kernel.poly_iadd(out, as_poly(e))
    return NormalForm(out)


def mul(*es) -> NormalForm:
    out = {(): 1}
    for e in es:
        out = kernel.poly_mul(out, as_poly(e))
    return NormalForm(out)


def negate(e) -> NormalForm:
    return NormalForm(kernel.poly_scale(as_poly(e), -1))


def pow_int(e, n: int) -> NormalForm:
    return NormalForm(poly_pow(as_poly(e), n))


def poly_atom_ids(p) -> set:
    ids = set()
    for mono in p:
        for j in range(0, len(mono), 2):
            ids.add(mono[j])
    return ids


def atoms_of(e) -> set:
    """The set of atoms occurring in ``e``."""
    return {atom_at(i) for i in poly_atom_ids(as_poly(e))}


def partial(e, a) -> NormalForm:
    """Formal partial derivative with respect to atom ``a``; all other atoms
    are treated as independent, except that differentiating through a
    function application raises its derivative count (chain rule)."""
    p = as_poly(e)
    images = {intern(a): {(): 1}}
    for i in poly_atom_ids(p):
        at = atom_at(i)
        if isinstance(at, FuncAtom) and at.arg == a:
            images[i] = atom_poly(FuncAtom(at.fname, at.nd + 1, at.arg))
    return NormalForm(kernel.derive(p, images))


def substitute(e, bindings: dict) -> NormalForm:
    """Simultaneous substitution atom -> expression; unbound atoms unchanged.
    Substitution does not reach inside function-application atoms."""
    p = as_poly(e)
    imgs = {intern(a): as_poly(v) for a, v in bindings.items()}
    if not any(i in imgs for i in poly_atom_ids(p)):
        return normalize(e)
    out = {}
    for mono, c in p.items():
        factor = {(): c}
        plain = []
        for j in range(0, len(mono), 2):
            img = imgs.get(mono[j])
            if img is None:
                plain.append(mono[j])
                plain.append(mono[j + 1])
            else:
                factor = kernel.poly_mul(factor, poly_pow(img, mono[j + 1]))
        kernel.poly_iadd(out, kernel.poly_mul_mono(factor, tuple(plain), 1))
    return NormalForm(out)


def eval_rational(e, point: dict, fvals: dict | None = None) -> Fraction:
    """Exact rational value of ``e``.

    ``point`` binds every symbol/jet atom to a rational; ``fvals`` binds
    ``(function-name, derivative-count, argument-value)`` triples.  Laurent
    exponents require nonzero base values.
    """
    p = as_poly(e)
    total = Fraction(0)
    for mono, c in p.items():
        v = Fraction(c)
        for a, exp in mono_atoms(mono):
            if isinstance(a, FuncAtom):
                if a.arg not in point:
                    raise EvalError(f"unbound atom {a.arg!r}")
                key = (a.fname, a.nd, Fraction(point[a.arg]))
                if fvals is None or key not in fvals:
                    raise EvalError(f"no value for function sample {key}")
                base = Fraction(fvals[key])
            else:
                if a not in point:
                    raise EvalError(f"unbound atom {a!r}")
                base = Fraction(point[a])
            if exp < 0 and base == 0:
                raise EvalError(f"zero base for negative exponent on {a!r}")
            v *= base**exp
        total += v
    return total
