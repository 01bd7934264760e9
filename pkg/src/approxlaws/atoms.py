"""Atomic symbols of the jet-space expression language.

Three kinds of atoms occur in normal forms:

* :class:`Sym` -- independent variables, named parameters, the small
  parameter, unknown ansatz coefficients, and bare function symbols;
* :class:`Jet` -- derivative coordinates ``u[k]_J`` of a dependent variable
  (``k`` is the perturbation order, ``None`` meaning "not yet expanded");
* :class:`FuncAtom` -- an uninterpreted function application ``f''(u[0])``
  carrying a formal derivative count.

Atoms are immutable and interned into a process-wide registry; normal forms
store integer atom ids only.  The registry is append-only (guarded by a lock
during problem loading) so expressions can be shared freely between threads.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field

# Sym.kind values
INDEP = "indep"
PARAM = "param"
EPS = "eps"
COEFF = "coeff"
FUNC = "func"

_KIND_RANK = {INDEP: 0, PARAM: 1, EPS: 2, COEFF: 3}


@dataclass(frozen=True, slots=True)
class Sym:
    """A named scalar symbol.  ``pos`` is the declaration position within its
    kind and fixes the canonical ordering; ansatz coefficients instead carry a
    (equation, perturbation-order, monomial-index) ``tag``."""

    name: str
    kind: str
    pos: int = 0
    tag: tuple = field(default=())

    def sort_key(self):
        if self.kind == COEFF:
            return (3, self.tag)
        return (_KIND_RANK[self.kind], self.pos, self.name)

    def __repr__(self):
        return self.name


@dataclass(frozen=True, slots=True)
class Jet:
    """Derivative coordinate of dependent variable ``dep`` (an index into the
    problem's dependent list).  ``order`` is the perturbation order, ``None``
    for an unexpanded variable.  ``deriv`` is the multi-index as a sorted
    tuple of independent-variable indices (mixed partials commute)."""

    dep: int
    order: int | None
    deriv: tuple[int, ...]

    def __post_init__(self):
        if tuple(sorted(self.deriv)) != self.deriv:
            object.__setattr__(self, "deriv", tuple(sorted(self.deriv)))

    def sort_key(self):
        k = -1 if self.order is None else self.order
        return (4, self.dep, k, len(self.deriv), self.deriv)

    def lifted(self, i: int) -> "Jet":
        """The coordinate with one more derivative in direction ``i``."""
        return Jet(self.dep, self.order, tuple(sorted(self.deriv + (i,))))

    def with_order(self, k: int | None) -> "Jet":
        return Jet(self.dep, k, self.deriv)

    def __repr__(self):
        o = "" if self.order is None else f"[{self.order}]"
        d = ("_" + ",".join(map(str, self.deriv))) if self.deriv else ""
        return f"<jet d{self.dep}{o}{d}>"


@dataclass(frozen=True, slots=True)
class FuncAtom:
    """``nd``-th formal derivative of function symbol ``fname`` applied to a
    plain (underived) dependent-variable coordinate."""

    fname: str
    nd: int
    arg: Jet

    def sort_key(self):
        return (5, self.fname, self.nd, self.arg.sort_key())

    def __repr__(self):
        return f"<{self.fname}{self.nd * chr(39)}({self.arg!r})>"


Atom = Sym | Jet | FuncAtom

# --- registry -------------------------------------------------------------

_atoms: list = []
_ids: dict = {}
_lock = threading.Lock()


def intern(atom) -> int:
    """Return the stable id of ``atom``, registering it if new."""
    i = _ids.get(atom)
    if i is None:
        with _lock:
            i = _ids.get(atom)
            if i is None:
                i = len(_atoms)
                _atoms.append(atom)
                _ids[atom] = i
    return i


def atom_at(i: int):
    return _atoms[i]


def is_eps(atom) -> bool:
    return isinstance(atom, Sym) and atom.kind == EPS


def mono_atoms(mono):
    """Iterate ``(atom, exponent)`` pairs of a flat monomial key."""
    for j in range(0, len(mono), 2):
        yield _atoms[mono[j]], mono[j + 1]


def mono_sort_key(mono):
    """Canonical presentation key: graded, then lexicographic in the canonical
    atom order.  Laurent exponents count by absolute value in the grade."""
    pairs = sorted((a.sort_key(), e) for a, e in mono_atoms(mono))
    return (sum(abs(e) for _, e in pairs), tuple(pairs))


def coeff_sym(eq: int, order: int, idx: int) -> Sym:
    """Ansatz-coefficient symbol tagged (equation, perturbation-order,
    monomial-index); the tag also fixes the canonical unknown order."""
    return Sym(f"a{eq + 1}o{order}n{idx}", COEFF, 0, (eq, order, idx))


EPS_SYM = Sym("eps", EPS)

_RESERVED = {"eps", "der"}


class SymbolTable:
    """Declared symbols of one problem: the parsing/printing context.

    Append-only after construction; dependent variables are referred to by
    index in :class:`Jet` atoms.
    """

    def __init__(self, indep, dep, params=(), funcs=()):
        """``funcs`` is a sequence of ``(function-name, dependent-name)``
        declarations, e.g. ``[("f", "u")]`` for ``f(u)``."""
        self.indep = [Sym(n, INDEP, i) for i, n in enumerate(indep)]
        self.dep_names = list(dep)
        self.params = [Sym(n, PARAM, i) for i, n in enumerate(params)]
        self.eps = EPS_SYM
        self.funcs = {}
        for fname, argname in funcs:
            if argname not in self.dep_names:
                raise ValueError(f"function {fname} argument {argname!r} is not a dependent variable")
            self.funcs[fname] = self.dep_names.index(argname)
        names = [s.name for s in self.indep] + self.dep_names + [s.name for s in self.params] + list(self.funcs)
        seen = set()
        for n in names:
            if n in _RESERVED:
                raise ValueError(f"{n!r} is a reserved word")
            if n in seen:
                raise ValueError(f"duplicate symbol name {n!r}")
            seen.add(n)

    @property
    def n_indep(self):
        return len(self.indep)

    @property
    def n_dep(self):
        return len(self.dep_names)

    def indep_index(self, name):
        for s in self.indep:
            if s.name == name:
                return s.pos
        return None

    def dep_index(self, name):
        try:
            return self.dep_names.index(name)
        except ValueError:
            return None

    def param(self, name):
        for s in self.params:
            if s.name == name:
                return s
        return None

    def jet(self, dep_name, order=None, deriv_names=()):
        """Jet atom from names, e.g. ``jet("u", 0, ("t", "x"))``."""
        d = self.dep_index(dep_name)
        if d is None:
            raise ValueError(f"{dep_name!r} is not a dependent variable")
        idxs = []
        for n in deriv_names:
            i = self.indep_index(n)
            if i is None:
                raise ValueError(f"{n!r} is not an independent variable")
            idxs.append(i)
        return Jet(d, order, tuple(sorted(idxs)))

    def func_atom(self, fname, nd=0, order=None):
        d = self.funcs.get(fname)
        if d is None:
            raise ValueError(f"{fname!r} is not a declared function")
        return FuncAtom(fname, nd, Jet(d, order, ()))
