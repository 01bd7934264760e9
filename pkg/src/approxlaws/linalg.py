"""Exact sparse linear algebra over the rationals.

Rows are dicts column-index -> nonzero coefficient (int or Fraction).  The
reduced row echelon form is unique for a given row space, so results do not
depend on row input order; columns are processed in their numeric order,
which callers arrange to be the canonical unknown order.
"""

from __future__ import annotations

from fractions import Fraction


def _q(x):
    if isinstance(x, Fraction) and x.denominator == 1:
        return int(x)
    return x


def _row_sub(r: dict, pr: dict, c):
    """r -= c * pr in place."""
    for k, v in pr.items():
        w = r.get(k, 0) - c * v
        if w:
            r[k] = _q(w)
        else:
            r.pop(k, None)


def rref(rows) -> dict:
    """Reduced row echelon form of the row space; returns a map from pivot
    column to its (fully reduced, pivot coefficient 1) row."""
    pivots: dict[int, dict] = {}
    for r0 in rows:
        r = dict(r0)
        while r:
            lead = min(r)
            pr = pivots.get(lead)
            if pr is None:
                c = r[lead]
                if c != 1:
                    inv = Fraction(1) / Fraction(c)
                    r = {k: _q(inv * v) for k, v in r.items()}
                pivots[lead] = r
                break
            _row_sub(r, pr, r[lead])
    # back-substitution: make every pivot row free of later pivots
    leads = sorted(pivots)
    for lead in reversed(leads):
        row = pivots[lead]
        for other in list(row):
            if other != lead and other in pivots:
                _row_sub(row, pivots[other], row[other])
    return pivots


def nullspace(rows, ncols: int) -> list[tuple]:
    """Deterministic basis of the solution space of the homogeneous system:
    the canonical reduced basis (leading entries 1, zero above and below) in
    the given column order."""
    pivots = rref(rows)
    free = [c for c in range(ncols) if c not in pivots]
    vecs = []
    for f in free:
        row = {f: 1}
        for lead, pr in pivots.items():
            v = pr.get(f)
            if v:
                row[lead] = _q(-v)
        vecs.append(row)
    # canonicalize the basis itself
    canon = rref(vecs)
    return [
        tuple(_q(canon[lead].get(c, 0)) for c in range(ncols))
        for lead in sorted(canon)
    ]


def solve_particular(rows, rhs: dict, ncols: int):
    """One exact solution of ``A x = b`` with free unknowns set to zero, or
    ``None`` if inconsistent.  ``rows`` index equations; ``rhs`` maps an
    equation index to its right-hand side."""
    aug = []
    for i, r in enumerate(rows):
        row = dict(r)
        b = rhs.get(i, 0)
        if b:
            row[ncols] = -b
        if row:
            aug.append(row)
    pivots = rref(aug)
    if ncols in pivots:
        return None
    x = [0] * ncols
    for lead, row in pivots.items():
        x[lead] = _q(-row.get(ncols, 0))
    return tuple(x)


def in_span(basis_vecs, target, ncols: int):
    """Coefficients expressing ``target`` in the span of ``basis_vecs`` (as
    a tuple), or None.  Deterministic."""
    rows = []
    rhs = {}
    for c in range(ncols):
        row = {}
        for j, v in enumerate(basis_vecs):
            if v[c]:
                row[j] = v[c]
        t = target[c] if c < len(target) else 0
        if row or t:
            rhs[len(rows)] = t
            rows.append(row)
    return solve_particular(rows, rhs, len(basis_vecs))
