"""Flux reconstruction (divergence inversion) and flux equivalence.

Reconstruction uses undetermined coefficients over a generated monomial
basis.  Total derivatives respect several exact gradings (per-dependent jet
counts, per-function-symbol counts, parameter exponents, jet perturbation
weight, and derivative weight minus coordinate degree), so the target splits
into independent blocks; within a block the candidate flux monomials are
generated by saturating the inverse-single-derivative closure of the target
monomials (strip one derivative letter, undo one chain-rule step, or raise
one coordinate power).  The saturated set is complete: any flux supported on
jets up to the order cap can be rewritten into it.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import kernel, linalg
from .atoms import FuncAtom, INDEP, Jet, atom_at, intern, mono_atoms, mono_sort_key
from .expr import NormalForm, as_poly, atoms_of, normalize
from .jets import total_derivative
from .multipliers import MultiplierSet, contraction, euler_residuals
from .problem import InconclusiveReduction, PdeProblem, trunc_eps


class ReconstructionError(Exception):
    """The flux ansatz ceiling was reached; the flux needs terms outside the
    generated basis."""


@dataclass
class FluxSpec:
    """Bounds for the reconstruction basis.  ``jet_order`` caps the
    derivative order of flux jets (default max(multiplier order, r - 1));
    ``degree`` optionally caps candidate monomial total degree;
    ``escalations`` is how many times the jet-order cap may be raised."""

    jet_order: int | None = None
    degree: int | None = None
    escalations: int = 1


@dataclass
class ConservationLaw:
    """A multiplier set with per-direction flux components.

    ``fluxes[i]`` is the tuple of series slots for direction i (a single
    entry for approach-b laws, whose fluxes are exact).  ``status`` is one of
    unverified, identity-verified, on-solution-verified.
    """

    mult: MultiplierSet
    fluxes: tuple
    status: str = "unverified"

    def __post_init__(self):
        from .multipliers import _check_slot_language

        self.fluxes = tuple(tuple(normalize(f) for f in row) for row in self.fluxes)
        for row in self.fluxes:
            for slot in row:
                _check_slot_language(slot, self.mult.method == "approach_a")

    @property
    def method(self) -> str:
        return self.mult.method

    def divergence_slots(self, problem: PdeProblem) -> list:
        """Slots of sum_i D_i Phi^i, matching the contraction slots."""
        out = []
        nslots = len(self.fluxes[0])
        for k in range(nslots):
            acc = {}
            for i, row in enumerate(self.fluxes):
                kernel.poly_iadd(acc, as_poly(total_derivative(row[k], i)))
            out.append(NormalForm(acc))
        if self.method == "approach_a":
            out = [trunc_eps(s, problem.p) for s in out]
        return out

    def eps_shifted(self) -> "ConservationLaw":
        shifted_fluxes = tuple(
            (NormalForm({}),) + tuple(row[:-1]) for row in self.fluxes
        )
        return ConservationLaw(self.mult.eps_shifted(), shifted_fluxes, status=self.status)


# --- grading ------------------------------------------------------------------


def _grade(mono, ndeps: int):
    """Exact total-derivative invariants of a monomial: per-dependent counts,
    per-function counts, parameter exponents, jet perturbation weight, and
    (derivative weight - coordinate degree)."""
    counts = [0] * ndeps
    fcounts: dict = {}
    params = []
    epsw = 0
    w = 0
    for a, e in mono_atoms(mono):
        if isinstance(a, Jet):
            counts[a.dep] += e
            w += len(a.deriv) * e
            epsw += (a.order or 0) * e
        elif isinstance(a, FuncAtom):
            counts[a.arg.dep] -= a.nd * e
            fcounts[a.fname] = fcounts.get(a.fname, 0) + e
            epsw += (a.arg.order or 0) * e
        elif a.kind == INDEP:
            w -= e
        else:
            params.append((a.sort_key(), e))
    return (tuple(counts), tuple(sorted(fcounts.items())), tuple(sorted(params)), epsw, w)


def _split_blocks(poly: dict, ndeps: int) -> dict:
    blocks: dict = {}
    for mono, c in poly.items():
        blocks.setdefault(_grade(mono, ndeps), {})[mono] = c
    return blocks


# --- candidate generation -------------------------------------------------------


def _mono_edit(mono, *changes):
    """Multiply by atom-id/exponent deltas."""
    delta = []
    for aid, de in sorted(changes):
        delta.append(aid)
        delta.append(de)
    return kernel.mono_mul(mono, tuple(delta))


def _max_jet_order(mono) -> int:
    top = 0
    for a, _ in mono_atoms(mono):
        if isinstance(a, Jet):
            top = max(top, len(a.deriv))
    return top


def _mono_degree(mono) -> int:
    return sum(abs(e) for _, e in mono_atoms(mono))


def _antiderive_candidates(mono, problem: PdeProblem):
    """Monomials whose D_i image contains ``mono``, per direction i."""
    n = problem.table.n_indep
    out = []
    pairs = list(mono_atoms(mono))
    for a, e in pairs:
        if isinstance(a, Jet) and a.deriv and e >= 1:
            for i in sorted(set(a.deriv)):
                stripped = Jet(a.dep, a.order, tuple(v for j, v in _drop_one(a.deriv, i)))
                cand = _mono_edit(mono, (intern(a), -1), (intern(stripped), 1))
                out.append((i, cand))
        elif isinstance(a, FuncAtom) and a.nd >= 1 and e >= 1:
            # undo one chain-rule step: f^(d) * u_(0),i  <-  D_i f^(d-1)
            for b, eb in pairs:
                if (
                    isinstance(b, Jet)
                    and b.dep == a.arg.dep
                    and b.order == a.arg.order
                    and len(b.deriv) == 1
                    and eb >= 1
                ):
                    i = b.deriv[0]
                    lower = FuncAtom(a.fname, a.nd - 1, a.arg)
                    cand = _mono_edit(mono, (intern(a), -1), (intern(lower), 1), (intern(b), -1))
                    out.append((i, cand))
    for i in range(n):
        xi = problem.table.indep[i]
        out.append((i, _mono_edit(mono, (intern(xi), 1))))
    return out


def _drop_one(deriv: tuple, i: int):
    dropped = False
    for j, v in enumerate(deriv):
        if v == i and not dropped:
            dropped = True
            continue
        yield j, v
    if not dropped:
        raise ValueError("direction not present")


@dataclass
class _Bounds:
    """Finiteness bounds for the candidate closure, derived from the target:
    without them the inverse closure runs away through Laurent descent
    (u^-n), chain-rule ascent (f^(n)), or coordinate-degree growth."""

    jet_cap: int
    k_slot: int | None
    degree_cap: int | None
    laurent_floor: dict
    nd_cap: int

    def admits(self, mono) -> bool:
        if self.degree_cap is not None and _mono_degree(mono) > self.degree_cap:
            return False
        for j in range(0, len(mono), 2):
            a = atom_at(mono[j])
            e = mono[j + 1]
            if isinstance(a, Jet):
                if len(a.deriv) > self.jet_cap:
                    return False
                if e < 0 and e < self.laurent_floor.get(mono[j], 0):
                    return False
                if self.k_slot is not None and a.order is not None and a.order > self.k_slot:
                    return False
            elif isinstance(a, FuncAtom):
                if a.nd > self.nd_cap:
                    return False
                if self.k_slot is not None and a.arg.order is not None and a.arg.order > self.k_slot:
                    return False
            elif e < 0 and a.kind == INDEP:
                return False
        return True


def _target_bounds(targets, jet_cap, k_slot, degree_cap, slack: int = 0) -> _Bounds:
    floors: dict = {}
    nd = 0
    for tgt in targets:
        for mono in as_poly(tgt):
            for j in range(0, len(mono), 2):
                a = atom_at(mono[j])
                e = mono[j + 1]
                if isinstance(a, Jet) and e < 0:
                    floors[mono[j]] = min(floors.get(mono[j], 0), e)
                elif isinstance(a, FuncAtom):
                    nd = max(nd, a.nd)
    floors = {aid: e - 1 - slack for aid, e in floors.items()}
    return _Bounds(jet_cap + slack, k_slot, degree_cap, floors, nd + slack)


def _invert_block(block, problem: PdeProblem, bounds: _Bounds, max_rounds: int = 12):
    """Find per-direction flux dicts whose total divergence equals the block,
    or None.

    Candidates come from the inverse-single-derivative closure of the block's
    monomials, grown one generation at a time with a solve attempt after each
    round: real fluxes live within a couple of generations, while full
    saturation of a high-degree block can run to tens of thousands of
    monomials.  Saturation (no new candidates) is still the limit, so a
    solvable block within the bounds is always solved.
    """
    n = problem.table.n_indep
    cands = [set() for _ in range(n)]
    images = {}
    seen_block = set(block)
    frontier = list(block)
    for _ in range(max_rounds):
        new_cands = False
        next_frontier = []
        for m in frontier:
            for i, cand in _antiderive_candidates(m, problem):
                if cand in cands[i] or not bounds.admits(cand):
                    continue
                cands[i].add(cand)
                new_cands = True
                img = as_poly(total_derivative(NormalForm({cand: 1}), i))
                images[(i, cand)] = img
                for m2 in img:
                    if m2 not in seen_block:
                        seen_block.add(m2)
                        next_frontier.append(m2)
        if not new_cands:
            return None
        sol = _solve_block(block, cands, images, seen_block)
        if sol is not None:
            return sol
        frontier = next_frontier
    return None


def _solve_block(block, cands, images, seen_block):
    """Undetermined coefficients: sum_i D_i Phi^i = target on this block."""
    n = len(cands)
    unknowns = []
    for i in range(n):
        unknowns.extend((i, m) for m in sorted(cands[i], key=mono_sort_key))
    col_of = {u: j for j, u in enumerate(unknowns)}
    block_monos = sorted(seen_block, key=mono_sort_key)
    mono_row = {m: r for r, m in enumerate(block_monos)}
    rows = [dict() for _ in block_monos]
    for (i, m), j in col_of.items():
        for m2, c in images[(i, m)].items():
            rows[mono_row[m2]][j] = c
    rhs = {mono_row[m]: c for m, c in block.items()}
    sol = linalg.solve_particular(rows, rhs, len(unknowns))
    if sol is None:
        return None
    fluxes = [dict() for _ in range(n)]
    for (i, m), j in col_of.items():
        if sol[j]:
            fluxes[i][m] = sol[j]
    return fluxes


def reconstruct(problem: PdeProblem, mult: MultiplierSet, fluxspec: FluxSpec | None = None) -> ConservationLaw:
    """Invert the divergence: find flux components whose total divergence
    equals the truncated contraction of ``mult`` with the equations,
    order by order.  Raises :class:`ReconstructionError` when the basis
    ceiling is reached."""
    spec = fluxspec or FluxSpec()
    for kind, k, res in euler_residuals(problem, mult):
        if not res.is_zero():
            raise ReconstructionError(
                "multiplier set fails the Euler-annihilation check; "
                "fluxes exist only for multipliers"
            )
    targets = contraction(problem, mult)
    if mult.method == "approach_a":
        targets = [trunc_eps(t, problem.p) for t in targets]
    s = 0
    for row in mult.slots:
        for slot in row:
            for a in atoms_of(slot):
                if isinstance(a, Jet):
                    s = max(s, len(a.deriv))
    base_cap = spec.jet_order if spec.jet_order is not None else max(s, problem.r - 1)
    n = problem.table.n_indep

    flux_slots = [[] for _ in range(n)]
    for k, tgt in enumerate(targets):
        k_slot = None if mult.method != "consistent" else k
        acc = [dict() for _ in range(n)]
        blocks = _split_blocks(as_poly(tgt), problem.table.n_dep)
        for grade_key in sorted(blocks):
            block = blocks[grade_key]
            solved = None
            for slack in range(spec.escalations + 1):
                bounds = _target_bounds(targets, base_cap, k_slot, spec.degree, slack)
                solved = _invert_block(block, problem, bounds)
                if solved is not None:
                    break
            if solved is None:
                raise ReconstructionError(
                    f"no flux over jets of order <= {base_cap + spec.escalations} "
                    f"for series slot {k}; the flux needs terms outside the generator set"
                )
            for i in range(n):
                kernel.poly_iadd(acc[i], solved[i])
        for i in range(n):
            flux_slots[i].append(NormalForm(acc[i]))

    law = ConservationLaw(mult, tuple(tuple(col) for col in flux_slots))
    residuals = identity_residuals(problem, law)
    assert all(r.is_zero() for r in residuals), "reconstruction produced a non-identity"
    law.status = "identity-verified"
    return law


def identity_residuals(problem: PdeProblem, law: ConservationLaw) -> list:
    """Per-slot residual of the divergence identity (contraction minus
    divergence); all-zero means the law is identity-verified."""
    targets = contraction(problem, law.mult)
    if law.method == "approach_a":
        targets = [trunc_eps(t, problem.p) for t in targets]
    divs = law.divergence_slots(problem)
    return [NormalForm(kernel.poly_add(as_poly(t), kernel.poly_scale(as_poly(d), -1)))
            for t, d in zip(targets, divs)]


def equivalent(a: ConservationLaw, b: ConservationLaw, problem: PdeProblem,
               depth: int = 2) -> str:
    """Equivalence of two laws over the same problem: their difference must
    be a trivial law, i.e. its divergence vanishes identically (curl terms),
    or every difference flux component itself vanishes after
    leading-derivative elimination with differential consequences up to the
    prolongation bound.  Returns 'equivalent', 'distinct', or
    'distinct-with-warning' when the reduction is inconclusive."""
    if a.method != b.method:
        raise ValueError("laws use different methods")
    if len(a.fluxes) != len(b.fluxes) or len(a.fluxes[0]) != len(b.fluxes[0]):
        raise ValueError("laws have different flux shapes")
    diff = ConservationLaw(
        a.mult,
        tuple(
            tuple(NormalForm(kernel.poly_add(as_poly(fa), kernel.poly_scale(as_poly(fb), -1)))
                  for fa, fb in zip(ra, rb))
            for ra, rb in zip(a.fluxes, b.fluxes)
        ),
    )
    divs = diff.divergence_slots(problem)
    if all(d.is_zero() for d in divs):
        return "equivalent"
    expanded = a.method != "approach_a"
    try:
        for row in diff.fluxes:
            for slot in row:
                if not problem.reduce_on_solutions(slot, expanded=expanded, depth=depth).is_zero():
                    return "distinct"
    except InconclusiveReduction:
        return "distinct-with-warning"
    return "equivalent"
