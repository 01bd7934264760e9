"""Independent certification of multiplier/flux pairs.

Four checks, in decreasing strength: the symbolic divergence identity, the
Euler-annihilation conditions on the multipliers alone, on-solution
vanishing of the divergence after leading-derivative elimination, and exact
numeric spot checks at random rational jet points.  Identity implies
on-solution implies spot-check success.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from .atoms import FuncAtom, Jet, Sym, mono_atoms
from .expr import EvalError, NormalForm, atoms_of, eval_rational
from .fluxes import ConservationLaw, identity_residuals
from .multipliers import MultiplierSet, contraction, euler_residuals
from .problem import InconclusiveReduction, PdeProblem, trunc_eps

DEFAULT_SEED = 2023


@dataclass
class CheckResult:
    name: str
    passed: bool
    residual: NormalForm | None = None
    witness: object = None

    def __bool__(self):
        return self.passed


@dataclass
class VerificationReport:
    checks: list
    epsilon_order: int

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self):
        return [c for c in self.checks if not c.passed]


def verify_identity(problem: PdeProblem, law: ConservationLaw) -> VerificationReport:
    """The truncated contraction equals the divergence of the fluxes, slot by
    slot, as normal forms."""
    checks = []
    for k, res in enumerate(identity_residuals(problem, law)):
        checks.append(CheckResult(f"identity[{k}]", res.is_zero(), residual=res))
    return VerificationReport(checks, problem.p)


def verify_euler(problem: PdeProblem, mult: MultiplierSet) -> VerificationReport:
    """Every Euler operator of the multiplier's method annihilates the
    truncated contraction."""
    checks = []
    for kind, k, res in euler_residuals(problem, mult):
        label = f"euler[{kind.family}:{kind.alpha}" + (
            f":{kind.order}" if kind.order is not None else ""
        ) + f", slot {k}]"
        checks.append(CheckResult(label, res.is_zero(), residual=res))
    return VerificationReport(checks, problem.p)


def verify_on_solutions(problem: PdeProblem, law: ConservationLaw, depth: int = 2) -> VerificationReport:
    """The flux divergence vanishes after substituting the leading
    derivatives (and their differential consequences up to the prolongation
    depth), slot by slot."""
    expanded = law.method != "approach_a"
    checks = []
    for k, div in enumerate(law.divergence_slots(problem)):
        try:
            red = problem.reduce_on_solutions(div, expanded=expanded, depth=depth)
            checks.append(CheckResult(f"on-solutions[{k}]", red.is_zero(), residual=red))
        except InconclusiveReduction as exc:
            checks.append(CheckResult(f"on-solutions[{k}]", False, witness=str(exc)))
    return VerificationReport(checks, problem.p)


def _rand_rational(rng: random.Random, nonzero: bool) -> Fraction:
    lo = 1 if nonzero else 0
    num = rng.choice([n for n in range(-9, 10) if abs(n) >= lo])
    den = rng.randint(1, 9)
    return Fraction(num, den)


def _sample_point(exprs, rng: random.Random):
    """Random rational values for every atom across ``exprs``; Laurent bases
    and function arguments get nonzero values; function samples are drawn per
    (name, derivative count) at the argument's value."""
    atoms = set()
    laurent = set()
    for e in exprs:
        atoms |= atoms_of(e)
        for mono in e._p:
            for a, exp in mono_atoms(mono):
                if exp < 0:
                    laurent.add(a)
    point = {}
    fsamples = []
    for a in sorted(atoms, key=lambda a: a.sort_key()):
        if isinstance(a, FuncAtom):
            fsamples.append(a)
            atoms_arg = a.arg
            if atoms_arg not in point:
                point[atoms_arg] = _rand_rational(rng, True)
        elif isinstance(a, (Sym, Jet)):
            if a not in point:
                point[a] = _rand_rational(rng, a in laurent)
    fvals = {}
    for a in sorted(fsamples, key=lambda a: a.sort_key()):
        key = (a.fname, a.nd, Fraction(point[a.arg]))
        if key not in fvals:
            fvals[key] = _rand_rational(rng, False)
    return point, fvals


def spot_check(problem: PdeProblem, law: ConservationLaw, trials: int = 20,
               seed: int = DEFAULT_SEED, max_retries: int = 5) -> VerificationReport:
    """Evaluate both sides of the divergence identity at random rational jet
    points; exact equality required.  Seeded and reproducible; evaluation
    singularities are resampled a bounded number of times."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    targets = contraction(problem, law.mult)
    if law.method == "approach_a":
        targets = [trunc_eps(t, problem.p) for t in targets]
    divs = law.divergence_slots(problem)
    exprs = list(targets) + list(divs)
    checks = []
    for trial in range(trials):
        rng = random.Random(f"{seed}:{trial}")
        ok = True
        witness = None
        for attempt in range(max_retries):
            try:
                point, fvals = _sample_point(exprs, rng)
                for k, (t, d) in enumerate(zip(targets, divs)):
                    lhs = eval_rational(t, point, fvals)
                    rhs = eval_rational(d, point, fvals)
                    if lhs != rhs:
                        ok = False
                        witness = {
                            "slot": k,
                            "lhs": lhs,
                            "rhs": rhs,
                            "point": {repr(a): v for a, v in sorted(point.items(), key=lambda av: av[0].sort_key())},
                        }
                        break
                break
            except EvalError:
                continue
        else:
            ok = False
            witness = "evaluation singularity persisted across retries"
        checks.append(CheckResult(f"spot[{trial}]", ok, witness=witness))
    return VerificationReport(checks, problem.p)


def full_report(problem: PdeProblem, law: ConservationLaw, trials: int = 5,
                seed: int = DEFAULT_SEED, depth: int = 2) -> dict:
    """All four checks; on-solution is attempted only when identity fails
    (identity success implies it).  Returns a dict of reports plus the
    certification outcome: 'identity', 'onsolution', or 'fail'."""
    reports = {
        "identity": verify_identity(problem, law),
        "euler": verify_euler(problem, law.mult),
        "spot": spot_check(problem, law, trials=trials, seed=seed),
    }
    if reports["identity"].passed:
        status = "identity"
    else:
        reports["onsolution"] = verify_on_solutions(problem, law, depth=depth)
        status = "onsolution" if reports["onsolution"].passed else "fail"
    return {"status": status, "reports": reports}
