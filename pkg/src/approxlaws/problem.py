"""Problem definition, the problem-file format, and on-solution reduction.

A problem is a system of equations over unexpanded dependent variables,
polynomial in the small parameter up to the truncation order, each solved
with respect to a declared leading derivative (Cauchy-Kovalevskaya form):
the remainder must be free of every equation's leading derivative and of
their further derivatives.

Problem files are line-oriented ``key = value`` text.  Declarations::

    name = diffusion-consistent
    method = consistent
    independent = t, x
    dependent = u
    parameters = c, lambda
    functions = f(u)
    order = 1
    equation = u_t - u^-2*u_xx + 2*u^-3*u_x^2 - eps*(1 + u^-2)*u_x
    leading = u_t

Optional expected-result blocks carry published multiplier/flux sets::

    multiplier.N.K = <expr>          (single equation; K = series slot)
    multiplier.N.NU.K = <expr>       (systems; NU = equation index)
    flux.N.VAR.K = <expr>            (VAR = independent variable name)
    expected.N.status = identity | onsolution
    epsilon_shifts = N, M            (laws whose eps-multiples are also listed results)
    hint.mult_deps = t, x, u[0]      (ansatz reproducing the results)
    hint.mult_degree = 2
    hint.laurent = u[0]:-2
    note = free-text documentation

``#`` starts a comment line.  Slot expressions for the consistent and
approach-b methods use expanded coordinates (``u[0]``, ``u[1]``); approach-a
slot expressions use unexpanded ones.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .atoms import Jet, Sym, SymbolTable
from .expr import NormalForm, as_poly, atoms_of, normalize, partial, pow_int, substitute
from .jets import collect_eps, expand_epsilon, total_derivative_chain
from .parser import ParseError, parse

MAX_ORDER = 3  # configuration cap on the truncation order


class ProblemError(Exception):
    pass


class InconclusiveReduction(Exception):
    """On-solution reduction did not terminate within the prolongation bound."""


def _multiset_contains(big: tuple, small: tuple) -> bool:
    rest = list(big)
    for s in small:
        if s in rest:
            rest.remove(s)
        else:
            return False
    return True


def _multiset_diff(big: tuple, small: tuple) -> tuple:
    rest = list(big)
    for s in small:
        rest.remove(s)
    return tuple(rest)


@dataclass
class PdeProblem:
    table: SymbolTable
    eqns: list
    leading: list
    p: int
    name: str = ""

    def __post_init__(self):
        if not (1 <= self.p <= MAX_ORDER):
            raise ProblemError(f"truncation order must be in 1..{MAX_ORDER}")
        if len(self.eqns) != len(self.leading):
            raise ProblemError("one leading derivative per equation is required")
        self.eqns = [normalize(e) for e in self.eqns]
        self._lead_coeff = []
        self._rest = []
        for nu, (eqn, lead) in enumerate(zip(self.eqns, self.leading)):
            if not isinstance(lead, Jet) or lead.order is not None:
                raise ProblemError("leading derivatives are unexpanded jet coordinates")
            for a in atoms_of(eqn):
                if isinstance(a, Jet) and a.order is not None:
                    raise ProblemError("equations are written over unexpanded variables")
            q = partial(eqn, lead)
            if q.is_zero():
                raise ProblemError(f"equation {nu + 1} does not contain its leading derivative")
            for a in atoms_of(q):
                if not (isinstance(a, Sym) and a.kind == "param"):
                    raise ProblemError(
                        f"equation {nu + 1}: leading derivative must occur linearly with a "
                        "parameter-monomial coefficient"
                    )
            if len(as_poly(q)) != 1:
                raise ProblemError(f"equation {nu + 1}: leading coefficient must be a monomial")
            rest = (q * lead - eqn) * pow_int(q, -1)
            self._lead_coeff.append(q)
            self._rest.append(rest)
        # Cauchy-Kovalevskaya: every rest free of all leading jets and their derivatives
        for nu, rest in enumerate(self._rest):
            for a in atoms_of(rest):
                if isinstance(a, Jet) and self._is_leading_like(a):
                    raise ProblemError(
                        f"equation {nu + 1} is not in Cauchy-Kovalevskaya form: "
                        f"remainder contains a leading-derived coordinate"
                    )
        for nu, eqn in enumerate(self.eqns):
            if len(collect_eps(eqn)) - 1 > self.p:
                raise ProblemError(f"equation {nu + 1} has eps-degree above the truncation order")

    # -- basic facts -------------------------------------------------------

    @property
    def q(self) -> int:
        return len(self.eqns)

    @property
    def r(self) -> int:
        """Maximum derivative order over all equations."""
        r = 0
        for eqn in self.eqns:
            for a in atoms_of(eqn):
                if isinstance(a, Jet):
                    r = max(r, len(a.deriv))
        return r

    def _is_leading_like(self, jet: Jet) -> bool:
        for lead in self.leading:
            if jet.dep == lead.dep and _multiset_contains(jet.deriv, lead.deriv):
                return True
        return False

    def expanded_slots(self, nu: int) -> list:
        """Slots of the expansion of equation ``nu`` at the problem order."""
        if not hasattr(self, "_exp_cache"):
            self._exp_cache = {}
        if nu not in self._exp_cache:
            self._exp_cache[nu] = expand_epsilon(self.eqns[nu], self.p).coeffs
        return self._exp_cache[nu]

    def unexpanded_slots(self, nu: int) -> list:
        """eps-power slots of equation ``nu`` without expanding variables."""
        slots = collect_eps(self.eqns[nu], self.p)
        slots += [{} for _ in range(self.p + 1 - len(slots))]
        return [NormalForm(s) for s in slots]

    # -- on-solution reduction ----------------------------------------------

    def solution_rules(self, expanded: bool):
        """Leading-derivative elimination images.

        Unexpanded: ``{leading jet: rest}``; expanded: per order k the slot
        equation gives ``u_(k),J_lead -> rest slot k``.
        """
        rules = []
        for nu in range(self.q):
            if expanded:
                rest_slots = expand_epsilon(self._rest[nu], self.p).coeffs
                for k in range(self.p + 1):
                    rules.append((self.leading[nu].with_order(k), rest_slots[k]))
            else:
                rules.append((self.leading[nu], self._rest[nu]))
        return rules

    def reduce_on_solutions(self, e, expanded: bool = True, depth: int = 2, max_rounds: int = 40) -> NormalForm:
        """Substitute leading derivatives and their differential consequences
        (prolongations up to ``depth`` extra derivatives) until none remain.

        Raises :class:`InconclusiveReduction` if a required prolongation
        exceeds the bound or the rewriting does not settle.
        """
        rules = self.solution_rules(expanded)
        cur = normalize(e)
        for _ in range(max_rounds):
            target = None
            for a in atoms_of(cur):
                if not isinstance(a, Jet):
                    continue
                for lead, rest in rules:
                    if a.dep == lead.dep and a.order == lead.order and _multiset_contains(a.deriv, lead.deriv):
                        extra = _multiset_diff(a.deriv, lead.deriv)
                        if len(extra) > depth:
                            raise InconclusiveReduction(
                                f"prolongation depth {len(extra)} exceeds bound {depth}"
                            )
                        target = (a, total_derivative_chain(rest, extra))
                        break
                if target:
                    break
            if target is None:
                if not expanded:
                    return NormalForm({m: c for m, c in _trunc_eps(as_poly(cur), self.p).items()})
                return cur
            cur = substitute(cur, {target[0]: target[1]})
            if not expanded:
                cur = NormalForm(_trunc_eps(as_poly(cur), self.p))
        raise InconclusiveReduction("rewriting did not settle within the round bound")


def _trunc_eps(p: dict, pmax: int) -> dict:
    from .atoms import EPS_SYM, intern

    eid = intern(EPS_SYM)
    out = {}
    for mono, c in p.items():
        keep = True
        for j in range(0, len(mono), 2):
            if mono[j] == eid and mono[j + 1] > pmax:
                keep = False
                break
        if keep:
            out[mono] = c
    return out


def trunc_eps(e, pmax: int) -> NormalForm:
    """Drop terms with eps-power above ``pmax``."""
    return NormalForm(_trunc_eps(as_poly(e), pmax))


# --- problem-file format -----------------------------------------------------


@dataclass
class ExpectedLaw:
    """Raw expected-result block from a problem file."""

    index: int
    mult: dict = field(default_factory=dict)   # (nu, k) -> NormalForm
    flux: dict = field(default_factory=dict)   # (direction index, k) -> NormalForm
    status: str | None = None


@dataclass
class ProblemFile:
    problem: PdeProblem
    method: str = "consistent"
    expected: list = field(default_factory=list)
    epsilon_shifts: list = field(default_factory=list)
    hints: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)


def _split_list(value: str) -> list[str]:
    return [v.strip() for v in value.split(",") if v.strip()]


def parse_problem_text(text: str, source: str = "<problem>") -> ProblemFile:
    decls = {"independent": [], "dependent": [], "parameters": [], "functions": []}
    entries = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ProblemError(f"{source}:{lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        entries.append((lineno, key.strip(), value.strip()))

    for _, key, value in entries:
        if key in decls:
            decls[key] = _split_list(value)

    funcs = []
    for decl in decls["functions"]:
        if "(" not in decl or not decl.endswith(")"):
            raise ProblemError(f"{source}: malformed function declaration {decl!r}")
        fname, arg = decl[:-1].split("(", 1)
        funcs.append((fname.strip(), arg.strip()))
    if not decls["independent"] or not decls["dependent"]:
        raise ProblemError(f"{source}: independent and dependent variables are required")
    table = SymbolTable(decls["independent"], decls["dependent"], decls["parameters"], funcs)

    name = ""
    method = "consistent"
    order = None
    eqn_texts = []
    leading = []
    expected: dict[int, ExpectedLaw] = {}
    shifts: list[int] = []
    hints: dict = {}
    notes: list[str] = []

    def law(n: int) -> ExpectedLaw:
        return expected.setdefault(n, ExpectedLaw(n))

    for lineno, key, value in entries:
        where = f"{source}:{lineno}"
        try:
            if key in decls:
                continue
            elif key == "name":
                name = value
            elif key == "method":
                if value not in ("consistent", "approach_a", "approach_b"):
                    raise ProblemError(f"{where}: unknown method {value!r}")
                method = value
            elif key == "order":
                order = int(value)
            elif key == "equation":
                eqn_texts.append(value)
            elif key == "leading":
                nf = normalize(parse(value, table))
                terms = list(nf.terms())
                ok = (
                    len(terms) == 1
                    and terms[0][0] == 1
                    and len(terms[0][1]) == 1
                    and terms[0][1][0][1] == 1
                    and isinstance(terms[0][1][0][0], Jet)
                )
                if not ok:
                    raise ProblemError(f"{where}: leading must be a single jet coordinate")
                leading.append(terms[0][1][0][0])
            elif key == "epsilon_shifts":
                shifts = [int(v) for v in _split_list(value)]
            elif key == "note":
                notes.append(value)
            elif key.startswith("hint."):
                hints[key[5:]] = value
            elif key.startswith("multiplier."):
                parts = key.split(".")
                if len(parts) == 3:
                    n, k = int(parts[1]), int(parts[2])
                    nu = 0
                elif len(parts) == 4:
                    n, nu, k = int(parts[1]), int(parts[2]) - 1, int(parts[3])
                else:
                    raise ProblemError(f"{where}: malformed multiplier key")
                law(n).mult[(nu, k)] = normalize(parse(value, table))
            elif key.startswith("flux."):
                parts = key.split(".")
                if len(parts) != 4:
                    raise ProblemError(f"{where}: malformed flux key")
                n, var, k = int(parts[1]), parts[2], int(parts[3])
                i = table.indep_index(var)
                if i is None:
                    raise ProblemError(f"{where}: {var!r} is not an independent variable")
                law(n).flux[(i, int(k))] = normalize(parse(value, table))
            elif key.startswith("expected."):
                parts = key.split(".")
                if len(parts) != 3 or parts[2] != "status":
                    raise ProblemError(f"{where}: malformed expected key")
                status = value
                if status not in ("identity", "onsolution"):
                    raise ProblemError(f"{where}: unknown status {status!r}")
                law(int(parts[1])).status = status
            else:
                raise ProblemError(f"{where}: unknown key {key!r}")
        except ParseError as exc:
            raise ProblemError(f"{where}: {exc}") from exc

    if order is None:
        raise ProblemError(f"{source}: order is required")
    if not eqn_texts:
        raise ProblemError(f"{source}: at least one equation is required")
    eqns = []
    for txt in eqn_texts:
        try:
            eqns.append(normalize(parse(txt, table)))
        except ParseError as exc:
            raise ProblemError(f"{source}: {exc}") from exc
    problem = PdeProblem(table, eqns, leading, order, name=name)
    laws = [expected[n] for n in sorted(expected)]
    return ProblemFile(problem, method, laws, shifts, hints, notes)


def load_problem_file(path) -> ProblemFile:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_problem_text(fh.read(), source=str(path))
