"""Machine-readable encodings of the worked problems with their published
multiplier and flux sets, used as regression fixtures and format examples.

Each entry is a problem file under ``data/``; the eps-multiple families
("the remaining multipliers are eps times the listed ones") are declared by
an ``epsilon_shifts`` line and expanded at load time.  ``audit`` runs the
full verifier over every law and reports the certification outcome; a law
that fails both the identity and the on-solution check is surfaced as an
erratum candidate, never silently accepted.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources

from ..expr import NormalForm, normalize
from ..fluxes import ConservationLaw
from ..multipliers import AnsatzSpec, MultiplierSet
from ..parser import parse
from ..problem import PdeProblem, parse_problem_text
from ..verify import DEFAULT_SEED, full_report

ENTRY_IDS = [
    "diffusion-consistent",
    "diffusion-approach-a",
    "diffusion-approach-b",
    "kdv-burgers",
    "wave",
    "nls2",
    "nls3",
    "kaup-newell",
]


@dataclass
class CorpusLaw:
    label: str
    law: ConservationLaw
    expected_status: str = "identity"


@dataclass
class CorpusEntry:
    id: str
    problem: PdeProblem
    method: str
    laws: list
    ansatz_hint: AnsatzSpec | None = None
    notes: list = field(default_factory=list)


def _entry_text(entry_id: str) -> str:
    res = resources.files(__package__).joinpath("data", f"{entry_id}.prob")
    return res.read_text(encoding="utf-8")


def _parse_hint(problem: PdeProblem, hints: dict) -> AnsatzSpec | None:
    if "mult_deps" not in hints:
        return None
    gens = []
    for txt in hints["mult_deps"].split(","):
        nf = normalize(parse(txt.strip(), problem.table))
        terms = list(nf.terms())
        assert len(terms) == 1 and len(terms[0][1]) == 1 and terms[0][1][0][1] == 1
        gens.append(terms[0][1][0][0])
    degree = int(hints.get("mult_degree", 1))
    xdegree = int(hints["mult_xdegree"]) if "mult_xdegree" in hints else None
    laurent = {}
    for item in hints.get("laurent", "").split(","):
        item = item.strip()
        if not item:
            continue
        atom_txt, _, lo = item.partition(":")
        nf = normalize(parse(atom_txt.strip(), problem.table))
        atom = list(nf.terms())[0][1][0][0]
        laurent[atom] = int(lo) if lo else -2
    return AnsatzSpec(tuple(gens), degree, xdegree, laurent)


def _law_from_expected(problem: PdeProblem, method: str, exp) -> ConservationLaw:
    p = problem.p
    nslots = 1 if method == "approach_b" else p + 1
    mult_slots = []
    for nu in range(problem.q):
        row = [exp.mult.get((nu, k), NormalForm({})) for k in range(p + 1)]
        mult_slots.append(tuple(row))
    flux = []
    for i in range(problem.table.n_indep):
        row = [exp.flux.get((i, k), NormalForm({})) for k in range(nslots)]
        flux.append(tuple(row))
    mult = MultiplierSet(method, tuple(mult_slots), provenance="corpus")
    return ConservationLaw(mult, tuple(flux))


def load(entry_id: str) -> CorpusEntry:
    """Parse one corpus entry; raises on unknown ids or malformed fixtures."""
    if entry_id not in ENTRY_IDS:
        raise KeyError(f"unknown corpus entry {entry_id!r}")
    pf = parse_problem_text(_entry_text(entry_id), source=entry_id)
    laws = []
    for exp in pf.expected:
        law = _law_from_expected(pf.problem, pf.method, exp)
        laws.append(CorpusLaw(str(exp.index), law, exp.status or "identity"))
    by_label = {cl.label: cl for cl in laws}
    for n in pf.epsilon_shifts:
        base = by_label[str(n)]
        laws.append(
            CorpusLaw(f"{n}*eps", base.law.eps_shifted(), base.expected_status)
        )
    return CorpusEntry(
        entry_id,
        pf.problem,
        pf.method,
        laws,
        ansatz_hint=_parse_hint(pf.problem, pf.hints),
        notes=pf.notes,
    )


def load_all() -> list:
    return [load(eid) for eid in ENTRY_IDS]


@dataclass
class LawAudit:
    entry_id: str
    label: str
    expected: str
    achieved: str
    reports: dict

    @property
    def certified(self) -> bool:
        return self.achieved in ("identity", "onsolution")

    @property
    def as_expected(self) -> bool:
        return self.achieved == self.expected


def audit(entry_ids=None, trials: int = 3, seed: int = DEFAULT_SEED) -> list:
    """Run the full verifier over every expected law of the selected entries.
    Returns one :class:`LawAudit` per law; non-identity outcomes are the
    erratum-candidate ledger."""
    out = []
    for eid in entry_ids or ENTRY_IDS:
        entry = load(eid)
        for cl in entry.laws:
            fr = full_report(entry.problem, cl.law, trials=trials, seed=seed)
            out.append(LawAudit(eid, cl.label, cl.expected_status, fr["status"], fr["reports"]))
    return out
