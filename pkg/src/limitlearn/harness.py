"""Locking-sequence search, suite execution and the iterative-learner falsifier."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Optional

from .core import (
    DEFAULT_BOUND, DEFAULT_HORIZON, PAUSE, CapExceeded, Canonical, ContractViolation,
    Datum, Diverged, FamIdx, HypTerm, Seq, Seeded, Text, content, fmt_seq, get_family, lang_eq,
    semantics, sequences_over,
)
from .operators import INF, Learner, run, starred
from .restrictions import MODES, Verdict, check_convergence, check_restriction

SEEDED_TEXTS = 10


# -- locking sequences -------------------------------------------------------

def find_locking(h: Learner, lang: HypTerm, pool: int = 3, k: int = 2,
                 bound: int = DEFAULT_BOUND, mode: str = "Ex") -> Optional[Seq]:
    """Least sigma over ``(L & [0, bound])^{<= pool}_#`` such that every
    extension by ``tau`` of length <= k over the same alphabet keeps ``h*``
    correct and, in Ex mode, syntactically unchanged.

    Absent when no candidate in the pool qualifies; this is an approximation
    of the unbounded notion.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    hs = starred(h)
    alphabet = sorted(semantics(lang, bound)) + [PAUSE]
    exts = list(sequences_over(alphabet, k))
    for sigma in sequences_over(alphabet, pool):
        t = hs(sigma)
        ok = True
        for tau in exts:
            u = hs(sigma + tau)
            if (mode == "Ex" and u != t) or not lang_eq(u, lang, bound):
                ok = False
                break
        if ok:
            return sigma
    return None


# -- suite execution ---------------------------------------------------------

@dataclass(frozen=True)
class TextSpec:
    kind: str  # canonical | seeded
    seed: int = 0
    pause_rate: float = 0.2
    dup_rate: float = 0.2

    @property
    def id(self) -> str:
        return "canonical" if self.kind == "canonical" else f"seeded:{self.seed}"

    def build(self, lang: HypTerm) -> Text:
        if self.kind == "canonical":
            return Canonical(lang)
        if self.kind == "seeded":
            return Seeded(lang, self.seed, self.pause_rate, self.dup_rate)
        raise ValueError(f"unknown text kind {self.kind!r}")


def text_ensemble(kinds, seed: int = 0, seeds: int = SEEDED_TEXTS) -> list:
    out = []
    for kind in kinds:
        if kind == "canonical":
            out.append(TextSpec("canonical"))
        elif kind == "seeded":
            out.extend(TextSpec("seeded", seed + i) for i in range(seeds))
        else:
            raise ValueError(f"unknown text kind {kind!r}")
    return out


@dataclass
class Job:
    label: str
    learner: Callable[[], Learner]
    family: str
    index: int
    text: TextSpec
    checks: tuple
    bound: int = DEFAULT_BOUND
    horizon: int = DEFAULT_HORIZON
    seed: int = 0
    budget: float = INF  # step budget for costed learners


@dataclass
class RunReport:
    label: str
    learner: str
    family: str
    index: int
    text: str
    digest: Optional[str]
    convergence: list
    restrictions: list
    bound: int
    horizon: int
    seed: int
    error: Optional[str] = None
    terms: list = field(default_factory=list, repr=False)

    @property
    def ok(self) -> bool:
        return self.error is None and all(v.ok for v in self.convergence + self.restrictions)

    def lines(self) -> list:
        tid = f"{self.label}/{self.family}:{self.index}/{self.text}"
        return [v.line(tid) for v in self.restrictions + self.convergence]

    def to_dict(self) -> dict:
        def verdict(v: Verdict) -> dict:
            return {"tag": v.tag, "outcome": v.outcome, "indices": list(v.indices),
                    "witness": v.witness, "n0": v.n0,
                    "term": v.term.canon() if v.term is not None else None,
                    "note": v.note}
        return {"label": self.label, "learner": self.learner, "family": self.family,
                "index": self.index, "text": self.text, "digest": self.digest,
                "convergence": [verdict(v) for v in self.convergence],
                "restrictions": [verdict(v) for v in self.restrictions],
                "bound": self.bound, "horizon": self.horizon, "seed": self.seed,
                "error": self.error}


def _failed(outcome: str, checks, note: str, bound: int, horizon: int) -> list:
    return [Verdict(outcome, c, bound=bound, horizon=horizon, note=note) for c in checks]


def run_job(job: Job) -> RunReport:
    target = FamIdx(job.family, job.index)
    conv_checks = [c for c in job.checks if c in MODES]
    tag_checks = [c for c in job.checks if c not in MODES]
    learner_id = "?"
    try:
        h = job.learner()
        learner_id = h.id
        text = job.text.build(target)
        p = run(h, text, job.horizon, job.budget)
        conv = [check_convergence(m, p, target, job.bound, job.horizon) for m in conv_checks]
        tags = [check_restriction(t, p, None, target, job.bound, job.horizon)
                for t in tag_checks]
        return RunReport(job.label, h.id, job.family, job.index, job.text.id, p.digest(),
                         conv, tags, job.bound, job.horizon, job.seed, terms=p.terms)
    except (CapExceeded, Diverged) as e:
        outcome = "CapExceeded" if isinstance(e, CapExceeded) else "Diverged"
        return RunReport(job.label, learner_id, job.family, job.index, job.text.id, None,
                         _failed(outcome, conv_checks, str(e), job.bound, job.horizon),
                         _failed(outcome, tag_checks, str(e), job.bound, job.horizon),
                         job.bound, job.horizon, job.seed, error=str(e))


def run_suite(jobs) -> list:
    """Run jobs in order; search failures become verdicts, not exceptions."""
    return [run_job(j) for j in jobs]


def dump_reports(reports) -> str:
    return json.dumps([r.to_dict() for r in reports], indent=2, sort_keys=True)


def summary_matrix(reports) -> str:
    """One row per job label, one column per check, cell = clean/total."""
    labels: list = []
    checks: list = []
    cells: dict = {}
    for r in reports:
        if r.label not in labels:
            labels.append(r.label)
        for v in r.restrictions + r.convergence:
            if v.tag not in checks:
                checks.append(v.tag)
            ok, n = cells.get((r.label, v.tag), (0, 0))
            cells[(r.label, v.tag)] = (ok + v.ok, n + 1)
    width = max([len(x) for x in labels] + [5])
    head = " " * width + " | " + " | ".join(f"{c:>7}" for c in checks)
    rows = [head, "-" * len(head)]
    for lab in labels:
        cols = []
        for c in checks:
            if (lab, c) in cells:
                ok, n = cells[(lab, c)]
                cols.append(f"{ok:>3}/{n:<3}")
            else:
                cols.append(f"{'-':>7}")
        rows.append(f"{lab:<{width}} | " + " | ".join(cols))
    return "\n".join(rows)


# -- the iterative falsifier -------------------------------------------------

class _Tail(Text):
    """``prefix`` followed by ``filler`` forever."""

    def __init__(self, prefix: Seq, filler: Datum):
        self.prefix = tuple(prefix)
        self.filler = filler
        self.name = f"{fmt_seq(self.prefix)}.{filler}^inf"

    def at(self, n: int) -> Datum:
        return self.prefix[n] if n < len(self.prefix) else self.filler


@dataclass
class FalsificationCertificate:
    learner: str
    n0: int
    prefix: Seq
    x: int
    text1: Seq
    text2: Seq
    hypotheses: list
    digest1: str
    digest2: str
    target1: HypTerm
    target2: HypTerm
    horizon: int

    def verify(self, h: Learner, bound: int = DEFAULT_BOUND) -> bool:
        p1 = run(h, self.text1, self.horizon)
        p2 = run(h, self.text2, self.horizon)
        return (p1.digest() == p2.digest() == self.digest1 == self.digest2
                and semantics(self.target1, bound) != semantics(self.target2, bound))

    def lines(self) -> list:
        return [
            f"learner {self.learner}",
            f"n0={self.n0} prefix={fmt_seq(self.prefix)} x={self.x}",
            f"T1={fmt_seq(self.text1[: len(self.prefix) + 3])}... target={self.target1.canon()}",
            f"T2={fmt_seq(self.text2[: len(self.prefix) + 3])}... target={self.target2.canon()}",
            f"digest T1={self.digest1} T2={self.digest2} H={self.horizon}",
        ]


def _finz_member(items) -> HypTerm:
    from .families import finz_index
    return FamIdx("finz", finz_index(items))


def falsify_it(h: Learner, horizon: int = DEFAULT_HORIZON,
               bound: int = DEFAULT_BOUND) -> Optional[FalsificationCertificate]:
    """Find a state of ``h`` on the canonical text of N minus {0} that cannot
    tell the next datum x+1 from x+2, and build two texts for distinct finite
    languages on which ``h`` gives identical hypotheses.

    ``x`` is the largest datum seen so far (0 on the empty prefix).
    """
    if h.kind != "It":
        raise ValueError("falsify_it expects an iterative learner")
    get_family("finz")
    text = Canonical(FamIdx("finz", 0))
    q = h.start()
    for n0 in range(horizon + 1):
        sigma = text[n0]
        x = max(content(sigma), default=0)
        if h.step(q, x + 1) == h.step(q, x + 2):
            t1 = _Tail(sigma + (x + 1,), 0)[horizon]
            t2 = _Tail(sigma + (x + 2,), 0)[horizon]
            p1 = run(h, t1, horizon)
            p2 = run(h, t2, horizon)
            if p1.terms != p2.terms:
                raise ContractViolation("equal states diverged; step is not a function")
            cert = FalsificationCertificate(
                h.id, n0, sigma, x, t1, t2, p1.terms, p1.digest(), p2.digest(),
                _finz_member(content(sigma) | {0, x + 1}),
                _finz_member(content(sigma) | {0, x + 2}), horizon)
            return cert
        q = h.step(q, text.at(n0))
    return None
