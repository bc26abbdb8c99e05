"""Bounded verifiers for learning restrictions and convergence criteria.

All semantic comparisons are made on ``[0, bound]``; every verdict records
the bound so the approximation stays visible in reports.  Clauses that refer
to the content of the whole text use the declared target language.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Optional, Sequence

from .core import (
    DEFAULT_BOUND, DEFAULT_HORIZON, ContractViolation, HypTerm, Seq, content,
    eval_term, semantics,
)
from .operators import HypSequence

TAGS = ("Cons", "Conv", "SemConv", "Caut", "CautTar", "Mon", "SMon", "WMon",
        "Wb", "Dec", "SDec", "NU", "SNU", "T")
MODES = ("Ex", "Bc")
# every tag but Cons is delayable
DELAYABLE = tuple(t for t in TAGS if t != "Cons")


@dataclass(frozen=True)
class Verdict:
    outcome: str  # Clean | Violation | Converged | NotConverged | Diverged | CapExceeded
    tag: str
    indices: tuple = ()
    witness: Optional[int] = None
    n0: Optional[int] = None
    term: Optional[HypTerm] = None
    bound: int = DEFAULT_BOUND
    horizon: int = DEFAULT_HORIZON
    note: str = ""

    @property
    def ok(self) -> bool:
        return self.outcome in ("Clean", "Converged")

    def line(self, text_id: str = "-") -> str:
        tail = f"B={self.bound} H={self.horizon}"
        if self.outcome == "Clean":
            body = "CLEAN"
        elif self.outcome == "Violation":
            w = "-" if self.witness is None else str(self.witness)
            body = "VIOLATION@(" + ",".join(map(str, self.indices)) + f") witness={w}"
        elif self.outcome == "Converged":
            body = f"CONVERGED@{self.n0} term={self.term.canon()}"
        else:
            body = self.outcome.upper()
            if self.note:
                body += f" ({self.note})"
        return f"{self.tag} {text_id} {body} {tail}"


def _first(xs: Iterable[int]) -> Optional[int]:
    return min(xs, default=None)


class _Ctx:
    """Precomputed bounded semantics of a hypothesis sequence."""

    def __init__(self, p: Sequence[HypTerm], prefix: Seq, target: HypTerm, bound: int):
        self.p = list(p)
        self.prefix = tuple(prefix)
        self.bound = bound
        self.sem = [semantics(t, bound) for t in self.p]
        self.target = semantics(target, bound)
        self.cont = [content(self.prefix[:i]) for i in range(len(self.prefix) + 1)]

    def has(self, i: int, x: int) -> bool:
        if x <= self.bound:
            return x in self.sem[i]
        return bool(eval_term(self.p[i], x)) if not _is_quest(self.p[i]) else False


def _is_quest(t: HypTerm) -> bool:
    return t.canon() == "?"


def _pairs_lt(n: int) -> Iterator[tuple]:
    for j in range(n):
        for i in range(j):
            yield i, j


def _triples(n: int) -> Iterator[tuple]:
    for k in range(n):
        for j in range(k + 1):
            for i in range(j + 1):
                yield i, j, k


def _violations(tag: str, c: _Ctx) -> Iterator[tuple]:
    """Yield (indices, witness) in report order: largest index first, then
    reversed-lexicographic."""
    n = len(c.p)
    S = c.sem
    if tag == "T":
        return
    if tag == "Cons":
        for i in range(n):
            miss = [x for x in c.cont[i] if not c.has(i, x)]
            if miss:
                yield (i,), min(miss)
    elif tag == "SMon":
        for i, j in _pairs_lt(n):
            d = S[i] - S[j]
            if d:
                yield (i, j), min(d)
    elif tag == "Mon":
        for i, j in _pairs_lt(n):
            d = (S[i] & c.target) - (S[j] & c.target)
            if d:
                yield (i, j), min(d)
    elif tag == "WMon":
        for i, j in _pairs_lt(n):
            if all(c.has(i, x) for x in c.cont[j]):
                d = S[i] - S[j]
                if d:
                    yield (i, j), min(d)
    elif tag == "Caut":
        for m in range(n):
            # pairs whose largest index is m; i > j is the violating direction
            for j in range(m):
                if S[m] < S[j]:
                    yield (m, j), min(S[j] - S[m])
    elif tag == "CautTar":
        for i in range(n):
            if c.target < S[i]:
                yield (i,), min(S[i] - c.target)
    elif tag == "Wb":
        # nxt[i]: first k > i with p(k) != p(i)
        nxt = [n] * n
        for i in range(n - 2, -1, -1):
            nxt[i] = i + 1 if c.p[i + 1] != c.p[i] else nxt[i + 1]
        for j in range(n):
            for i in range(j):
                k = nxt[i]
                if k > j:
                    continue
                if not any(c.has(j, x) and not c.has(i, x) for x in c.cont[j]):
                    yield (i, j, k), None
    elif tag == "Conv":
        for i in range(n - 1):
            if all(c.has(i, x) for x in c.cont[i + 1]) and c.p[i] != c.p[i + 1]:
                yield (i, i + 1), None
    elif tag == "SemConv":
        for i in range(n - 1):
            if all(c.has(i, x) for x in c.cont[i + 1]) and S[i] != S[i + 1]:
                yield (i, i + 1), min(S[i] ^ S[i + 1])
    elif tag in ("NU", "SNU", "Dec", "SDec"):
        for i, j, k in _triples(n):
            if S[i] != S[k]:
                continue
            if tag in ("NU", "SNU") and S[i] != c.target:
                continue
            if tag in ("NU", "Dec"):
                if S[i] != S[j]:
                    yield (i, j, k), min(S[i] ^ S[j])
            elif c.p[i] != c.p[j]:
                yield (i, j, k), None
    else:
        raise ContractViolation(f"unknown restriction tag {tag!r}")


def check_restriction(tag: str, p: HypSequence | Sequence[HypTerm], prefix: Seq | None,
                      target: HypTerm, bound: int = DEFAULT_BOUND,
                      horizon: int = DEFAULT_HORIZON) -> Verdict:
    if isinstance(p, HypSequence):
        terms, prefix = p.terms, (p.prefix if prefix is None else prefix)
    else:
        terms = list(p)
    if len(terms) != len(prefix) + 1:
        raise ContractViolation("|p| must equal |prefix| + 1")
    if tag not in TAGS:
        raise ContractViolation(f"unknown restriction tag {tag!r}")
    c = _Ctx(terms, prefix, target, bound)
    for idx, w in _violations(tag, c):
        return Verdict("Violation", tag, idx, w, bound=bound, horizon=horizon)
    return Verdict("Clean", tag, bound=bound, horizon=horizon)


def check_convergence(mode: str, p: HypSequence | Sequence[HypTerm], target: HypTerm,
                      bound: int = DEFAULT_BOUND, horizon: int = DEFAULT_HORIZON) -> Verdict:
    terms = p.terms if isinstance(p, HypSequence) else list(p)
    if not terms:
        raise ContractViolation("empty hypothesis sequence")
    if mode not in MODES:
        raise ContractViolation(f"unknown convergence mode {mode!r}")
    tgt = semantics(target, bound)
    n0 = None
    for n in range(len(terms) - 1, -1, -1):
        t = terms[n]
        ok = not _is_quest(t) and semantics(t, bound) == tgt
        if mode == "Ex":
            ok = ok and t == terms[-1]
        if not ok:
            break
        n0 = n
    # a syntactic limit must show up at least twice unless p has one term
    if mode == "Ex" and n0 is not None and len(terms) > 1 and n0 == len(terms) - 1:
        n0 = None
    if n0 is None:
        return Verdict("NotConverged", mode, bound=bound, horizon=horizon)
    return Verdict("Converged", mode, n0=n0, term=terms[n0], bound=bound, horizon=horizon)


def delay(p: HypSequence, r: Sequence[int], prefix: Seq | None = None) -> HypSequence:
    """The delayed sequence ``p o r`` paired with the text prefix ``prefix``.

    Without ``prefix`` the original text is kept, which satisfies the
    delayability premise whenever ``r(n) <= n``.
    """
    r = list(r)
    if any(b < a for a, b in zip(r, r[1:])):
        raise ContractViolation("r must be non-decreasing")
    if any(v > len(p) - 1 or v < 0 for v in r):
        raise ContractViolation("r points outside p")
    if prefix is None:
        if any(v > n for n, v in enumerate(r)):
            raise ContractViolation("pass a prefix when r(n) > n")
        prefix = p.prefix[: len(r) - 1]
        if len(prefix) < len(r) - 1:
            raise ContractViolation("r longer than the text prefix")
    return HypSequence([p.terms[v] for v in r], tuple(prefix))


def mind_changes(terms: Sequence[HypTerm]) -> list:
    return [i for i in range(1, len(terms)) if terms[i] != terms[i - 1]]
