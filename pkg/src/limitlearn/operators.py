"""Interaction operators, starred learners, the learner registry, totalization."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Callable, Optional

from .core import (
    ConfigError, ContractViolation, Diverged, HypTerm, Quest, QuestTerm,
    Seq, Text, content,
)

KINDS = ("G", "Psd", "Sd", "It", "Td")
INF = math.inf


@dataclass(eq=False)
class Learner:
    """A total step function plus metadata.

    Inputs by kind: G takes a sequence, Psd a (set, count) pair, Sd a set,
    It a (state, datum) pair with ``start()`` giving the state on the empty
    input, Td a single datum (and may answer ``Quest``).

    ``cost`` models a partial learner: ``step(x)`` counts as undefined until
    the budget reaches ``cost(sigma)``.  ``oracle`` optionally answers the
    set-interval questions that the forward-search transforms would otherwise
    settle by brute force (see ``transforms.sd_constant_on``).
    """

    id: str
    kind: str
    step: Callable[..., HypTerm]
    start: Optional[Callable[[], HypTerm]] = None
    cost: Optional[Callable[[Seq], float]] = None
    props: frozenset = frozenset()
    content_driven: bool = False
    oracle: Any = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ContractViolation(f"unknown learner kind {self.kind!r}")
        if self.kind == "It" and self.start is None:
            raise ContractViolation("iterative learner needs start()")
        if self.kind == "Sd":
            self.content_driven = True

    def __repr__(self) -> str:
        return f"Learner({self.id!r}, {self.kind})"


REGISTRY: dict[str, Learner] = {}


def register(h: Learner) -> Learner:
    """Add ``h`` under its id; re-registering the same id returns the first."""
    old = REGISTRY.get(h.id)
    if old is not None:
        return old
    REGISTRY[h.id] = h
    return h


def resolve(ref: str) -> Learner:
    try:
        return REGISTRY[ref]
    except KeyError:
        raise ConfigError(f"unresolved learner reference {ref!r}") from None


@dataclass
class HypSequence:
    terms: list
    prefix: Seq

    def __post_init__(self):
        if len(self.terms) != len(self.prefix) + 1:
            raise ContractViolation("need exactly one hypothesis per prefix")

    def __len__(self) -> int:
        return len(self.terms)

    def __getitem__(self, i):
        return self.terms[i]

    def digest(self) -> str:
        import hashlib
        h = hashlib.sha256()
        for t in self.terms:
            h.update(t.canon().encode())
            h.update(b"\n")
        return h.hexdigest()[:16]


def _check_budget(h: Learner, sigma: Seq, i: int, budget: float) -> None:
    if h.cost is not None and h.cost(sigma) > budget:
        raise Diverged(i, budget)


def run(h: Learner, text: Text | Seq, n: int, budget: float = INF) -> HypSequence:
    """Hypotheses of ``h`` on the prefixes T[0..n] of ``text``."""
    prefix = tuple(text[n]) if isinstance(text, Text) else tuple(text)[:n]
    if len(prefix) < n:
        raise ContractViolation("finite text shorter than n")
    terms: list = []
    if h.kind == "It":
        _check_budget(h, (), 0, budget)
        q = h.start()
        terms.append(q)
        for i, d in enumerate(prefix, 1):
            _check_budget(h, prefix[:i], i, budget)
            q = h.step(q, d)
            terms.append(q)
    elif h.kind == "Td":
        cur: HypTerm = Quest
        terms.append(cur)
        for i, d in enumerate(prefix, 1):
            _check_budget(h, prefix[:i], i, budget)
            out = h.step(d)
            if not isinstance(out, QuestTerm):
                cur = out
            terms.append(cur)
    else:
        for i in range(n + 1):
            sigma = prefix[:i]
            _check_budget(h, sigma, i, budget)
            if h.kind == "G":
                terms.append(h.step(sigma))
            elif h.kind == "Psd":
                terms.append(h.step(content(sigma), i))
            else:
                terms.append(h.step(content(sigma)))
    return HypSequence(terms, prefix)


def starred(h: Learner) -> Callable[[Seq], HypTerm]:
    """The G-view of ``h`` as a plain callable on sequences."""
    if h.kind == "G":
        return h.step
    if h.kind == "Psd":
        return lambda s: h.step(content(s), len(s))
    if h.kind == "Sd":
        return lambda s: h.step(content(s))
    if h.kind == "It":
        def it_star(s: Seq) -> HypTerm:
            q = h.start()
            for d in s:
                q = h.step(q, d)
            return q
        return it_star

    def td_star(s: Seq) -> HypTerm:
        cur: HypTerm = Quest
        for d in s:
            out = h.step(d)
            if not isinstance(out, QuestTerm):
                cur = out
        return cur
    return td_star


def star(h: Learner) -> Learner:
    if h.kind == "G":
        return h
    f = lru_cache(maxsize=1 << 16)(starred(h))
    return register(Learner(
        id=f"star[{h.id}]", kind="G", step=f, props=h.props,
        content_driven=h.content_driven or h.kind == "Sd", oracle=h.oracle,
        meta={"base": h.id},
    ))


class TotalLearner(Learner):
    """G-learner returned by :func:`totalize`; also exposes the delay function."""

    def delay(self, sigma: Seq) -> int:
        return self.meta["delay"](sigma)


def totalize(h: Learner) -> TotalLearner:
    """Run ``h`` on the longest prefix whose cost fits the input length.

    h'(sigma) = h(tau) where tau is the longest prefix of sigma with
    ``cost(tau) <= len(sigma)`` (the empty prefix always qualifies);
    ``delay(sigma) = len(tau)``.
    """
    if h.kind != "G":
        raise ContractViolation("totalize expects a G-learner")
    cost = h.cost or (lambda s: 0)
    if cost(()) > 0:
        raise ContractViolation("h(epsilon) must be defined at cost 0")

    def delay(sigma: Seq) -> int:
        n = len(sigma)
        for k in range(n, 0, -1):
            if cost(sigma[:k]) <= n:
                return k
        return 0

    def step(sigma: Seq) -> HypTerm:
        return h.step(tuple(sigma[: delay(sigma)]))

    # without a cost model the delay is the identity
    return register(TotalLearner(
        id=f"totalize[{h.id}]", kind="G", step=step, props=h.props | {"total"},
        content_driven=h.content_driven and h.cost is None, oracle=h.oracle,
        meta={"base": h.id, "delay": delay},
    ))


def with_cost(h: Learner, cost: Callable[[Seq], float], tag: str) -> Learner:
    """Copy of G-learner ``h`` that models partiality through ``cost``."""
    return register(Learner(
        id=f"{h.id}@{tag}", kind=h.kind, step=h.step, start=h.start, cost=cost,
        props=h.props, content_driven=h.content_driven, oracle=h.oracle,
        meta=dict(h.meta),
    ))
