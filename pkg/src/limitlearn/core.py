"""Sequences, texts, indexed families and the hypothesis-term algebra.

Data items are naturals or the pause ``#``; a sequence is a plain tuple of
items.  Hypotheses are closed terms whose interpretation is a total 0/1
function, i.e. a characteristic index.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable, Iterator, Union

PAUSE = "#"

Datum = Union[int, str]
Seq = tuple

DEFAULT_BOUND = 64
DEFAULT_HORIZON = 100
# texts never scan the universe past this point
SCAN_LIMIT = 4096


class LearnError(Exception):
    """Base class for errors raised by the framework."""


class ConfigError(LearnError):
    """A learner or family reference does not resolve."""


class ContractViolation(LearnError):
    """An operation was called outside its precondition."""


class CapExceeded(LearnError):
    """An exponential search went over its explicit cap."""

    def __init__(self, what: str, cap: int):
        super().__init__(f"{what}: cap {cap} exceeded")
        self.what = what
        self.cap = cap


class Diverged(LearnError):
    """A partial learner did not halt within the supplied budget."""

    def __init__(self, step: int, budget: int):
        super().__init__(f"learner undefined at step {step} within budget {budget}")
        self.step = step
        self.budget = budget


def is_pause(d: Datum) -> bool:
    return d == PAUSE


# -- sequences ---------------------------------------------------------------

def content(seq: Iterable[Datum]) -> frozenset:
    return frozenset(d for d in seq if d != PAUSE)


def item_code(d: Datum) -> int:
    return 0 if d == PAUSE else d + 1


def seq_key(seq: Seq) -> tuple:
    """Sort key of the total order on sequences: length first, then item codes."""
    return (len(seq), tuple(item_code(d) for d in seq))


def seq_order(a: Seq, b: Seq) -> int:
    """Return -1, 0 or 1 as ``a`` is below, equal to or above ``b``."""
    ka, kb = seq_key(a), seq_key(b)
    return (ka > kb) - (ka < kb)


def is_prefix(a: Seq, b: Seq) -> bool:
    return len(a) <= len(b) and tuple(b[: len(a)]) == tuple(a)


def dedup(seq: Seq) -> Seq:
    seen = set()
    out = []
    for d in seq:
        if d == PAUSE or d in seen:
            continue
        seen.add(d)
        out.append(d)
    return tuple(out)


def sort_pause(items: Iterable[int]) -> Seq:
    out: list = []
    for d in sorted(items):
        if out:
            out.append(PAUSE)
        out.append(d)
    return tuple(out)


def canonical_seq(items: Iterable[int], k: int | None = None) -> Seq:
    """First ``k`` elements of a finite set in ascending order."""
    s = tuple(sorted(items))
    return s if k is None else s[:k]


def sequences_over(alphabet: Iterable[Datum], max_len: int) -> Iterator[Seq]:
    """All sequences over ``alphabet`` of length at most ``max_len``, in seq order."""
    letters = sorted(set(alphabet), key=item_code)
    for n in range(max_len + 1):
        yield from itertools.product(letters, repeat=n)


def set_code(items: Iterable[int]) -> int:
    return sum(1 << d for d in set(items))


def set_decode(code: int) -> frozenset:
    out = []
    d = 0
    while code:
        if code & 1:
            out.append(d)
        code >>= 1
        d += 1
    return frozenset(out)


def subsets_by_code(items: Iterable[int]) -> Iterator[frozenset]:
    """Subsets of a finite set in increasing binary-code order."""
    elems = sorted(items)
    for mask in range(1 << len(elems)):
        yield frozenset(e for b, e in enumerate(elems) if mask >> b & 1)


def interval_sets(lo: frozenset, hi: frozenset) -> Iterator[frozenset]:
    """Every D with lo <= D <= hi (hi is taken as lo | hi)."""
    for extra in subsets_by_code(hi - lo):
        yield lo | extra


def fmt_seq(seq: Seq) -> str:
    return "<" + ",".join(str(d) for d in seq) + ">"


def fmt_set(items: Iterable[int]) -> str:
    return "{" + ",".join(str(d) for d in sorted(items)) + "}"


# -- indexed families --------------------------------------------------------

@dataclass(frozen=True)
class IndexedFamily:
    name: str
    decide: Callable[[int, int], int] = field(compare=False)
    index_hint: tuple = ()
    bound: int = DEFAULT_BOUND
    description: str = ""

    def member(self, i: int, x: int) -> bool:
        return self.decide(i, x) == 1

    def language(self, i: int) -> "HypTerm":
        return FamIdx(self.name, i)


FAMILIES: dict[str, IndexedFamily] = {}


def register_family(fam: IndexedFamily) -> IndexedFamily:
    old = FAMILIES.get(fam.name)
    if old is not None and old is not fam:
        return old
    FAMILIES[fam.name] = fam
    return fam


def get_family(name: str) -> IndexedFamily:
    try:
        return FAMILIES[name]
    except KeyError:
        raise ConfigError(f"unregistered family {name!r}") from None


# -- hypothesis terms --------------------------------------------------------

class HypTerm:
    """Closed hypothesis term; equality is syntactic."""

    __slots__ = ()

    def canon(self) -> str:
        raise NotImplementedError

    def __str__(self) -> str:
        return self.canon()


@dataclass(frozen=True)
class QuestTerm(HypTerm):
    def canon(self) -> str:
        return "?"


Quest = QuestTerm()


@dataclass(frozen=True)
class FamIdx(HypTerm):
    """Index into a registered family; sequence-indexed spaces use a Seq."""

    family: str
    index: Union[int, tuple]

    def canon(self) -> str:
        idx = fmt_seq(self.index) if isinstance(self.index, tuple) else self.index
        return f"famidx({self.family},{idx})"


@dataclass(frozen=True)
class FinSet(HypTerm):
    items: frozenset

    def canon(self) -> str:
        return "finset(" + ",".join(map(str, sorted(self.items))) + ")"


@dataclass(frozen=True)
class CoFinite(HypTerm):
    excluded: frozenset

    def canon(self) -> str:
        return "cofin(" + ",".join(map(str, sorted(self.excluded))) + ")"


@dataclass(frozen=True)
class PatchUnion(HypTerm):
    inner: HypTerm
    items: frozenset

    def canon(self) -> str:
        return f"patch({self.inner.canon()},{fmt_set(self.items)})"


@dataclass(frozen=True)
class ResetSet(HypTerm):
    items: frozenset

    def canon(self) -> str:
        return "reset(" + ",".join(map(str, sorted(self.items))) + ")"


@dataclass(frozen=True)
class WbForward(HypTerm):
    learner: str
    items: frozenset

    def canon(self) -> str:
        return f"wbfwd({self.learner},{fmt_set(self.items)})"


@dataclass(frozen=True)
class CautBc(HypTerm):
    learner: str
    items: frozenset

    def canon(self) -> str:
        return f"cautbc({self.learner},{fmt_set(self.items)})"


@dataclass(frozen=True)
class Poison(HypTerm):
    learner: str
    family: str
    seq: Seq

    def canon(self) -> str:
        return f"poison({self.learner},{self.family},{fmt_seq(self.seq)})"


@dataclass(frozen=True)
class Pad(HypTerm):
    inner: HypTerm
    seq: Seq

    def canon(self) -> str:
        return f"pad({self.inner.canon()},{fmt_seq(self.seq)})"


def finset(*items: int) -> FinSet:
    return FinSet(frozenset(items))


# -- interpreter -------------------------------------------------------------

# Recursive constructors delegate to an evaluator registered by the module
# that builds them (transforms); this keeps core free of learner semantics.
_EVALUATORS: dict[type, Callable[[HypTerm, int], int]] = {}


def register_evaluator(cls: type, fn: Callable[[HypTerm, int], int]) -> None:
    _EVALUATORS[cls] = fn


@lru_cache(maxsize=1 << 20)
def eval_term(t: HypTerm, x: int) -> int:
    """Value of the characteristic function denoted by ``t`` at ``x``."""
    if isinstance(t, FinSet) or isinstance(t, ResetSet):
        return int(x in t.items)
    if isinstance(t, CoFinite):
        return int(x not in t.excluded)
    if isinstance(t, FamIdx):
        return 1 if get_family(t.family).decide(t.index, x) == 1 else 0
    if isinstance(t, PatchUnion):
        return 1 if x in t.items else eval_term(t.inner, x)
    if isinstance(t, Pad):
        return eval_term(t.inner, x)
    if isinstance(t, QuestTerm):
        raise ContractViolation("'?' has no semantics")
    fn = _EVALUATORS.get(type(t))
    if fn is None:
        raise ConfigError(f"no evaluator for {type(t).__name__}")
    return fn(t, x)


@lru_cache(maxsize=1 << 16)
def semantics(t: HypTerm, bound: int = DEFAULT_BOUND) -> frozenset:
    """``{x <= bound | t(x) = 1}``; ``?`` denotes the empty set here."""
    if isinstance(t, QuestTerm):
        return frozenset()
    return frozenset(x for x in range(bound + 1) if eval_term(t, x))


def below(t: HypTerm, x: int) -> frozenset:
    """Elements of the hypothesis up to and including ``x``."""
    return semantics(t, x)


def semantic_eq(t1: HypTerm, t2: HypTerm, bound: int = DEFAULT_BOUND) -> bool:
    return all(eval_term(t1, x) == eval_term(t2, x) for x in range(bound + 1))


def lang_eq(t: HypTerm, target: HypTerm, bound: int = DEFAULT_BOUND) -> bool:
    if isinstance(t, QuestTerm):
        return False
    return semantics(t, bound) == semantics(target, bound)


# -- texts -------------------------------------------------------------------

class Text:
    """Total presentation of data; ``text[n]`` is the prefix of length n."""

    name = "text"

    def at(self, n: int) -> Datum:
        raise NotImplementedError

    def __getitem__(self, n: int) -> Seq:
        return tuple(self.at(i) for i in range(n))

    def guaranteed_coverage(self, horizon: int) -> int:
        return horizon


def _elements(lang: HypTerm, limit: int = SCAN_LIMIT) -> Iterator[int]:
    for x in range(limit + 1):
        if eval_term(lang, x):
            yield x


class Canonical(Text):
    """Elements of the language in strictly ascending order, then pauses."""

    def __init__(self, lang: HypTerm, limit: int = SCAN_LIMIT):
        self.lang = lang
        self.limit = limit
        self.name = "canonical"
        self._cache: list[int] = []
        self._it = _elements(lang, limit)
        self._done = False

    def at(self, n: int) -> Datum:
        while len(self._cache) <= n and not self._done:
            try:
                self._cache.append(next(self._it))
            except StopIteration:
                self._done = True
        return self._cache[n] if n < len(self._cache) else PAUSE


class FiniteThenPauses(Text):
    def __init__(self, seq: Seq):
        self.seq = tuple(seq)
        self.name = "finite:" + fmt_seq(self.seq)

    def at(self, n: int) -> Datum:
        return self.seq[n] if n < len(self.seq) else PAUSE


class Lcg:
    """Numerical Recipes LCG, x' = (1664525 x + 1013904223) mod 2^32."""

    A = 1664525
    C = 1013904223
    M = 1 << 32

    def __init__(self, seed: int):
        self.state = seed % self.M

    def next(self) -> int:
        self.state = (self.A * self.state + self.C) % self.M
        return self.state

    def unit(self) -> float:
        return self.next() / self.M


class Seeded(Text):
    """Ascending enumeration interleaved with pauses and repetitions.

    At each position one LCG draw decides: pause with probability
    ``pause_rate``; otherwise repeat a uniformly chosen earlier element with
    probability ``dup_rate`` (if any); otherwise present the next new element.
    Since both rates are below 1 every element appears eventually.
    """

    def __init__(self, lang: HypTerm, seed: int, pause_rate: float = 0.2,
                 dup_rate: float = 0.2, limit: int = SCAN_LIMIT):
        if not (0 <= pause_rate < 1 and 0 <= dup_rate < 1):
            raise ContractViolation("rates must lie in [0, 1)")
        self.lang = lang
        self.seed = seed
        self.pause_rate = pause_rate
        self.dup_rate = dup_rate
        self.name = f"seeded:{seed}"
        self._rng = Lcg(seed)
        self._it = _elements(lang, limit)
        self._shown: list[int] = []
        self._out: list[Datum] = []
        self._exhausted = False

    def _draw(self) -> Datum:
        if self._rng.unit() < self.pause_rate:
            return PAUSE
        if self._shown and self._rng.unit() < self.dup_rate:
            return self._shown[self._rng.next() % len(self._shown)]
        if not self._exhausted:
            try:
                x = next(self._it)
                self._shown.append(x)
                return x
            except StopIteration:
                self._exhausted = True
        return PAUSE

    def at(self, n: int) -> Datum:
        while len(self._out) <= n:
            self._out.append(self._draw())
        return self._out[n]

    def guaranteed_coverage(self, horizon: int) -> int:
        # expected fraction of fresh draws is (1-p)(1-d); pad generously
        frac = (1 - self.pause_rate) * (1 - self.dup_rate)
        return int(horizon / max(frac, 1e-3)) * 2


class Delayed(Text):
    """Text T'(n) = T(r(n)) for a non-decreasing table r (extended by +1 steps)."""

    def __init__(self, inner: Text, table: Iterable[int]):
        self.inner = inner
        self.table = tuple(table)
        if any(b < a for a, b in zip(self.table, self.table[1:])):
            raise ContractViolation("delay table must be non-decreasing")
        self.name = f"delayed:{inner.name}"

    def at(self, n: int) -> Datum:
        if n < len(self.table):
            return self.inner.at(self.table[n])
        last = self.table[-1] if self.table else -1
        return self.inner.at(last + n - len(self.table) + 1)


# -- canonical form parsing --------------------------------------------------

class TermSyntaxError(LearnError):
    def __init__(self, msg: str, pos: int):
        super().__init__(f"{msg} at offset {pos}")
        self.pos = pos


_REF_STOP = set("(),{}<> \t\n")


class _TermReader:
    def __init__(self, s: str):
        self.s = s
        self.i = 0

    def peek(self) -> str:
        return self.s[self.i] if self.i < len(self.s) else ""

    def expect(self, ch: str) -> None:
        if self.peek() != ch:
            raise TermSyntaxError(f"expected {ch!r}", self.i)
        self.i += 1

    def word(self) -> str:
        j = self.i
        while self.i < len(self.s) and self.s[self.i] not in _REF_STOP and self.s[self.i] != ",":
            self.i += 1
        if j == self.i:
            raise TermSyntaxError("expected a name", j)
        return self.s[j:self.i]

    def nat(self) -> int:
        j = self.i
        while self.peek().isdigit():
            self.i += 1
        if j == self.i:
            raise TermSyntaxError("expected a number", j)
        return int(self.s[j:self.i])

    def nats_until(self, close: str) -> list:
        out = []
        if self.peek() == close:
            self.i += 1
            return out
        while True:
            out.append(self.nat())
            if self.peek() == ",":
                self.i += 1
                continue
            self.expect(close)
            return out

    def braced(self) -> frozenset:
        self.expect("{")
        return frozenset(self.nats_until("}"))

    def seq(self) -> Seq:
        self.expect("<")
        out: list = []
        if self.peek() == ">":
            self.i += 1
            return ()
        while True:
            if self.peek() == PAUSE:
                self.i += 1
                out.append(PAUSE)
            else:
                out.append(self.nat())
            if self.peek() == ",":
                self.i += 1
                continue
            self.expect(">")
            return tuple(out)

    def term(self) -> HypTerm:
        if self.peek() == "?":
            self.i += 1
            return Quest
        head = self.word()
        self.expect("(")
        if head == "finset":
            return FinSet(frozenset(self.nats_until(")")))
        if head == "reset":
            return ResetSet(frozenset(self.nats_until(")")))
        if head == "cofin":
            return CoFinite(frozenset(self.nats_until(")")))
        if head == "famidx":
            fam = self.word()
            self.expect(",")
            idx = self.seq() if self.peek() == "<" else self.nat()
            t: HypTerm = FamIdx(fam, idx)
        elif head == "patch":
            inner = self.term()
            self.expect(",")
            t = PatchUnion(inner, self.braced())
        elif head == "pad":
            inner = self.term()
            self.expect(",")
            t = Pad(inner, self.seq())
        elif head in ("wbfwd", "cautbc"):
            ref = self.word()
            self.expect(",")
            items = self.braced()
            t = WbForward(ref, items) if head == "wbfwd" else CautBc(ref, items)
        elif head == "poison":
            ref = self.word()
            self.expect(",")
            fam = self.word()
            self.expect(",")
            t = Poison(ref, fam, self.seq())
        else:
            raise TermSyntaxError(f"unknown constructor {head!r}", self.i)
        self.expect(")")
        return t


def parse_term(s: str) -> HypTerm:
    r = _TermReader(s.strip())
    t = r.term()
    if r.i != len(r.s):
        raise TermSyntaxError("trailing input", r.i)
    return t


def parse_datum(s: str) -> Datum:
    s = s.strip()
    if s == PAUSE:
        return PAUSE
    if not s.isdigit():
        raise TermSyntaxError(f"bad datum {s!r}", 0)
    return int(s)
