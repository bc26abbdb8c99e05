"""Concrete indexed families and base learners used by the suite."""

from __future__ import annotations

from dataclasses import dataclass, field

from .core import (
    PAUSE, CoFinite, FamIdx, FinSet, HypTerm, IndexedFamily, PatchUnion, Quest,
    register_family, set_code, set_decode,
)
from .operators import Learner, register


# -- families ----------------------------------------------------------------

def _finz_decide(i: int, x: int) -> int:
    if i == 0:
        return int(x != 0)
    return int(x == 0 or x in set_decode(i - 1))


def finz_index(items) -> int:
    """Index of the finite language ``items | {0}`` in finz."""
    return 1 + set_code(set(items) - {0})


FINZ = register_family(IndexedFamily(
    "finz", _finz_decide,
    index_hint=(0, 1, finz_index({3}), finz_index({2}), finz_index({1, 4}),
                finz_index({2, 5, 7}), finz_index({1, 2, 3})),
    description="N minus {0}, plus every finite set containing 0",
))

FIN = register_family(IndexedFamily(
    "fin", lambda i, x: int(x in set_decode(i)),
    index_hint=(0, set_code({1, 4}), set_code({0, 3}), set_code({2}), set_code({0, 1, 2})),
    description="all finite sets, binary coding",
))

CHAIN = register_family(IndexedFamily(
    "chain", lambda i, x: int(x <= i),
    index_hint=(0, 1, 3, 6),
    description="initial segments [0, i]",
))


def _conflict_decide(i: int, x: int) -> int:
    if i == 0:
        return int(x in (0, 1))
    if i == 1:
        return int(x in (0, 1, 2))
    return int(x == i)


CONFLICT = register_family(IndexedFamily(
    "conflict", _conflict_decide,
    index_hint=(0, 1),
    description="{0,1} and {0,1,2}; singletons {i} for i >= 2",
))

COF = register_family(IndexedFamily(
    "cof", lambda i, x: int(x != i),
    index_hint=(0, 2, 5),
    description="co-singletons N minus {i}",
))

MOD3 = register_family(IndexedFamily(
    "mod3", lambda i, x: int(i < 3 and x % 3 == i),
    index_hint=(0, 1, 2),
    description="residue classes modulo 3; empty for i >= 3",
))


def finz() -> IndexedFamily:
    return FINZ


# -- exact interval oracles --------------------------------------------------

def _mex(d: frozenset) -> int:
    m = 0
    while m in d:
        m += 1
    return m


class SepOracle:
    @staticmethod
    def constant_on(lo: frozenset, hi: frozenset) -> bool:
        hi = lo | hi
        if 0 not in hi:
            return True
        return lo == hi

    @staticmethod
    def covers_on(lo: frozenset, hi: frozenset, s: frozenset) -> bool:
        hi = lo | hi
        if 0 not in lo and 0 in s:
            return False
        if 0 in hi and not s <= lo | {0}:
            return False
        return True


class CofOracle:
    parity_sensitive = False

    @classmethod
    def constant_on(cls, lo: frozenset, hi: frozenset) -> bool:
        hi = lo | hi
        if cls.parity_sensitive and hi != lo:
            return False
        return _mex(lo) not in hi

    @staticmethod
    def covers_on(lo: frozenset, hi: frozenset, s: frozenset) -> bool:
        # mex(D') for lo <= D' <= hi ranges over v not in lo with [0, v) in hi
        hi = lo | hi
        top = _mex(hi)
        return not any(v <= top and v not in lo for v in s)


class CofOscOracle(CofOracle):
    parity_sensitive = True


# -- base learners -----------------------------------------------------------

P0 = FamIdx("finz", 0)


def _sep(d: frozenset) -> HypTerm:
    return P0 if 0 not in d else FinSet(d)


def sep_learner() -> Learner:
    """Set-driven learner for finz: N minus {0} until 0 shows up, then the data."""
    return register(Learner(
        "sep_learner", "Sd", _sep, oracle=SepOracle,
        props=frozenset({"Cons", "CautTar", "total", "CInd"}),
        meta={"family": "finz"},
    ))


def fin_learner() -> Learner:
    return register(Learner(
        "fin_learner", "Sd", lambda d: FinSet(d),
        props=frozenset({"Cons", "CautTar", "SMon", "Mon", "WMon", "Conv", "SemConv",
                         "Wb", "Caut", "Dec", "SDec", "NU", "SNU", "total", "CInd"}),
        meta={"family": "fin"},
    ))


def _chain(d: frozenset) -> HypTerm:
    if not d:
        return FinSet(frozenset())
    m = max(d)
    return FamIdx("chain", m if 0 in d else m - 1)


def chain_learner() -> Learner:
    # inconsistent until 0 arrives: it then drops the largest datum
    return register(Learner(
        "chain_learner", "Sd", _chain,
        props=frozenset({"SMon", "Mon", "WMon", "CautTar", "total", "CInd"}),
        meta={"family": "chain"},
    ))


def _late0(d: frozenset) -> HypTerm:
    return FinSet(d) if 0 in d else FinSet(frozenset())


def late0_learner() -> Learner:
    """Conservative but inconsistent learner for the finite members of finz."""
    return register(Learner(
        "late0_learner", "Sd", _late0,
        props=frozenset({"Conv", "SemConv", "CautTar", "total", "CInd"}),
        meta={"family": "finz"},
    ))


def _conflict(d: frozenset) -> HypTerm:
    if 2 in d:
        return FamIdx("conflict", 1)
    if 1 in d:
        return FamIdx("conflict", 0)
    return FamIdx("conflict", 1)


def conflict_learner() -> Learner:
    """Guesses {0,1,2}, drops to {0,1} on seeing 1 and returns on seeing 2."""
    return register(Learner(
        "conflict_learner", "Sd", _conflict,
        props=frozenset({"total", "CInd", "Cons"}),
        meta={"family": "conflict"},
    ))


def _cof(d: frozenset) -> HypTerm:
    return CoFinite(frozenset({_mex(d)}))


def cof_learner() -> Learner:
    return register(Learner(
        "cof_learner", "Sd", _cof, oracle=CofOracle,
        props=frozenset({"Cons", "CautTar", "total", "CInd"}),
        meta={"family": "cof"},
    ))


def _cof_osc(d: frozenset) -> HypTerm:
    t = CoFinite(frozenset({_mex(d)}))
    return t if len(d) % 2 == 0 else PatchUnion(t, frozenset())


def cof_osc_learner() -> Learner:
    """Correct like cof_learner, but flips between two spellings by parity."""
    return register(Learner(
        "cof_osc_learner", "Sd", _cof_osc, oracle=CofOscOracle,
        props=frozenset({"Cons", "CautTar", "total", "CInd"}),
        meta={"family": "cof", "convergence": "Bc"},
    ))


def _mod3_td(d) -> HypTerm:
    if d == PAUSE or d < 3:
        return Quest
    return PatchUnion(FamIdx("mod3", d % 3), frozenset({d}))


def mod3_td_learner() -> Learner:
    """Transductive Bc learner: names the residue class, spelled per datum."""
    return register(Learner(
        "mod3_td", "Td", _mod3_td, props=frozenset({"total", "CInd"}),
        meta={"family": "mod3", "convergence": "Bc"},
    ))


def _chain_it(q: HypTerm, d) -> HypTerm:
    if d == PAUSE:
        return q
    m = q.index if isinstance(q, FamIdx) else -1
    return FamIdx("chain", max(m, d))


def chain_it_learner() -> Learner:
    return register(Learner(
        "chain_it", "It", _chain_it, start=lambda: FinSet(frozenset()),
        props=frozenset({"total", "CInd", "Cons"}),
        meta={"family": "chain"},
    ))


def _cof_it(q: HypTerm, d) -> HypTerm:
    (m,) = q.excluded
    if d == m:
        return CoFinite(frozenset({m + 1}))
    return q


def cof_it_learner() -> Learner:
    """Iterative learner for co-singletons presented in ascending order."""
    return register(Learner(
        "cof_it", "It", _cof_it, start=lambda: CoFinite(frozenset({0})),
        props=frozenset({"total", "CInd"}),
        meta={"family": "cof"},
    ))


# -- iterative fixtures for the separation falsifier --------------------------

def _it(name: str, start, step, note: str) -> Learner:
    return register(Learner(name, "It", step, start=start,
                            props=frozenset({"total", "CInd"}), meta={"note": note}))


def _count_then_guess(q: HypTerm, d) -> HypTerm:
    if not isinstance(q, FinSet):
        return q if d != 0 else FinSet(frozenset({0}))
    if d == PAUSE:
        return q
    items = q.items | {d}
    if 0 not in items and len(q.items) >= 3:
        return P0
    return FinSet(items)


def _delay5(q: HypTerm, d) -> HypTerm:
    # FinSet({k}) is a step counter; after five data the guess is fixed
    if isinstance(q, FinSet):
        (k,) = q.items
        return FinSet(frozenset({k + 1})) if k < 4 else P0
    return q


def _content_state(q: HypTerm, d) -> HypTerm:
    return q if d == PAUSE else FinSet(q.items | {d})


def falsify_fixtures() -> list:
    """Five iterative learners that converge on the canonical text of N minus {0}."""
    return [
        _it("it_const", lambda: P0, lambda q, d: q, "constant"),
        cof_it_learner(),
        _it("it_zero_watch", lambda: P0,
            lambda q, d: FinSet(frozenset({0})) if d == 0 else q, "switches on 0"),
        _it("it_count_then_guess", lambda: FinSet(frozenset()), _count_then_guess,
            "remembers three data, then guesses N minus {0}"),
        _it("it_delay5", lambda: FinSet(frozenset({0})), _delay5,
            "counts five steps before guessing"),
    ]


def injective_it_learner() -> Learner:
    """State is the full content seen; never reuses a state on new data."""
    return _it("it_content", lambda: FinSet(frozenset()), _content_state, "injective")


# -- the suite ---------------------------------------------------------------

@dataclass
class SuiteEntry:
    family: IndexedFamily
    learner: Learner
    props: frozenset
    members: tuple
    feeds: tuple = ()
    convergence: str = "Ex"
    notes: str = field(default="")


def standard_suite() -> list:
    return [
        SuiteEntry(FINZ, sep_learner(), frozenset({"Cons", "CautTar"}),
                   FINZ.index_hint,
                   feeds=("cauttar_to_wb", "g_to_sd_cauttar", "sd_cauttar_to_wb",
                          "g_to_psd", "to_hypothesis_space", "sd_bc_to_cauttar_bc")),
        SuiteEntry(FIN, fin_learner(), fin_learner().props, FIN.index_hint,
                   feeds=("make_consistent_patch", "g_to_psd", "bc_to_it_pad")),
        SuiteEntry(CHAIN, chain_learner(), chain_learner().props, CHAIN.index_hint,
                   feeds=("make_consistent_patch", "make_consistent_reset")),
        SuiteEntry(FINZ, late0_learner(), late0_learner().props, FINZ.index_hint[1:],
                   feeds=("make_consistent_dedup",)),
        SuiteEntry(CONFLICT, conflict_learner(), frozenset({"Cons"}), CONFLICT.index_hint,
                   feeds=("g_to_snu", "snu_to_sdec")),
        SuiteEntry(COF, cof_learner(), cof_learner().props, COF.index_hint,
                   feeds=("sd_cauttar_to_wb", "sd_bc_to_cauttar_bc", "sd_cauttar_bc_to_ex")),
        SuiteEntry(COF, cof_osc_learner(), cof_osc_learner().props, COF.index_hint,
                   feeds=("sd_cauttar_bc_to_ex",), convergence="Bc"),
        SuiteEntry(MOD3, mod3_td_learner(), frozenset(), MOD3.index_hint,
                   feeds=("td_bc_to_ex",), convergence="Bc"),
        SuiteEntry(CHAIN, chain_it_learner(), frozenset({"Cons"}), CHAIN.index_hint,
                   feeds=("it_to_sd",)),
        SuiteEntry(COF, cof_it_learner(), frozenset(), COF.index_hint,
                   feeds=("it_to_sd",)),
    ]


def catalog_learners() -> dict:
    makers = [sep_learner, fin_learner, chain_learner, late0_learner, conflict_learner,
              cof_learner, cof_osc_learner, mod3_td_learner, chain_it_learner,
              cof_it_learner, injective_it_learner]
    out = {m().id: m() for m in makers}
    for h in falsify_fixtures():
        out[h.id] = h
    return out
