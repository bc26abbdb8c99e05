import itertools

import pytest
from hypothesis import given, settings, strategies as st

from limitlearn.core import (
    PAUSE, Canonical, CoFinite, ConfigError, ContractViolation, Delayed, FamIdx, FinSet,
    FiniteThenPauses, Lcg, Pad, PatchUnion, Poison, Quest, ResetSet, Seeded,
    TermSyntaxError, WbForward, CautBc, content, dedup, eval_term, finset, is_prefix,
    parse_term, semantic_eq, semantics, seq_order, sequences_over, set_code, set_decode,
    sort_pause, subsets_by_code,
)

P = PAUSE


def test_content():
    assert content(()) == frozenset()
    assert content((2, P, 2, 5)) == {2, 5}
    assert content((P, P)) == frozenset()


def test_seq_order_examples():
    assert seq_order((), (0,)) == -1
    assert seq_order((1,), (0, 0)) == -1
    assert seq_order((3,), (3,)) == 0
    assert seq_order((P,), (0,)) == -1


def _naive_le(a, b):
    # length first, then lexicographic with # below every number
    code = lambda d: -1 if d == P else d
    if len(a) != len(b):
        return len(a) < len(b)
    return [code(d) for d in a] <= [code(d) for d in b]


def test_seq_order_is_total_and_prefix_monotone():
    seqs = list(sequences_over([0, 1, 2, P], 3))
    for a in seqs:
        for b in seqs:
            o = seq_order(a, b)
            assert o == -seq_order(b, a)
            assert (o <= 0) == _naive_le(a, b)
            if is_prefix(a, b):
                assert o <= 0


def test_seq_order_length_lex_oracle():
    seqs = list(sequences_over([0, 1, P], 2))
    for a, b in itertools.product(seqs, repeat=2):
        assert (seq_order(a, b) <= 0) == _naive_le(a, b)


def test_dedup_examples():
    assert dedup((2, P, 2, 5, 2)) == (2, 5)
    assert dedup(()) == ()
    assert dedup((7,)) == (7,)


@given(st.lists(st.one_of(st.integers(0, 6), st.just(P)), max_size=12))
def test_dedup_laws(xs):
    s = tuple(xs)
    assert content(dedup(s)) == content(s)
    assert dedup(dedup(s)) == dedup(s)
    assert P not in dedup(s)


def test_sort_pause():
    assert sort_pause({4, 1}) == (1, P, 4)
    assert sort_pause(set()) == ()
    assert sort_pause({9}) == (9,)


def test_set_coding_bijection():
    for r in range(8):
        for d in itertools.combinations(range(7), r):
            assert set_decode(set_code(d)) == frozenset(d)


def test_subsets_by_code_order():
    subs = list(subsets_by_code({2, 5, 7}))
    assert len(subs) == 8
    assert [set_code(s) for s in subs] == sorted(set_code(s) for s in subs)


def test_eval_examples():
    assert eval_term(PatchUnion(finset(1), frozenset({2})), 2) == 1
    assert eval_term(Pad(finset(3), (3, 7)), 7) == 0
    assert eval_term(Pad(finset(3), (3, 7)), 3) == 1
    assert eval_term(CoFinite(frozenset({0})), 0) == 0
    assert eval_term(ResetSet(frozenset({0, 3})), 3) == 1
    assert eval_term(FamIdx("finz", 0), 5) == 1
    assert eval_term(FamIdx("finz", 0), 0) == 0


def test_eval_errors():
    with pytest.raises(ContractViolation):
        eval_term(Quest, 0)
    with pytest.raises(ConfigError):
        eval_term(FamIdx("no-such-family", 0), 0)
    with pytest.raises(ConfigError):
        eval_term(WbForward("no-such-learner", frozenset()), 3)


def test_semantic_eq():
    assert semantic_eq(finset(1), PatchUnion(finset(1), frozenset()), 20)
    assert not semantic_eq(finset(1), finset(2), 8)
    full = FinSet(frozenset(range(1, 65)))
    assert semantic_eq(CoFinite(frozenset({0})), full, 64)
    assert not semantic_eq(CoFinite(frozenset({0})), full, 65)


# -- serialization ------------------------------------------------------------

small_sets = st.frozensets(st.integers(0, 9), max_size=4)
small_seqs = st.lists(st.one_of(st.integers(0, 9), st.just(P)), max_size=4).map(tuple)
refs = st.sampled_from(["sep_learner", "star[cof_learner]", "patch[x]"])

leaves = st.one_of(
    st.just(Quest),
    st.builds(FamIdx, st.sampled_from(["finz", "cof", "hs[star[a]]"]),
              st.one_of(st.integers(0, 99), small_seqs)),
    st.builds(FinSet, small_sets),
    st.builds(CoFinite, small_sets),
    st.builds(ResetSet, small_sets),
    st.builds(WbForward, refs, small_sets),
    st.builds(CautBc, refs, small_sets),
    st.builds(Poison, refs, st.sampled_from(["finz", "conflict"]), small_seqs),
)
terms = st.recursive(
    leaves,
    lambda t: st.one_of(st.builds(PatchUnion, t, small_sets), st.builds(Pad, t, small_seqs)),
    max_leaves=4,
)


@settings(max_examples=300)
@given(terms)
def test_canonical_round_trip(t):
    s = t.canon()
    assert parse_term(s) == t
    assert parse_term(s).canon() == s


def test_canonical_examples():
    assert PatchUnion(finset(1), frozenset({2})).canon() == "patch(finset(1),{2})"
    assert FamIdx("finz", 0).canon() == "famidx(finz,0)"
    assert Pad(finset(), (0, P)).canon() == "pad(finset(),<0,#>)"


@pytest.mark.parametrize("bad", ["", "finset(", "famidx(finz)", "patch(finset(1),{x})",
                                 "pad(?,<1,", "cofin(1,)", "nosuch(1)", "finset(1))"])
def test_parse_rejects(bad):
    with pytest.raises(TermSyntaxError):
        parse_term(bad)


# -- texts --------------------------------------------------------------------

def test_canonical_text_finite():
    t = Canonical(finset(0, 3))
    assert t[5] == (0, 3, P, P, P)


def test_canonical_text_ascending_and_complete():
    lang = FamIdx("finz", 0)
    t = Canonical(lang)
    prefix = t[64]
    assert all(a < b for a, b in zip(prefix, prefix[1:]))
    assert content(prefix) == semantics(lang, 64)


def test_finite_then_pauses_and_delayed():
    t = FiniteThenPauses((2, 5))
    assert t[4] == (2, 5, P, P)
    d = Delayed(Canonical(finset(1, 2, 3)), [0, 0, 1])
    assert d[5] == (1, 1, 2, 3, P)


def test_lcg_constants():
    g = Lcg(0)
    assert g.next() == 1013904223
    assert g.next() == (1664525 * 1013904223 + 1013904223) % (1 << 32)


@pytest.mark.parametrize("seed", range(5))
def test_seeded_text_covers_language(seed):
    lang = CoFinite(frozenset({5}))
    t = Seeded(lang, seed)
    n = t.guaranteed_coverage(100)
    prefix = t[n]
    assert content(prefix) <= semantics(lang, 10_000)
    assert semantics(lang, 30) <= content(prefix)


def test_seeded_is_reproducible():
    a = Seeded(finset(1, 4), 7)[30]
    b = Seeded(finset(1, 4), 7)[30]
    assert a == b
    assert content(a) == {1, 4}
