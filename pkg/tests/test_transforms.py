import itertools

import pytest

from limitlearn.core import (
    PAUSE, CapExceeded, Canonical, CautBc, CoFinite, ConfigError, ContractViolation, FamIdx,
    FinSet, PatchUnion, Pad, Poison, Quest, ResetSet, WbForward, content, eval_term, finset,
    semantics, seq_order, sequences_over,
)
from limitlearn.families import (
    P0, cof_learner, cof_osc_learner, conflict_learner, fin_learner, sep_learner,
)
from limitlearn.operators import Learner, register, run, star
from limitlearn.restrictions import check_convergence, check_restriction
from limitlearn.transforms import (
    TRANSFORMS, apply_transform, bc_to_it_pad, cauttar_to_wb, g_to_psd, g_to_sd_cauttar,
    g_to_snu, it_to_sd, make_consistent_dedup, make_consistent_patch, make_consistent_reset,
    sd_bc_to_cauttar_bc, sd_cauttar_bc_to_ex, sd_cauttar_to_wb, sd_constant_on, sd_covers_on,
    snu_to_sdec, td_bc_to_ex, to_cind, to_hypothesis_space,
)

P = PAUSE


def _g(name, f):
    return register(Learner(name, "G", f))


CONST1 = _g("tx_const1", lambda s: finset(1))
# consistent, and records the length of what it saw
SEEN = _g("tx_seen", lambda s: FinSet(content(s) | {100 + len(s)}))
# h(<1>) = h(<0,1>) = t, h(<0>) = u
TWO = _g("tx_two", lambda s: finset(6) if s == (0,) else finset(5))
LEN = _g("tx_len", lambda s: finset(len(s)))
SMALL = [CONST1, SEEN, TWO, LEN]


# -- hypothesis spaces ---------------------------------------------------------

def test_hypothesis_space_constant():
    h = to_hypothesis_space(CONST1)
    for s in sequences_over([0, 1, P], 3):
        assert h.step(s) == ()


def test_hypothesis_space_prefix_representative():
    h = to_hypothesis_space(TWO)
    assert h.step(()) == ()
    assert h.step((0,)) == (0,)
    assert h.step((0, 1)) == ()
    assert h.step((1,)) == ()


@pytest.mark.parametrize("base", SMALL, ids=lambda h: h.id)
def test_hypothesis_space_mind_changes_and_semantics(base):
    h = to_cind(to_hypothesis_space(base))
    for s in sequences_over([0, 1, P], 4):
        a, b = run(base, s, len(s)).terms, run(h, s, len(s)).terms
        assert [x == y for x, y in zip(a, a[1:])] == [x == y for x, y in zip(b, b[1:])]
        assert semantics(a[-1], 10) == semantics(b[-1], 10)


def test_to_cind_finz():
    idx = register(Learner("tx_idx0", "G", lambda s: 0,
                           meta={"index_learner": True, "space": "finz"}))
    h = to_cind(idx)
    t = h.step((3, 4))
    assert t == FamIdx("finz", 0)
    assert (eval_term(t, 0), eval_term(t, 5)) == (0, 1)
    assert h.step(()) == h.step((9, P))


def test_to_cind_unknown_space():
    idx = register(Learner("tx_idx_bad", "G", lambda s: 0,
                           meta={"index_learner": True, "space": "nowhere"}))
    with pytest.raises(ConfigError):
        to_cind(idx)
    with pytest.raises(ContractViolation):
        to_cind(CONST1)


# -- consistency ---------------------------------------------------------------

def test_patch_examples():
    h = make_consistent_patch(CONST1)
    t = h.step((2,))
    assert t == PatchUnion(finset(1), frozenset({2}))
    assert semantics(t, 10) == {1, 2}
    assert h.step((1, P, 1)) == finset(1)
    assert h.step(()) == finset(1)


@pytest.mark.parametrize("base", SMALL, ids=lambda h: h.id)
def test_patch_pointwise(base):
    h = make_consistent_patch(base)
    for s in sequences_over([0, 1, 2, P], 3):
        assert semantics(h.step(s), 8) == semantics(base.step(s), 8) | content(s)
        assert check_restriction("Cons", run(h, s, len(s)), None, finset()).ok


def test_patch_on_set_driven():
    h = make_consistent_patch(cof_learner())
    assert h.kind == "Sd"
    assert h.step(frozenset({0, 2})) == cof_learner().step(frozenset({0, 2}))
    d = frozenset({1})
    assert semantics(h.step(d), 10) == semantics(cof_learner().step(d), 10) | d


def test_reset_examples():
    h = make_consistent_reset(CONST1)
    assert h.step((0, 3)) == ResetSet(frozenset({0, 3}))
    assert h.step((1,)) == finset(1)
    for s in sequences_over([0, 2, P], 3):
        t = h.step(s)
        assert content(s) <= semantics(t, 8)
        if isinstance(t, ResetSet):
            assert semantics(t, 8) == content(s)


def test_dedup_examples():
    h = make_consistent_dedup(SEEN)
    assert h.step((2, P, 2, 5)) == SEEN.step((2, 5))
    assert h.step((2, 5)) == SEEN.step((2, 5))


def test_dedup_presentation_invariant():
    h = make_consistent_dedup(SEEN)
    a = run(h, (1, 4, P, P), 4).terms[-1]
    b = run(h, (1, P, 1, 4, 4, 1), 6).terms[-1]
    assert a == b


# -- witness-based ---------------------------------------------------------------

def test_cauttar_to_wb_cases():
    base = _g("tx_cover", lambda s: finset(*content(s), 7) if s else finset(7))
    h = cauttar_to_wb(base)
    assert h.step((7,)) == h.step(())
    assert h.step((P,)) == h.step(())
    assert h.step((3,)) == base.step((3,))


def test_cauttar_to_wb_on_sep():
    h = cauttar_to_wb(sep_learner())
    target = finset(0, 3)
    p = run(h, Canonical(target), 6)
    assert semantics(p.terms[-1], 64) == {0, 3}
    for n in range(len(p.prefix) + 1):
        q = run(h, p.prefix[:n], n)
        assert check_restriction("Wb", q, None, target).ok


def test_g_to_sd_cauttar_examples():
    h = g_to_sd_cauttar(sep_learner())
    assert h.step(frozenset({2, 4})) == P0
    assert h.step(frozenset()) == P0
    assert h.step(frozenset({0, 3})) == finset(0, 3)


def test_sd_cauttar_to_wb_constant():
    base = register(Learner("tx_sd_const", "Sd", lambda d: finset(4)))
    h = sd_cauttar_to_wb(base)
    assert h.step(frozenset({4})) == WbForward(base.id, frozenset())


def _gate(d):
    return finset(0, 1, 2) if 2 in d else FinSet(frozenset(d))


def test_sd_cauttar_to_wb_gate():
    base = register(Learner("tx_gate", "Sd", _gate))
    h = sd_cauttar_to_wb(base)
    assert h.step(frozenset({0, 2})) == ResetSet(frozenset({0, 2}))
    assert h.step(frozenset({0})) == WbForward(base.id, frozenset({0}))


def test_sd_cauttar_to_wb_cofinite_lock():
    h = sd_cauttar_to_wb(cof_learner())
    t = h.step(frozenset({0, 1, 2, 4}))
    assert semantics(t, 40) == semantics(CoFinite(frozenset({3})), 40)


def _plain(h, name):
    return register(Learner(name, "Sd", h.step))


@pytest.mark.parametrize("make", [sep_learner, cof_learner, cof_osc_learner])
def test_interval_oracles_match_brute_force(make):
    h = make()
    bf = _plain(h, f"tx_bf_{h.id}")
    universe = range(5)
    subsets = [frozenset(c) for r in range(6) for c in itertools.combinations(universe, r)]
    for lo in subsets:
        for hi in subsets:
            assert sd_constant_on(h, lo, hi) == sd_constant_on(bf, lo, hi), (lo, hi)
            for s in (frozenset({0}), frozenset({1, 3}), frozenset({2, 4})):
                assert sd_covers_on(h, lo, hi, s) == sd_covers_on(bf, lo, hi, s)


def test_interval_cap():
    bf = _plain(sep_learner(), "tx_bf_cap")
    with pytest.raises(CapExceeded):
        sd_constant_on(bf, frozenset(), frozenset(range(20)))


# -- strongly non-U-shaped, strongly decisive --------------------------------------

def test_poison_locked_agrees_with_base():
    g = star(sep_learner())
    t = Poison(g.id, "finz", ())
    assert semantics(t, 12) == semantics(P0, 12)
    h = g_to_snu(sep_learner(), "finz")
    assert h.step((1, 2)) == t


def test_poison_hand_unrolled():
    g = star(conflict_learner())
    # h(eps) = {0,1,2}; seeing 1 moves to {0,1}, first visible at x = 2
    t = Poison(g.id, "conflict", ())
    # x < 2 follows h(eps); from 2 on, x in L_{x-2} = {x-2} never holds
    assert [eval_term(t, x) for x in range(8)] == [1] * 8


def test_snu_to_sdec_never_changes():
    h = snu_to_sdec(CONST1)
    for s in sequences_over([0, 1, P], 3):
        assert h.step(s) == CONST1.step(s)


def _revisit(s):
    return [finset(5), finset(6), finset(5)][len(s)] if len(s) < 3 else FamIdx("conflict", 1)


def test_snu_to_sdec_suppresses_revisit():
    base = _g("tx_revisit", _revisit)
    target = FamIdx("conflict", 1)
    text = Canonical(finset(0, 1, 2))
    p = run(base, text, 6)
    assert check_restriction("Dec", p, None, target).outcome == "Violation"
    h = snu_to_sdec(base)
    q = run(h, text, 6)
    assert h.step(()) == base.step(())
    assert [t.canon() for t in q.terms[:4]] == ["finset(5)"] * 3 + ["famidx(conflict,1)"]
    assert check_restriction("SDec", q, None, target).ok
    assert check_convergence("Ex", q, target).outcome == "Converged"


# -- partially set-driven ------------------------------------------------------------

def _brute_locked(g, d, t):
    alphabet = sorted(d) + [P]
    for sigma in sequences_over(alphabet, t):
        if all(g.step(sigma + tau) == g.step(sigma) for tau in sequences_over(alphabet, t)):
            return sigma
    return None


def test_g_to_psd_examples():
    g = star(sep_learner())
    h = g_to_psd(sep_learner())
    sigma = _brute_locked(g, {0}, 2)
    assert sigma is not None
    assert h.meta["locked"](frozenset({0}), 2) == sigma
    assert h.step(frozenset({0}), 2) == g.step(sigma)
    assert g_to_psd(CONST1).step(frozenset({0, 1}), 3) == finset(1)
    # every extension moves tx_len, so nothing locks
    assert g_to_psd(LEN).step(frozenset({0}), 1) == LEN.step(())


def test_seq_order_matches_enumeration():
    seqs = list(sequences_over([0, P], 2))
    assert all(seq_order(a, b) < 0 for a, b in zip(seqs, seqs[1:]))


def test_g_to_psd_cap():
    with pytest.raises(CapExceeded):
        g_to_psd(LEN).step(frozenset(range(6)), 2)


# -- iterative -------------------------------------------------------------------

def test_bc_to_it_pad():
    h = bc_to_it_pad(CONST1)
    p = run(h, (3, 3, P), 3)
    assert p.terms[1] == Pad(finset(1), (3,))
    assert all(semantics(t, 10) == {1} for t in p.terms)
    canon = [t.canon() for t in p.terms]
    assert len(set(canon)) == len(canon)


def test_it_to_sd_pause_blind():
    base = register(Learner("tx_it_blind", "It",
                            lambda q, d: q if d == P else PatchUnion(q, frozenset({d})),
                            start=lambda: finset()))
    h = it_to_sd(base)
    assert semantics(h.step(frozenset({1, 4})), 10) == {1, 4}
    assert h.step(frozenset({1, 4})) == PatchUnion(PatchUnion(finset(), frozenset({1})),
                                                   frozenset({4}))


def _flip(q, d):
    if d == P:
        return finset(8) if q == finset(7) else finset(7)
    return q


def test_it_to_sd_pause_sensitive():
    base = register(Learner("tx_it_flip", "It", _flip, start=lambda: finset(7)))
    h = it_to_sd(base)
    for r in range(4):
        for d in itertools.combinations(range(5), r):
            assert h.step(frozenset(d)) == FinSet(frozenset(d))


# -- behaviourally correct to explanatory ------------------------------------------------

def _drop(d):
    return FinSet(frozenset(d)) if 1 in d else FinSet(frozenset(d) | {1, 2})


def test_cautbc_cases():
    base = register(Learner("tx_drop", "Sd", _drop, props=frozenset({"Cons"})))
    h = sd_bc_to_cauttar_bc(base)
    t = h.step(frozenset({0}))
    assert t == CautBc(base.id, frozenset({0}))
    assert eval_term(t, 0) == 1
    assert eval_term(t, 1) == 1
    # {0,1} lies between D and E(2, D) and drops 2
    assert eval_term(t, 2) == 0
    assert eval_term(t, 3) == 0


def test_sd_cauttar_bc_to_ex():
    h = sd_cauttar_bc_to_ex(fin_learner())
    assert h.step(frozenset()) == fin_learner().step(frozenset())
    assert h.step(frozenset({2, 5})) == finset(2, 5)
    target = CoFinite(frozenset({3}))
    p = run(sd_cauttar_bc_to_ex(cof_osc_learner()), Canonical(target), 30)
    base = run(cof_osc_learner(), Canonical(target), 30)
    assert check_convergence("Ex", base, target).outcome == "NotConverged"
    assert check_convergence("Ex", p, target).outcome == "Converged"


def test_sd_cauttar_bc_to_ex_cap():
    never = register(Learner("tx_never", "Sd", lambda d: finset()))
    with pytest.raises(CapExceeded):
        sd_cauttar_bc_to_ex(never, cap=8).step(frozenset(range(5)))


def _td(d):
    if d == P or d == 0:
        return Quest
    if d == 9:
        return finset(100)
    return finset(*range(1, d + 1))


def test_td_bc_to_ex():
    base = register(Learner("tx_td", "Td", _td))
    h = td_bc_to_ex(base)
    assert h.step(0) == Quest
    assert h.step(P) == Quest
    assert h.step(4) == _td(1)
    assert h.step(9) == finset(100)
    assert 9 in h.meta["fallback"] and 4 not in h.meta["fallback"]


# -- the table ---------------------------------------------------------------------------

def test_kind_errors():
    with pytest.raises(ContractViolation):
        sd_cauttar_to_wb(CONST1)
    with pytest.raises(ContractViolation):
        it_to_sd(CONST1)
    with pytest.raises(ContractViolation):
        td_bc_to_ex(CONST1)


def test_static_props():
    h = apply_transform("make_consistent_patch", sep_learner())
    assert "Cons" in h.props and "total" in h.props
    assert "CautTar" not in h.props
    assert h.id == "make_consistent_patch[sep_learner]"


def test_every_transform_has_a_builder():
    for name, spec in TRANSFORMS.items():
        assert spec.input_kinds and spec.output_kind
        assert callable(spec.build), name
