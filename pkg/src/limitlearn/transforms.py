"""Learner-to-learner transformations.

Each transform takes a :class:`Learner` (plus parameters) and returns a new,
registered learner.  Searches that range over infinitely many inputs are
either settled by an interval oracle on the base learner or by brute force
under an explicit cap that raises :class:`CapExceeded`.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

from .core import (
    PAUSE, CapExceeded, CautBc, ContractViolation, FamIdx, FinSet, HypTerm,
    IndexedFamily, Pad, PatchUnion, Poison, QuestTerm, ResetSet, Seq,
    WbForward, below, content, dedup, eval_term, get_family, register_evaluator,
    register_family, sequences_over, sort_pause, subsets_by_code,
)
from .operators import Learner, register, resolve, star, starred, totalize

# brute-force caps; each counts evaluated candidates
INTERVAL_CAP = 1 << 14
EXTENSION_CAP = 1 << 16
SUBSET_CAP = 4096


def _sorted(d) -> list:
    return sorted(d)


def _memo(f: Callable) -> Callable:
    return lru_cache(maxsize=1 << 16)(f)


def _g_view(h: Learner) -> Learner:
    """``h`` itself if it is a G-learner, otherwise its registered starred form."""
    return h if h.kind == "G" else star(h)


def _derive(name: str, h: Learner, kind: str, step, tag: str = "", **kw) -> Learner:
    props = static_props(TRANSFORMS[name], h.props)
    return register(Learner(id=f"{name}[{h.id}{tag}]", kind=kind, step=step, props=props,
                            meta={"base": h.id, "transform": name}, **kw))


# -- interval questions on Sd learners ---------------------------------------

def sd_constant_on(h: Learner, lo: frozenset, hi: frozenset,
                   cap: int = INTERVAL_CAP) -> bool:
    """Is ``h(D')`` syntactically the same for every lo <= D' <= lo|hi?"""
    lo, hi = frozenset(lo), frozenset(lo) | frozenset(hi)
    if h.oracle is not None and hasattr(h.oracle, "constant_on"):
        return h.oracle.constant_on(lo, hi)
    free = _sorted(hi - lo)
    if len(free) > cap.bit_length() - 1:
        raise CapExceeded("interval subsets", cap)
    ref = h.step(lo)
    return all(h.step(lo | extra) == ref for extra in subsets_by_code(free))


def sd_covers_on(h: Learner, lo: frozenset, hi: frozenset, s: frozenset,
                 cap: int = INTERVAL_CAP) -> bool:
    """Does ``C_{h(D')}`` contain ``s`` for every lo <= D' <= lo|hi?"""
    lo, hi = frozenset(lo), frozenset(lo) | frozenset(hi)
    if h.oracle is not None and hasattr(h.oracle, "covers_on"):
        return h.oracle.covers_on(lo, hi, frozenset(s))
    free = _sorted(hi - lo)
    if len(free) > cap.bit_length() - 1:
        raise CapExceeded("interval subsets", cap)
    for extra in subsets_by_code(free):
        t = h.step(lo | extra)
        if not all(eval_term(t, x) for x in s):
            return False
    return True


# -- hypothesis spaces -------------------------------------------------------

def to_hypothesis_space(h: Learner) -> Learner:
    """Index learner for the space ``(C_{h*(sigma)})_sigma``.

    Indices are sequences.  The index chosen on ``sigma`` is the shortest
    prefix of ``sigma`` on which ``h*`` gives the same term, so mind changes
    happen exactly where ``h*`` changes its term.
    """
    g = _g_view(h)
    space = f"hs[{g.id}]"
    register_family(IndexedFamily(
        space, lambda j, x: eval_term(g.step(tuple(j)), x),
        description=f"hypothesis space of {g.id}",
    ))

    @_memo
    def step(sigma: Seq) -> Seq:
        t = g.step(sigma)
        for k in range(len(sigma) + 1):
            if g.step(sigma[:k]) == t:
                return sigma[:k]
        return sigma

    out = _derive("to_hypothesis_space", g, "G", step)
    out.meta["space"] = space
    out.meta["index_learner"] = True
    return out


def to_cind(idx: Learner) -> Learner:
    """Wrap an index learner's output into ``famidx`` terms of its space."""
    if not idx.meta.get("index_learner"):
        raise ContractViolation("to_cind expects an index learner")
    space = idx.meta["space"]
    get_family(space)
    step = _memo(lambda sigma: FamIdx(space, idx.step(sigma)))
    return _derive("to_cind", idx, "G", step)


# -- consistency ---------------------------------------------------------------

def _kind_step(h: Learner, wrap: Callable) -> Callable:
    """Lift ``wrap(term, content)`` to ``h``'s own input convention."""
    if h.kind == "G":
        return _memo(lambda s: wrap(h.step(s), content(s)))
    if h.kind == "Psd":
        return _memo(lambda d, n: wrap(h.step(d, n), d))
    if h.kind == "Sd":
        return _memo(lambda d: wrap(h.step(d), d))
    raise ContractViolation(f"consistency transforms do not accept {h.kind}")


def _consistent(t: HypTerm, d: frozenset) -> bool:
    return not isinstance(t, QuestTerm) and all(eval_term(t, x) for x in d)


def make_consistent_patch(h: Learner) -> Learner:
    """Add the missing data to the hypothesis: ``patch(h(.), D)``."""
    def wrap(t, d):
        return t if _consistent(t, d) else PatchUnion(t, frozenset(d))
    return _derive("make_consistent_patch", h, h.kind, _kind_step(h, wrap))


def make_consistent_reset(h: Learner) -> Learner:
    """Fall back to exactly the data seen whenever ``h`` is inconsistent."""
    def wrap(t, d):
        return t if _consistent(t, d) else ResetSet(frozenset(d))
    return _derive("make_consistent_reset", h, h.kind, _kind_step(h, wrap))


def make_consistent_dedup(h: Learner) -> Learner:
    """Run ``h`` on the duplicate- and pause-free form of the input.

    A G-learner sees ``dedup(sigma)``; a Psd learner sees ``(D, |D|)``.
    """
    if h.kind == "G":
        def inner(s):
            return h.step(dedup(s)), content(s)
        step = _memo(lambda s: _dedup_fix(*inner(s)))
    elif h.kind == "Psd":
        step = _memo(lambda d, n: _dedup_fix(h.step(d, len(d)), d))
    elif h.kind == "Sd":
        step = _memo(lambda d: _dedup_fix(h.step(d), d))
    else:
        raise ContractViolation(f"consistency transforms do not accept {h.kind}")
    return _derive("make_consistent_dedup", h, h.kind, step)


def _dedup_fix(t: HypTerm, d: frozenset) -> HypTerm:
    return t if _consistent(t, d) else ResetSet(frozenset(d))


# -- target-cautious to witness-based ----------------------------------------

def cauttar_to_wb(h: Learner) -> Learner:
    """Keep the current guess while new data fit it; otherwise follow ``h``.

    Pauses count as fitting data.
    """
    g = _g_view(h)

    @_memo
    def step(sigma: Seq) -> HypTerm:
        if not sigma:
            return g.step(())
        prev = step(sigma[:-1])
        x = sigma[-1]
        if x == PAUSE or eval_term(prev, x):
            return prev
        return g.step(sigma)

    return _derive("cauttar_to_wb", g, "G", step)


def g_to_sd_cauttar(h: Learner) -> Learner:
    """Sd learner: ``h`` on the shortest ascending cut of D it is consistent with."""
    g = _g_view(h)

    @_memo
    def step(d: frozenset) -> HypTerm:
        cut = _sorted(d)
        for k in range(len(cut) + 1):
            t = g.step(tuple(cut[:k]))
            if _consistent(t, d):
                return t
        return g.step(tuple(cut))

    return _derive("g_to_sd_cauttar", g, "Sd", step)


def _wbfwd_eval(t: WbForward, x: int) -> int:
    h = resolve(t.learner)
    d = t.items
    if x in d:
        return 1
    hd = h.step(d)
    if not eval_term(hd, x):
        return 0
    return int(sd_constant_on(h, d, d | below(hd, x)))


register_evaluator(WbForward, _wbfwd_eval)


def _wb_cut(h: Learner, d: frozenset) -> frozenset:
    """``D[k_D]``: the shortest ascending cut from which no mind change is seen."""
    cut = _sorted(d)
    for k in range(len(cut) + 1):
        lo = frozenset(cut[:k])
        if sd_constant_on(h, lo, d):
            return lo
    return d


def sd_cauttar_to_wb(h: Learner) -> Learner:
    """Sd learner that waits for a witness before leaving a guess."""
    if h.kind != "Sd":
        raise ContractViolation("sd_cauttar_to_wb expects an Sd learner")

    @_memo
    def step(d: frozenset) -> HypTerm:
        dk = _wb_cut(h, d)
        if dk:
            hk = h.step(dk)
            top = max(dk)
            if any(eval_term(hk, x) for x in range(top) if x not in dk):
                return ResetSet(dk)
        return WbForward(h.id, dk)

    return _derive("sd_cauttar_to_wb", h, "Sd", step)


# -- strongly non-U-shaped and strongly decisive ------------------------------

def _extension_contents(h: Learner, sigma: Seq, alphabet: frozenset, max_len: int):
    """Inputs to try for ``h(sigma + tau)``, tau over ``alphabet`` with
    ``|tau| <= max_len``; content-driven learners only need the contents."""
    if h.content_driven:
        items = _sorted(alphabet)
        n = 0
        for r in range(min(max_len, len(items)) + 1):
            for extra in itertools.combinations(items, r):
                n += 1
                if n > EXTENSION_CAP:
                    raise CapExceeded("extension contents", EXTENSION_CAP)
                yield sigma + extra
        return
    n = 0
    for tau in sequences_over(list(alphabet) + [PAUSE], max_len):
        n += 1
        if n > EXTENSION_CAP:
            raise CapExceeded("extensions", EXTENSION_CAP)
        yield sigma + tau


@lru_cache(maxsize=1 << 16)
def _q(ref: str, sigma: Seq, x: int) -> bool:
    """Some extension of sigma over the guess up to x changes the guess on [0, x]."""
    h = resolve(ref)
    hs = h.step(sigma)
    cx = below(hs, x)
    for s in _extension_contents(h, sigma, cx, x):
        t = h.step(s)
        if any(eval_term(hs, y) != eval_term(t, y) for y in range(x + 1)):
            return True
    return False


@lru_cache(maxsize=1 << 16)
def _first_q(ref: str, sigma: Seq, x: int) -> Optional[int]:
    # Q is monotone in x, so the least witness below x is found by a scan
    for y in range(x + 1):
        if _q(ref, sigma, y):
            return y
    return None


def _poison_eval(t: Poison, x: int) -> int:
    y0 = _first_q(t.learner, t.seq, x)
    if y0 is None:
        return eval_term(resolve(t.learner).step(t.seq), x)
    return 0 if get_family(t.family).decide(x - y0, x) == 1 else 1


register_evaluator(Poison, _poison_eval)


def _lock_candidate(g: Learner, sigma: Seq) -> Seq:
    """Shortest prefix sigma' of sigma after which no data from sigma change
    the guess of ``h(sigma)`` on [0, |sigma|]."""
    n = len(sigma)
    hs = g.step(sigma)
    ref = [eval_term(hs, x) for x in range(n + 1)]
    alphabet = content(sigma)
    for k in range(n + 1):
        pre = sigma[:k]
        if all([eval_term(g.step(s), x) for x in range(n + 1)] == ref
               for s in _extension_contents(g, pre, alphabet, n)):
            return pre
    # no prefix qualifies; sigma stands for itself
    return sigma


def g_to_snu(h: Learner, family: str) -> Learner:
    """Guess ``Poison(h, family, min M(sigma))``, a term that only agrees with
    ``h`` while its locking candidate is unrefuted."""
    g = _g_view(h)
    get_family(family)

    @_memo
    def step(sigma: Seq) -> HypTerm:
        return Poison(g.id, family, _lock_candidate(g, sigma))

    out = _derive("g_to_snu", g, "G", step, tag=f",{family}")
    out.meta["family"] = family
    return out


def snu_to_sdec(h: Learner) -> Learner:
    """Hold the guess until every earlier guess is seen to differ from the new one."""
    g = _g_view(h)

    @_memo
    def trace(sigma: Seq) -> tuple:
        # (outputs on all prefixes, start of the current run)
        if not sigma:
            return (g.step(()),), 0
        outs, s = trace(sigma[:-1])
        m = len(sigma)
        cur = g.step(sigma)
        start = g.step(sigma[:s])
        if all(g.step(sigma[:i]) == start for i in range(s, m + 1)):
            return outs + (start,), s
        if all(any(eval_term(outs[i], x) != eval_term(cur, x) for x in range(m + 1))
               for i in range(s + 1)):
            return outs + (cur,), m
        return outs + (start,), s

    step = _memo(lambda sigma: trace(sigma)[0][-1])
    return _derive("snu_to_sdec", g, "G", step)


# -- partially set-driven, iterative, set-driven -------------------------------

PSD_T_MAX = 5
PSD_D_MAX = 4
PSD_CAP = 1 << 22


def _locks_within(g: Learner, sigma: Seq, d: frozenset, t: int, count: list) -> bool:
    ref = g.step(sigma)
    for s in _extension_contents(g, sigma, d, t):
        count[0] += 1
        if count[0] > PSD_CAP:
            raise CapExceeded("psd locking search", PSD_CAP)
        if g.step(s) != ref:
            return False
    return True


def g_to_psd(h: Learner, t_max: int = PSD_T_MAX, d_max: int = PSD_D_MAX) -> Learner:
    """Psd learner: ``h`` on the least sequence over D (length <= t) that no
    extension over D of length <= t moves; ``h(eps)`` if there is none.

    ``t`` saturates at ``t_max``; more than ``d_max`` data raise CapExceeded.
    """
    g = _g_view(h)

    @_memo
    def locked(d: frozenset, t: int) -> Optional[Seq]:
        if len(d) > d_max:
            raise CapExceeded("psd data size", d_max)
        count = [0]
        for sigma in sequences_over(list(d) + [PAUSE], t):
            if _locks_within(g, sigma, d, t, count):
                return sigma
        return None

    def step(d: frozenset, n: int) -> HypTerm:
        sigma = locked(frozenset(d), min(n, t_max))
        return g.step(()) if sigma is None else g.step(sigma)

    out = _derive("g_to_psd", g, "Psd", step)
    out.meta["locked"] = locked
    return out


def bc_to_it_pad(h: Learner) -> Learner:
    """Iterative learner whose state ``pad(h(sigma), sigma)`` remembers the input."""
    g = _g_view(h)

    def start() -> HypTerm:
        return Pad(g.step(()), ())

    def step(q: HypTerm, d) -> HypTerm:
        if not isinstance(q, Pad):
            raise ContractViolation("bc_to_it_pad state must be a pad term")
        sigma = q.seq + (d,)
        return Pad(g.step(sigma), sigma)

    return _derive("bc_to_it_pad", g, "It", step, start=start)


def it_to_sd(h: Learner) -> Learner:
    """Sd learner: ``h`` on the sorted, pause-separated presentation of D,
    kept only if one more pause leaves the guess unchanged."""
    if h.kind != "It":
        raise ContractViolation("it_to_sd expects an iterative learner")
    hs = _memo(starred(h))

    @_memo
    def step(d: frozenset) -> HypTerm:
        s = sort_pause(d)
        t = hs(s)
        return t if hs(s + (PAUSE,)) == t else FinSet(frozenset(d))

    return _derive("it_to_sd", h, "Sd", step)


# -- behaviourally correct to explanatory --------------------------------------

def _cautbc_eval(t: CautBc, x: int) -> int:
    # values below x are needed for E(x, D); fill them bottom-up
    for y in range(x):
        eval_term(t, y)
    h = resolve(t.learner)
    d = t.items
    if x in d:
        return 1
    if not eval_term(h.step(d), x):
        return 0
    e = d | {x} | {y for y in range(x) if eval_term(t, y)}
    return int(sd_covers_on(h, d, e, e))


register_evaluator(CautBc, _cautbc_eval)


def sd_bc_to_cauttar_bc(h: Learner) -> Learner:
    """Sd learner whose guesses keep only elements every future guess keeps."""
    if h.kind != "Sd":
        raise ContractViolation("sd_bc_to_cauttar_bc expects an Sd learner")
    step = _memo(lambda d: CautBc(h.id, frozenset(d)))
    return _derive("sd_bc_to_cauttar_bc", h, "Sd", step)


def sd_cauttar_bc_to_ex(h: Learner, cap: int = SUBSET_CAP) -> Learner:
    """Sd learner: ``h`` on the least subset of D (binary-code order) whose
    guess is consistent with D."""
    if h.kind != "Sd":
        raise ContractViolation("sd_cauttar_bc_to_ex expects an Sd learner")

    @_memo
    def step(d: frozenset) -> HypTerm:
        for n, sub in enumerate(subsets_by_code(d)):
            if n >= cap:
                raise CapExceeded("consistent subset search", cap)
            t = h.step(sub)
            if _consistent(t, d):
                return t
        return h.step(d)

    return _derive("sd_cauttar_bc_to_ex", h, "Sd", step)


def td_bc_to_ex(h: Learner) -> Learner:
    """Td learner: on datum y, answer ``h`` on the least x' <= y that
    ``h(y)`` contains and on which ``h`` commits."""
    if h.kind != "Td":
        raise ContractViolation("td_bc_to_ex expects a Td learner")
    flagged: set = set()

    @_memo
    def step(y) -> HypTerm:
        t = h.step(y)
        if y == PAUSE or isinstance(t, QuestTerm):
            return t
        for x in range(y + 1):
            if eval_term(t, x) and not isinstance(h.step(x), QuestTerm):
                return h.step(x)
        flagged.add(y)
        return t

    out = _derive("td_bc_to_ex", h, "Td", step)
    out.meta["fallback"] = flagged
    return out


# -- the transform table -------------------------------------------------------

@dataclass(frozen=True)
class TransformSpec:
    """Static contract of a transform, used for type-checking chains.

    ``claims`` are the restriction tags the output satisfies by construction;
    ``preserves`` are the input properties carried over to the output.
    """

    name: str
    build: Callable
    input_kinds: tuple
    requires: frozenset
    output_kind: str
    claims: tuple = ()
    preserves: frozenset = frozenset({"total", "CInd"})
    mode: str = "Ex"
    # convergence mode of the output when it differs from the input's
    mode_out: Optional[str] = None
    needs_family: bool = False


def static_props(spec: TransformSpec, props: frozenset) -> frozenset:
    return (frozenset(props) & spec.preserves) | frozenset(spec.claims)


def _totalize(h: Learner) -> Learner:
    return totalize(_g_view(h))


_SEQ = ("G", "Psd", "Sd")
_ALL = ("G", "Psd", "Sd", "It", "Td")
_BASIC = frozenset({"total", "CInd"})
_TAGS_ALL = frozenset({"Cons", "Conv", "SemConv", "Caut", "CautTar", "Mon", "SMon", "WMon",
                       "Wb", "Dec", "SDec", "NU", "SNU", "T"})
_F = frozenset

TRANSFORMS: dict[str, TransformSpec] = {s.name: s for s in [
    TransformSpec("totalize", _totalize, _ALL, _F(), "G", ("total",),
                  preserves=_TAGS_ALL | {"CInd"}),
    TransformSpec("to_hypothesis_space", to_hypothesis_space, _ALL, _F({"CInd"}), "G",
                  preserves=_TAGS_ALL | {"total"}),
    TransformSpec("to_cind", to_cind, ("G",), _F(), "G", ("CInd",),
                  preserves=_TAGS_ALL | {"total"}),
    TransformSpec("make_consistent_patch", make_consistent_patch, _SEQ, _BASIC, "same",
                  ("Cons",), _BASIC | {"SMon", "Mon", "T"}),
    TransformSpec("make_consistent_reset", make_consistent_reset, _SEQ, _BASIC, "same",
                  ("Cons",), _BASIC | {"WMon", "CautTar", "T"}),
    TransformSpec("make_consistent_dedup", make_consistent_dedup, _SEQ, _BASIC, "same",
                  ("Cons",), _BASIC | {"Conv", "SemConv", "T"}),
    TransformSpec("cauttar_to_wb", cauttar_to_wb, _SEQ, _F({"Cons", "CautTar"}), "G",
                  ("Wb",), _BASIC | {"Cons", "CautTar"}),
    TransformSpec("g_to_sd_cauttar", g_to_sd_cauttar, _SEQ, _F({"Cons", "CautTar"}), "Sd",
                  ("CautTar",), _BASIC | {"Cons"}),
    TransformSpec("sd_cauttar_to_wb", sd_cauttar_to_wb, ("Sd",), _F({"CautTar"}), "Sd",
                  ("Wb",)),
    TransformSpec("g_to_snu", g_to_snu, _SEQ, _BASIC, "G", ("SNU",), needs_family=True),
    TransformSpec("snu_to_sdec", snu_to_sdec, ("G",), _F({"SNU"}), "G", ("SDec",),
                  _BASIC | {"SNU"}),
    TransformSpec("g_to_psd", g_to_psd, _SEQ, _F({"total"}), "Psd"),
    TransformSpec("bc_to_it_pad", bc_to_it_pad, _SEQ, _F({"CInd"}), "It", mode="Bc"),
    TransformSpec("it_to_sd", it_to_sd, ("It",), _F(), "Sd"),
    TransformSpec("sd_bc_to_cauttar_bc", sd_bc_to_cauttar_bc, ("Sd",), _F({"Cons"}), "Sd",
                  ("CautTar",), _BASIC | {"Cons"}, mode="Bc"),
    TransformSpec("sd_cauttar_bc_to_ex", sd_cauttar_bc_to_ex, ("Sd",),
                  _F({"Cons", "CautTar"}), "Sd", (), _BASIC | {"Cons", "CautTar"},
                  mode="Bc", mode_out="Ex"),
    TransformSpec("td_bc_to_ex", td_bc_to_ex, ("Td",), _F(), "Td", (), _F({"total"}),
                  mode="Bc", mode_out="Ex"),
]}


def output_kind(spec: TransformSpec, kind: str) -> str:
    return kind if spec.output_kind == "same" else spec.output_kind


def apply_transform(name: str, h: Learner, family: Optional[str] = None) -> Learner:
    spec = TRANSFORMS[name]
    if spec.needs_family:
        if family is None:
            raise ContractViolation(f"{name} needs a family")
        return spec.build(h, family)
    return spec.build(h)
