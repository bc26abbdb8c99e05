"""Experiment specification language.

    spec    := stmt*
    stmt    := "family" NAME "=" ctor
             | "learner" NAME "=" chain
             | "run" "{" kv* "}"
    chain   := NAME | NAME "(" chain ")" | ctor
    ctor    := NAME ( "(" kv ("," kv)* ")" )?
    kv      := NAME "=" ( NAME | INT | list )
    list    := "[" ( value ( "," value )* )? "]"

``#`` starts a comment that runs to the end of the line.  Every rejection is
a :class:`SpecError` carrying a code, a message, a line/column position and
the set of tokens that would have been accepted.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional, Union

from .core import DEFAULT_BOUND, DEFAULT_HORIZON, FAMILIES
from .families import catalog_learners
from .harness import Job, text_ensemble
from .operators import Learner, star, with_cost
from .restrictions import MODES, TAGS
from .transforms import TRANSFORMS, apply_transform, output_kind, static_props

# diagnostic codes
E_SYNTAX = "E001"
E_UNKNOWN = "E101"
E_KIND = "E102"
E_DUPLICATE = "E103"
E_TAG = "E104"
E_PROPS = "E105"
E_VALUE = "E106"
E_MISSING = "E107"

MAX_DEPTH = 64  # nesting limit for transform chains
RUN_KEYS = ("label", "family", "learner", "texts", "check", "seeds", "members",
            "bound", "horizon", "seed")
TEXT_KINDS = ("canonical", "seeded")
LIMITS = {"seeds": 1000, "bound": 1 << 16, "horizon": 1 << 16}
COSTS = {
    "linear": lambda s: 2 * len(s),
    "square": lambda s: len(s) ** 2,
    # h(eps) is free, as totalize requires
    "exp": lambda s: 0 if not s else 2 ** len(s) if len(s) < 64 else float("inf"),
}


@dataclass
class Pos:
    line: int
    col: int

    def __str__(self) -> str:
        return f"{self.line}:{self.col}"


class SpecError(Exception):
    def __init__(self, code: str, msg: str, pos: Pos, expected=()):
        self.code = code
        self.msg = msg
        self.pos = pos
        self.expected = tuple(sorted(expected))
        super().__init__(str(self))

    def __str__(self) -> str:
        tail = f" (expected one of: {', '.join(self.expected)})" if self.expected else ""
        return f"{self.pos}: {self.code} {self.msg}{tail}"


# -- lexer -------------------------------------------------------------------

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>\#[^\n]*)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<int>[0-9]+)
  | (?P<punct>[=(){}\[\],])
""", re.VERBOSE)


@dataclass
class Tok:
    kind: str  # name | int | punct | eof
    text: str
    pos: Pos


def tokenize(src: str) -> list:
    out = []
    i, line, col = 0, 1, 1
    while i < len(src):
        m = _TOKEN.match(src, i)
        if m is None:
            raise SpecError(E_SYNTAX, f"unexpected character {src[i]!r}", Pos(line, col))
        kind = m.lastgroup
        text = m.group()
        if kind in ("name", "int", "punct"):
            out.append(Tok(kind, text, Pos(line, col)))
        nl = text.count("\n")
        if nl:
            line += nl
            col = len(text) - text.rfind("\n")
        else:
            col += len(text)
        i = m.end()
    out.append(Tok("eof", "", Pos(line, col)))
    return out


# -- syntax tree ----------------------------------------------------------------

Value = Union[str, int, tuple]


@dataclass
class Ctor:
    name: str
    args: tuple = ()  # ((key, value), ...)
    pos: Pos = field(default=None, compare=False, repr=False)

    def arg(self, key: str, default=None):
        return dict(self.args).get(key, default)


@dataclass
class Call:
    name: str
    inner: "Chain"
    pos: Pos = field(default=None, compare=False, repr=False)


Chain = Union[Ctor, Call]


@dataclass
class FamilyStmt:
    name: str
    ctor: Ctor
    pos: Pos = field(default=None, compare=False, repr=False)


@dataclass
class LearnerStmt:
    name: str
    chain: Chain
    pos: Pos = field(default=None, compare=False, repr=False)


@dataclass
class RunStmt:
    args: tuple
    pos: Pos = field(default=None, compare=False, repr=False)
    arg_pos: dict = field(default_factory=dict, compare=False, repr=False)

    def arg(self, key: str, default=None):
        return dict(self.args).get(key, default)


@dataclass
class ExperimentSpec:
    stmts: list

    @property
    def families(self) -> dict:
        return {s.name: s for s in self.stmts if isinstance(s, FamilyStmt)}

    @property
    def learners(self) -> dict:
        return {s.name: s for s in self.stmts if isinstance(s, LearnerStmt)}

    @property
    def runs(self) -> list:
        return [s for s in self.stmts if isinstance(s, RunStmt)]


# -- parser --------------------------------------------------------------------

class _Parser:
    def __init__(self, src: str):
        self.toks = tokenize(src)
        self.i = 0

    @property
    def tok(self) -> Tok:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Tok:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def fail(self, expected) -> SpecError:
        t = self.tok
        what = "end of input" if t.kind == "eof" else repr(t.text)
        return SpecError(E_SYNTAX, f"unexpected {what}", t.pos, expected)

    def punct(self, p: str) -> Tok:
        if self.tok.kind == "punct" and self.tok.text == p:
            t = self.tok
            self.i += 1
            return t
        raise self.fail({repr(p)})

    def name(self, what: str = "NAME") -> Tok:
        if self.tok.kind != "name":
            raise self.fail({what})
        t = self.tok
        self.i += 1
        return t

    def at(self, p: str) -> bool:
        return self.tok.kind == "punct" and self.tok.text == p

    def spec(self) -> ExperimentSpec:
        stmts = []
        while self.tok.kind != "eof":
            stmts.append(self.stmt())
        return ExperimentSpec(stmts)

    def stmt(self):
        t = self.tok
        if t.kind == "name" and t.text == "family":
            self.i += 1
            name = self.name()
            self.punct("=")
            return FamilyStmt(name.text, self.ctor(), t.pos)
        if t.kind == "name" and t.text == "learner":
            self.i += 1
            name = self.name()
            self.punct("=")
            return LearnerStmt(name.text, self.chain(), t.pos)
        if t.kind == "name" and t.text == "run":
            self.i += 1
            self.punct("{")
            args = []
            where = {}
            while not self.at("}"):
                if self.tok.kind != "name":
                    raise self.fail({"NAME", "'}'"})
                where.setdefault(self.tok.text, self.peek(2).pos)
                args.append(self.kv())
            self.punct("}")
            return RunStmt(tuple(args), t.pos, where)
        raise self.fail({"'family'", "'learner'", "'run'"})

    def chain(self, depth: int = 0) -> Chain:
        if depth > MAX_DEPTH:
            raise SpecError(E_SYNTAX, f"chain nested deeper than {MAX_DEPTH}", self.tok.pos)
        head = self.name()
        if not self.at("("):
            return Ctor(head.text, (), head.pos)
        # NAME "(" NAME "=" ... is a constructor, anything else nests a chain
        if self.peek().kind == "name" and self.peek(2).kind == "punct" \
                and self.peek(2).text == "=":
            return self._ctor_args(head)
        self.punct("(")
        inner = self.chain(depth + 1)
        self.punct(")")
        return Call(head.text, inner, head.pos)

    def ctor(self) -> Ctor:
        head = self.name()
        if not self.at("("):
            return Ctor(head.text, (), head.pos)
        return self._ctor_args(head)

    def _ctor_args(self, head: Tok) -> Ctor:
        self.punct("(")
        args = [self.kv()]
        while self.at(","):
            self.i += 1
            args.append(self.kv())
        self.punct(")")
        return Ctor(head.text, tuple(args), head.pos)

    def kv(self) -> tuple:
        key = self.name()
        self.punct("=")
        return key.text, self.value(allow_list=True)

    def value(self, allow_list: bool) -> Value:
        t = self.tok
        if t.kind == "name":
            self.i += 1
            return t.text
        if t.kind == "int":
            if len(t.text) > 18:
                raise SpecError(E_VALUE, "integer literal too large", t.pos)
            self.i += 1
            return int(t.text)
        if allow_list and self.at("["):
            self.i += 1
            items = []
            if not self.at("]"):
                items.append(self.value(False))
                while self.at(","):
                    self.i += 1
                    items.append(self.value(False))
            self.punct("]")
            return tuple(items)
        raise self.fail({"NAME", "INT", "'['"} if allow_list else {"NAME", "INT"})


def parse_syntax(src: str) -> ExperimentSpec:
    return _Parser(src).spec()


# -- static checking -------------------------------------------------------------

@dataclass(frozen=True)
class LearnerType:
    kind: str
    props: frozenset


def _catalog() -> dict:
    return catalog_learners()


def _chain_type(chain: Chain, env: dict, catalog: dict) -> LearnerType:
    if isinstance(chain, Ctor):
        if chain.name in env:
            if chain.args:
                raise SpecError(E_VALUE, f"bound learner {chain.name!r} takes no arguments",
                                chain.pos)
            return env[chain.name]
        if chain.name in catalog:
            h = catalog[chain.name]
            kind = h.kind
            for key, val in chain.args:
                if key != "cost":
                    raise SpecError(E_VALUE, f"unknown learner argument {key!r}", chain.pos,
                                    {"cost"})
                if val not in COSTS:
                    raise SpecError(E_VALUE, f"unknown cost model {val!r}", chain.pos, COSTS)
                kind = "G"
            props = h.props - {"total"} if chain.args else h.props
            return LearnerType(kind, props)
        if chain.name in TRANSFORMS:
            raise SpecError(E_KIND, f"transform {chain.name!r} needs a learner argument",
                            chain.pos)
        raise SpecError(E_UNKNOWN, f"unknown learner {chain.name!r}", chain.pos,
                        sorted(env) + sorted(catalog))
    spec = TRANSFORMS.get(chain.name)
    if spec is None:
        raise SpecError(E_UNKNOWN, f"unknown transform {chain.name!r}", chain.pos,
                        sorted(TRANSFORMS))
    inner = _chain_type(chain.inner, env, catalog)
    if inner.kind not in spec.input_kinds:
        raise SpecError(E_KIND, f"{chain.name} takes {'/'.join(spec.input_kinds)}, "
                        f"got {inner.kind}", chain.pos)
    missing = spec.requires - inner.props
    if missing:
        raise SpecError(E_PROPS, f"{chain.name} needs {','.join(sorted(missing))}",
                        chain.pos)
    return LearnerType(output_kind(spec, inner.kind), static_props(spec, inner.props))


def check(spec: ExperimentSpec) -> dict:
    """Resolve names and type-check chains; returns the learner types."""
    catalog = _catalog()
    fams: dict = {}
    env: dict = {}
    for s in spec.stmts:
        if isinstance(s, FamilyStmt):
            if s.name in fams or s.name in env:
                raise SpecError(E_DUPLICATE, f"duplicate binding {s.name!r}", s.pos)
            if s.ctor.name not in FAMILIES:
                raise SpecError(E_UNKNOWN, f"unknown family {s.ctor.name!r}", s.ctor.pos,
                                sorted(FAMILIES))
            for key, val in s.ctor.args:
                if key != "members":
                    raise SpecError(E_VALUE, f"unknown family argument {key!r}",
                                    s.ctor.pos, {"members"})
                if not isinstance(val, tuple) or not all(isinstance(v, int) for v in val):
                    raise SpecError(E_VALUE, "members must be a list of integers",
                                    s.ctor.pos)
            fams[s.name] = s
        elif isinstance(s, LearnerStmt):
            if s.name in fams or s.name in env:
                raise SpecError(E_DUPLICATE, f"duplicate binding {s.name!r}", s.pos)
            env[s.name] = _chain_type(s.chain, env, catalog)
        else:
            _check_run(s, fams, env)
    return env


def _check_run(s: RunStmt, fams: dict, env: dict) -> None:
    def at(key: str) -> Pos:
        return s.arg_pos.get(key, s.pos)

    seen = set()
    for key, val in s.args:
        if key not in RUN_KEYS:
            raise SpecError(E_VALUE, f"unknown run key {key!r}", at(key), RUN_KEYS)
        if key in seen:
            raise SpecError(E_DUPLICATE, f"duplicate run key {key!r}", s.pos)
        seen.add(key)
    for key in ("family", "learner"):
        if key not in seen:
            raise SpecError(E_MISSING, f"run needs {key}=", s.pos)
    if s.arg("family") not in fams:
        raise SpecError(E_UNKNOWN, f"unknown family binding {s.arg('family')!r}", at("family"),
                        sorted(fams))
    if s.arg("learner") not in env:
        raise SpecError(E_UNKNOWN, f"unknown learner binding {s.arg('learner')!r}", at("learner"),
                        sorted(env))
    for c in _as_list(s.arg("check", ())):
        if c not in TAGS and c not in MODES:
            raise SpecError(E_TAG, f"unknown restriction tag {c!r}", at("check"), TAGS + MODES)
    for t in _as_list(s.arg("texts", ("canonical",))):
        if t not in TEXT_KINDS:
            raise SpecError(E_VALUE, f"unknown text kind {t!r}", at("texts"), TEXT_KINDS)
    for key in ("seeds", "bound", "horizon", "seed"):
        if key in seen and not isinstance(s.arg(key), int):
            raise SpecError(E_VALUE, f"{key} must be an integer", at(key))
        if key in LIMITS and key in seen and s.arg(key) > LIMITS[key]:
            raise SpecError(E_VALUE, f"{key} must be at most {LIMITS[key]}", at(key))
    members = s.arg("members")
    if members is not None and not (isinstance(members, tuple)
                                    and all(isinstance(m, int) for m in members)):
        raise SpecError(E_VALUE, "members must be a list of integers", at("members"))


def _as_list(v) -> tuple:
    return v if isinstance(v, tuple) else (v,)


def parse_spec(src: str) -> ExperimentSpec:
    spec = parse_syntax(src)
    check(spec)
    return spec


# -- pretty printing -------------------------------------------------------------

def _fmt_value(v: Value) -> str:
    if isinstance(v, tuple):
        return "[" + ",".join(_fmt_value(x) for x in v) + "]"
    return str(v)


def _fmt_chain(c: Chain) -> str:
    if isinstance(c, Call):
        return f"{c.name}({_fmt_chain(c.inner)})"
    if not c.args:
        return c.name
    return c.name + "(" + ", ".join(f"{k}={_fmt_value(v)}" for k, v in c.args) + ")"


def pretty(spec: ExperimentSpec) -> str:
    lines = []
    for s in spec.stmts:
        if isinstance(s, FamilyStmt):
            lines.append(f"family {s.name} = {_fmt_chain(s.ctor)}")
        elif isinstance(s, LearnerStmt):
            lines.append(f"learner {s.name} = {_fmt_chain(s.chain)}")
        else:
            body = " ".join(f"{k}={_fmt_value(v)}" for k, v in s.args)
            lines.append("run { " + body + (" }" if body else "}"))
    return "\n".join(lines) + ("\n" if lines else "")


# -- building jobs ---------------------------------------------------------------

def build_learner(chain: Chain, bindings: dict, family: str) -> Learner:
    if isinstance(chain, Call):
        inner = build_learner(chain.inner, bindings, family)
        return apply_transform(chain.name, inner, family)
    if chain.name in bindings:
        return build_learner(bindings[chain.name].chain, bindings, family)
    h = _catalog()[chain.name]
    cost = chain.arg("cost")
    if cost is not None:
        g = star(h)
        h = with_cost(g, COSTS[cost], cost)
    return h


def jobs(spec: ExperimentSpec, bound: Optional[int] = None, horizon: Optional[int] = None,
         seed: Optional[int] = None) -> list:
    """Expand every run block into (member x text) jobs, in spec order."""
    fams = spec.families
    bindings = spec.learners
    out = []
    for r in spec.runs:
        fam_stmt = fams[r.arg("family")]
        fam = FAMILIES[fam_stmt.ctor.name]
        members = r.arg("members") or fam_stmt.ctor.arg("members") or fam.index_hint
        b = bound if bound is not None else r.arg("bound", DEFAULT_BOUND)
        hz = horizon if horizon is not None else r.arg("horizon", DEFAULT_HORIZON)
        sd = seed if seed is not None else r.arg("seed", 0)
        texts = text_ensemble(_as_list(r.arg("texts", ("canonical",))), sd,
                              r.arg("seeds", 10))
        checks = _as_list(r.arg("check", ()))
        label = r.arg("label", r.arg("learner"))
        chain = bindings[r.arg("learner")].chain

        def make(chain=chain, family=fam.name):
            return build_learner(chain, bindings, family)

        for i in members:
            for t in texts:
                out.append(Job(label, make, fam.name, i, t, checks, b, hz, sd))
    return out
