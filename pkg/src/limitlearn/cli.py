"""Command-line runner: run specs, verify traces, list the catalog, falsify."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional

from .core import (
    DEFAULT_BOUND, DEFAULT_HORIZON, FAMILIES, LearnError, TermSyntaxError, parse_datum,
    parse_term,
)
from .dsl import SpecError, jobs, parse_spec
from .families import catalog_learners
from .harness import dump_reports, falsify_it, run_suite, summary_matrix
from .operators import HypSequence
from .restrictions import TAGS, check_restriction
from .transforms import TRANSFORMS

EXIT_OK, EXIT_FAIL, EXIT_ERROR = 0, 1, 2

# tags whose definition does not mention the target language
TARGET_FREE = ("Cons", "Conv", "SemConv", "Caut", "SMon", "WMon", "Wb", "Dec", "SDec", "T")


class TraceError(LearnError):
    def __init__(self, msg: str, line: int):
        self.line = line
        super().__init__(f"line {line}: {msg}")


# -- traces --------------------------------------------------------------------

def format_trace(p: HypSequence, bound: int, horizon: int, target=None) -> str:
    lines = [f"B={bound} H={horizon}"]
    if target is not None:
        lines.append(f"target: {target.canon()}")
    lines.append(f"p: {p.terms[0].canon()}")
    for d, t in zip(p.prefix, p.terms[1:]):
        lines.append(f"T: {d}")
        lines.append(f"p: {t.canon()}")
    return "\n".join(lines) + "\n"


def parse_trace(src: str):
    """Inverse of :func:`format_trace`; returns (p, bound, horizon, target)."""
    rows = [(i, ln.strip()) for i, ln in enumerate(src.splitlines(), 1) if ln.strip()]
    if not rows:
        raise TraceError("empty trace", 1)
    i, head = rows[0]
    try:
        fields = dict(part.split("=", 1) for part in head.split())
        bound, horizon = int(fields["B"]), int(fields["H"])
    except (ValueError, KeyError):
        raise TraceError("header must read 'B=<int> H=<int>'", i) from None
    rows = rows[1:]
    target = None
    if rows and rows[0][1].startswith("target:"):
        i, ln = rows[0]
        target = _term(ln[len("target:"):], i)
        rows = rows[1:]
    terms, data = [], []
    want = "p:"
    for i, ln in rows:
        if not ln.startswith(want):
            raise TraceError(f"expected a '{want}' line", i)
        body = ln[len(want):].strip()
        if want == "p:":
            terms.append(_term(body, i))
            want = "T:"
        else:
            try:
                data.append(parse_datum(body))
            except (ValueError, TermSyntaxError):
                raise TraceError(f"bad datum {body!r}", i) from None
            want = "p:"
    if want == "p:" or not terms:
        raise TraceError("trace must end with a 'p:' line", rows[-1][0] if rows else 1)
    return HypSequence(terms, tuple(data)), bound, horizon, target


def _term(s: str, line: int):
    try:
        return parse_term(s.strip())
    except TermSyntaxError as e:
        raise TraceError(str(e), line) from None


# -- subcommands ---------------------------------------------------------------

def cmd_run(args) -> int:
    try:
        spec = parse_spec(Path(args.spec).read_text(encoding="utf-8"))
    except SpecError as e:
        print(f"{args.spec}:{e}", file=sys.stderr)
        return EXIT_ERROR
    except (OSError, UnicodeDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
    reports = run_suite(jobs(spec, args.bound, args.horizon, args.seed))
    lines = [ln for r in reports for ln in r.lines()]
    text = "\n".join(lines + ["", summary_matrix(reports)]) + "\n"
    sys.stdout.write(text)
    if args.out:
        out = Path(args.out)
        try:
            out.mkdir(parents=True, exist_ok=True)
            (out / "report.txt").write_text(text, encoding="utf-8")
            (out / "report.json").write_text(dump_reports(reports) + "\n", encoding="utf-8")
        except OSError as e:
            print(f"error: {e}", file=sys.stderr)
            return EXIT_ERROR
    return EXIT_OK if all(r.ok for r in reports) else EXIT_FAIL


def cmd_verify(args) -> int:
    try:
        p, bound, horizon, target = parse_trace(Path(args.trace).read_text(encoding="utf-8"))
    except TraceError as e:
        print(f"{args.trace}: {e}", file=sys.stderr)
        return EXIT_ERROR
    except (OSError, UnicodeDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
    if args.bound is not None:
        bound = args.bound
    tags = args.check.split(",") if args.check else list(TAGS if target else TARGET_FREE)
    bad = [t for t in tags if t not in TAGS]
    if bad:
        print(f"error: unknown restriction tag {bad[0]!r}", file=sys.stderr)
        return EXIT_ERROR
    if target is None and any(t not in TARGET_FREE for t in tags):
        print("error: these tags need a 'target:' line in the trace", file=sys.stderr)
        return EXIT_ERROR
    ok = True
    for t in tags:
        try:
            v = check_restriction(t, p, None, target if target is not None
                                  else p.terms[0], bound, horizon)
        except LearnError as e:
            print(f"error: {e}", file=sys.stderr)
            return EXIT_ERROR
        print(v.line(Path(args.trace).name))
        ok = ok and v.ok
    return EXIT_OK if ok else EXIT_FAIL


def cmd_catalog(args) -> int:
    print("families:")
    for name in sorted(FAMILIES):
        if name.startswith("hs["):
            continue
        print(f"  {name:<10} {FAMILIES[name].description}")
    print("learners:")
    for lid, h in sorted(catalog_learners().items()):
        print(f"  {lid:<20} {h.kind:<3} {','.join(sorted(h.props)) or '-'}")
    print("transforms:")
    for name in sorted(TRANSFORMS):
        s = TRANSFORMS[name]
        req = ",".join(sorted(s.requires)) or "-"
        claims = ",".join(s.claims) or "-"
        print(f"  {name:<22} {'/'.join(s.input_kinds)} -> {s.output_kind}"
              f"  requires {req}  claims {claims}")
    return EXIT_OK


def cmd_falsify(args) -> int:
    learners = catalog_learners()
    h = learners.get(args.learner)
    if h is None or h.kind != "It":
        known = sorted(k for k, v in learners.items() if v.kind == "It")
        print(f"error: unknown iterative learner {args.learner!r}; "
              f"known: {', '.join(known)}", file=sys.stderr)
        return EXIT_ERROR
    horizon = args.horizon if args.horizon is not None else DEFAULT_HORIZON
    bound = args.bound if args.bound is not None else DEFAULT_BOUND
    cert = falsify_it(h, horizon, bound)
    if cert is None:
        print(f"{h.id}: no certificate within H={horizon}")
        return EXIT_FAIL
    for ln in cert.lines():
        print(ln)
    ok = cert.verify(h, bound)
    print("verified" if ok else "NOT verified")
    return EXIT_OK if ok else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="limitlearn", description=__doc__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--bound", type=int, default=None, help="semantic bound B")
    common.add_argument("--horizon", type=int, default=None, help="text horizon H")
    sub = ap.add_subparsers(dest="cmd", required=True)
    p = sub.add_parser("run", parents=[common], help="execute an experiment spec")
    p.add_argument("spec")
    p.add_argument("--out", help="directory for report.txt and report.json")
    p.set_defaults(func=cmd_run)
    p = sub.add_parser("verify", parents=[common], help="check a dumped trace")
    p.add_argument("trace")
    p.add_argument("--check", help="comma-separated restriction tags")
    p.set_defaults(func=cmd_verify)
    p = sub.add_parser("catalog", parents=[common], help="list families, learners, transforms")
    p.set_defaults(func=cmd_catalog)
    p = sub.add_parser("falsify-it", parents=[common], help="run the iterative falsifier")
    p.add_argument("learner")
    p.set_defaults(func=cmd_falsify)
    return ap


def main(argv: Optional[list] = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_ERROR if e.code else EXIT_OK
    return args.func(args)


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
