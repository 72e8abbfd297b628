"""Command-line interface.

Exit codes: 0 when the query holds or a value is produced, 1 when it is
refuted, ill-typed or stuck, 2 on usage, parse or validation errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import decls, domain, logic, metric
from . import presheaf as ps
from . import fmuref
from .sexpr import SexprError

OK, REFUTED, ERROR = 0, 1, 2


class CliError(Exception):
    pass


def _emit(args, text: str, data) -> None:
    if args.format == "json":
        print(json.dumps(data, sort_keys=True, indent=2))
    else:
        print(text)


def _read(path) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}") from None


# ----------------------------------------------------------------------------
# Logic and domain equations


def cmd_force(args, path) -> int:
    doc = decls.load(_read(path), args.depth)
    phi = doc.subject_formula()
    n = args.level if args.level is not None else doc.depth
    if n is None:
        raise CliError("give --level or a (depth n) form")
    holds = logic.force(n, phi, doc.env_at(n))
    _emit(args, "true" if holds else "false", {"level": n, "holds": holds})
    return OK if holds else REFUTED


def cmd_solve_pred(args, path) -> int:
    doc = decls.load(_read(path), args.depth)
    mu = doc.subject_predicate()
    R = logic.solve_mu_pred(mu)
    lines = [f"level {k}: " + " ".join(ps.encode_label(x) for x in sorted(m, key=ps.sort_key))
             for k, m in enumerate(R.members, start=1)]
    _emit(args, "\n".join(lines), R.to_json())
    return OK


def cmd_solve_type(args, path) -> int:
    doc = decls.load(_read(path), args.depth)
    if doc.depth is None:
        raise CliError("give --depth or a (depth n) form")
    e = doc.subject_type()
    if isinstance(e, domain.TMu):
        solved = domain.solve(e, doc.objects, doc.depth)
        X, data = solved.object, solved.to_json()
    else:
        X = domain.eval_type(e, doc.objects, doc.depth)
        data = {"type": domain.dump(domain.to_sexpr(e)), "sizes": list(X.sizes()),
                "object": X.to_json()}
    _emit(args, "levels: " + " ".join(str(s) for s in X.sizes()), data)
    return OK


# ----------------------------------------------------------------------------
# The programming language


def _program(path):
    return fmuref.parse_program(_read(path))


def cmd_typecheck(args, path) -> int:
    t = _program(path)
    try:
        ty = fmuref.typecheck(t)
    except fmuref.TypeCheckError as exc:
        _emit(args, f"ill-typed: {exc}", {"well_typed": False, "error": str(exc)})
        return REFUTED
    shown = fmuref.show_type(ty)
    _emit(args, shown, {"well_typed": True, "type": shown})
    return OK


def cmd_run(args, path) -> int:
    t = _program(path)
    trace = fmuref.run(fmuref.Config(t), args.fuel)
    final = trace.final
    text = f"{trace.outcome.value} after {trace.steps} step(s)\n{final}"
    _emit(args, text, {"outcome": trace.outcome.value, "steps": trace.steps,
                       "term": fmuref.show(final.term),
                       "store": {f"#{l}": fmuref.show(v) for l, v in final.store.cells}})
    return REFUTED if trace.outcome is fmuref.Outcome.STUCK else OK


def cmd_safety(args, path) -> int:
    t = _program(path)
    try:
        fmuref.typecheck(t)
    except fmuref.TypeCheckError as exc:
        _emit(args, f"rejected: {exc}", {"safe": False, "well_typed": False, "error": str(exc)})
        return REFUTED
    safe = fmuref.safety_check(args.index, t)
    _emit(args, "safe" if safe else "unsafe", {"safe": safe, "well_typed": True,
                                               "index": args.index})
    return OK if safe else REFUTED


def cmd_eval(args, path) -> int:
    t = _program(path)
    query = fmuref.parse_query(args.post or "true")
    holds = fmuref.eval_query(args.index, t, fmuref.Store(), query)
    _emit(args, "true" if holds else "false",
          {"holds": holds, "index": args.index, "post": str(query)})
    return OK if holds else REFUTED


# ----------------------------------------------------------------------------
# Metric bridge


def _json_file(path):
    try:
        return json.loads(_read(path))
    except json.JSONDecodeError as exc:
        raise CliError(f"{path}: invalid JSON ({exc.msg})") from None


def cmd_metric_to_presheaf(args, path) -> int:
    M = metric.BisectedSpace.from_json(_json_file(path))
    if args.depth is None:
        raise CliError("metric-to-presheaf needs --depth")
    X = metric.to_presheaf(M, args.depth)
    _emit(args, "levels: " + " ".join(str(s) for s in X.sizes()), X.to_json())
    return OK


def cmd_presheaf_to_metric(args, path) -> int:
    X = ps.TruncatedPresheaf.from_json(_json_file(path))
    M = metric.from_presheaf(X)
    data = M.to_json()
    rows = [" ".join("-" if e is None else str(e) for e in row) for row in data["dist_exponents"]]
    _emit(args, "points: " + " ".join(data["points"]) + "\n" + "\n".join(rows), data)
    return OK


COMMANDS = {
    "force": (cmd_force, "decide a formula at a level", ".sx"),
    "solve-pred": (cmd_solve_pred, "solve a guarded recursive predicate", ".sx"),
    "solve-type": (cmd_solve_type, "solve a guarded recursive type", ".sx"),
    "typecheck": (cmd_typecheck, "typecheck a program", ".fmr"),
    "run": (cmd_run, "run a program with bounded fuel", ".fmr"),
    "safety": (cmd_safety, "typecheck, then check safety at an index", ".fmr"),
    "eval": (cmd_eval, "check a post-condition at an index", ".fmr"),
    "metric-to-presheaf": (cmd_metric_to_presheaf, "bisected space to presheaf", ".json"),
    "presheaf-to-metric": (cmd_presheaf_to_metric, "total presheaf to bisected space", ".json"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="treetopos", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text, _) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("file", nargs="?", help="input file")
        p.add_argument("--all", metavar="DIR", help="process every matching file in DIR")
        p.add_argument("--format", choices=("text", "json"), default="text")
        if name in ("force", "solve-pred", "solve-type", "metric-to-presheaf"):
            p.add_argument("--depth", type=int)
        if name == "force":
            p.add_argument("--level", type=int)
        if name == "run":
            p.add_argument("--fuel", type=int, default=1000)
        if name in ("safety", "eval"):
            p.add_argument("--index", type=int, default=1000)
        if name == "eval":
            p.add_argument("--post", default="true")
    return parser


_HANDLED = (CliError, decls.DeclError, domain.TypeExprError, logic.FormulaError,
            ps.PresheafError, metric.MetricError, SexprError, fmuref.ParseError,
            fmuref.QueryError, ps.EnumerationCapExceeded, ValueError)


def _run_one(args, fn, path) -> int:
    try:
        return fn(args, path)
    except _HANDLED as exc:
        print(f"error: {path}: {exc}", file=sys.stderr)
        return ERROR


def _validate(args) -> None:
    for flag in ("depth", "level", "index"):
        v = getattr(args, flag, None)
        if v is not None and v < 1:
            raise CliError(f"--{flag} must be at least 1")
    if getattr(args, "fuel", 0) < 0:
        raise CliError("--fuel must be non-negative")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return ERROR if exc.code else OK
    fn, _, suffix = COMMANDS[args.command]
    try:
        _validate(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return ERROR
    if args.all:
        root = Path(args.all)
        if not root.is_dir():
            print(f"error: {root} is not a directory", file=sys.stderr)
            return ERROR
        worst = OK
        for path in sorted(root.glob(f"*{suffix}")):
            print(f"== {path.name}")
            worst = max(worst, _run_one(args, fn, path))
        return worst
    if not args.file:
        print("error: an input file (or --all DIR) is required", file=sys.stderr)
        return ERROR
    return _run_one(args, fn, args.file)


if __name__ == "__main__":
    sys.exit(main())
