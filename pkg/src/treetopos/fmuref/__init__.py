"""A call-by-value language with polymorphism, recursive types and references,
its interpreter, and bounded checks of its step-indexed model."""

from importlib import resources

from .model import (
    Pool, SynWorld, Verdict, comp_check, default_pool, member_check, states_check,
)
from .parser import ParseError, parse_program, parse_srctype, show, show_type
from .semantics import (
    TRUE, Config, Frame, Outcome, Query, QueryError, Store, Trace, decompose, eval_check,
    eval_query, evalprime_check, is_eval_context, parse_query, plug, run, safety_check, step,
)
from .syntax import is_value
from .typecheck import TypeCheckError, typecheck


def corpus() -> dict[str, str]:
    """The bundled example programs, by file name."""
    root = resources.files(__package__) / "corpus"
    return {p.name: p.read_text() for p in sorted(root.iterdir(), key=lambda p: p.name)
            if p.name.endswith(".fmr")}


def expectation(source: str) -> str | None:
    """``"ill-typed"`` or ``"stuck"`` for programs marked ``-- expect: ...``."""
    for line in source.splitlines():
        line = line.strip()
        if line.startswith("-- expect:"):
            return line.split(":", 1)[1].strip()
    return None


__all__ = [
    "Config", "Frame", "Outcome", "ParseError", "Pool", "Query", "QueryError", "Store",
    "SynWorld", "TRUE", "Trace", "TypeCheckError", "Verdict", "comp_check", "corpus",
    "decompose", "default_pool", "eval_check", "eval_query", "evalprime_check", "expectation",
    "is_eval_context", "is_value", "member_check", "parse_program", "parse_query",
    "parse_srctype", "plug", "run", "safety_check", "show", "show_type", "states_check",
    "step", "typecheck",
]
