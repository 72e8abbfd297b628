"""Minimal s-expression reader shared by the formula and type languages."""

from __future__ import annotations

import re

_TOKEN = re.compile(r"""\s*(?:(;[^\n]*)|(\()|(\))|("(?:[^"\\]|\\.)*")|([^\s()";]+))""")


class SexprError(ValueError):
    pass


class Symbol(str):
    """An unquoted atom.  Quoted strings are plain ``str``."""

    __slots__ = ()


def tokenize(text: str):
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise SexprError(f"unexpected character at offset {pos}: {text[pos]!r}")
        pos = m.end()
        comment, lpar, rpar, string, atom = m.groups()
        if comment:
            continue
        if lpar:
            yield "("
        elif rpar:
            yield ")"
        elif string is not None:
            yield ("str", bytes(string[1:-1], "utf-8").decode("unicode_escape"))
        elif atom is not None:
            yield ("sym", atom)


def parse_all(text: str) -> list:
    """Parse every top-level form in ``text``."""
    stack: list[list] = [[]]
    for tok in tokenize(text):
        if tok == "(":
            stack.append([])
        elif tok == ")":
            if len(stack) == 1:
                raise SexprError("unbalanced ')'")
            done = stack.pop()
            stack[-1].append(done)
        else:
            kind, val = tok
            stack[-1].append(Symbol(val) if kind == "sym" else val)
    if len(stack) != 1:
        raise SexprError("missing ')'")
    return stack[0]


def parse(text: str):
    forms = parse_all(text)
    if len(forms) != 1:
        raise SexprError(f"expected one form, found {len(forms)}")
    return forms[0]


def dump(form) -> str:
    if isinstance(form, list):
        return "(" + " ".join(dump(f) for f in form) + ")"
    if isinstance(form, Symbol):
        return str(form)
    if isinstance(form, str):
        return '"' + form.replace("\\", "\\\\").replace('"', '\\"') + '"'
    return str(form)


def head(form):
    """The operator symbol of a list form, or ``None``."""
    if isinstance(form, list) and form and isinstance(form[0], Symbol):
        return str(form[0])
    return None
