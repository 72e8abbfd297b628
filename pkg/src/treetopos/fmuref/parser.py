"""Concrete syntax: parsing and printing.

Types::

    T ::= forall a. T | mu a. T | S -> T | S
    S ::= P + P + ...            P ::= U * U * ...
    U ::= ref U | 1 | 0 | a | (T)

Terms::

    t ::= \\x:T. t | /\\a. t | fix f(x:T):T. t | let x:T = t in t
        | case t of inl x => t | inr y => t | a := a | a ; t
    a ::= a u | a [T] | u
    u ::= ref u | !u | fst u | snd u | unfold u
        | fold[T] u | inl[T] u | inr[T] u | void[T] u | atom
    atom ::= x | #n | () | (t) | (t, t)

``let`` and ``;`` are sugar for an applied lambda.  Comments run from ``--``
to the end of the line.
"""

from __future__ import annotations

import re

from .syntax import (
    App, Assign, Case, Deref, Fix, Fold, Fst, Inl, Inr, Lam, Loc, Pair, Ref, Snd, TApp,
    TLam, TyAll, TyArrow, TyMu, TyProd, TyRef, TySum, TyUnit, TyVar, TyVoid, Unfold, Unit,
    Var, Void,
)


class ParseError(ValueError):
    def __init__(self, msg: str, line: int = 0, col: int = 0):
        super().__init__(f"{line}:{col}: {msg}" if line else msg)
        self.line, self.col = line, col


_TOKEN = re.compile(r"""
    (?P<ws>\s+|--[^\n]*)
  | (?P<loc>\#\d+)
  | (?P<op>=>|->|:=|/\\|\\|[().,:;\[\]!*+=|λΛ∀μ×])
  | (?P<num>\d+)
  | (?P<id>[A-Za-z_][A-Za-z0-9_']*)
""", re.VERBOSE)

KEYWORDS = {"ref", "fst", "snd", "fold", "unfold", "inl", "inr", "void", "case", "of",
            "fix", "let", "in", "forall", "mu"}
_ALIASES = {"λ": "\\", "Λ": "/\\", "∀": "forall", "μ": "mu", "×": "*"}


def tokenize(text: str) -> list[tuple]:
    toks = []
    pos, line, col0 = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - col0 + 1)
        kind = m.lastgroup
        val = m.group()
        if kind != "ws":
            if kind == "op":
                val = _ALIASES.get(val, val)
            if kind == "id" and val in KEYWORDS:
                kind = "kw"
            if val in ("forall", "mu"):
                kind = "kw"
            toks.append((kind, val, line, pos - col0 + 1))
        nl = val.count("\n") if kind == "ws" else 0
        if nl:
            line += nl
            col0 = m.start() + val.rindex("\n") + 1
        pos = m.end()
    toks.append(("eof", "", line, pos - col0 + 1))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    # -- token helpers --------------------------------------------------------

    def peek(self, ahead: int = 0):
        return self.toks[min(self.i + ahead, len(self.toks) - 1)]

    def at(self, val: str) -> bool:
        return self.peek()[1] == val and self.peek()[0] != "eof"

    def next(self):
        tok = self.peek()
        self.i += 1
        return tok

    def expect(self, val: str):
        tok = self.next()
        if tok[1] != val or tok[0] == "eof":
            self.fail(f"expected {val!r}, found {tok[1] or 'end of input'!r}", tok)
        return tok

    def ident(self):
        tok = self.next()
        if tok[0] != "id":
            self.fail(f"expected an identifier, found {tok[1] or 'end of input'!r}", tok)
        return tok[1]

    def fail(self, msg, tok=None):
        tok = tok or self.peek()
        raise ParseError(msg, tok[2], tok[3])

    # -- types ----------------------------------------------------------------

    def type(self, tvars):
        if self.at("forall") or self.at("mu"):
            kw = self.next()[1]
            a = self.ident()
            self.expect(".")
            body = self.type([a] + tvars)
            return TyAll(body, a) if kw == "forall" else TyMu(body, a)
        left = self.sum_type(tvars)
        if self.at("->"):
            self.next()
            return TyArrow(left, self.type(tvars))
        return left

    def sum_type(self, tvars):
        ty = self.prod_type(tvars)
        while self.at("+"):
            self.next()
            ty = TySum(ty, self.prod_type(tvars))
        return ty

    def prod_type(self, tvars):
        ty = self.unary_type(tvars)
        while self.at("*"):
            self.next()
            ty = TyProd(ty, self.unary_type(tvars))
        return ty

    def unary_type(self, tvars):
        tok = self.peek()
        if tok[1] == "ref" and tok[0] == "kw":
            self.next()
            return TyRef(self.unary_type(tvars))
        if tok[0] == "num" and tok[1] in ("0", "1"):
            self.next()
            return TyUnit() if tok[1] == "1" else TyVoid()
        if tok[0] == "id":
            self.next()
            if tok[1] == "unit":
                return TyUnit()
            if tok[1] not in tvars:
                self.fail(f"unbound type variable {tok[1]!r}", tok)
            return TyVar(tvars.index(tok[1]), tok[1])
        if tok[1] == "(":
            self.next()
            ty = self.type(tvars)
            self.expect(")")
            return ty
        self.fail(f"expected a type, found {tok[1] or 'end of input'!r}", tok)

    def bracket_type(self, tvars):
        self.expect("[")
        ty = self.type(tvars)
        self.expect("]")
        return ty

    # -- terms ----------------------------------------------------------------

    def term(self, vs, tvs):
        t = self.binder_term(vs, tvs)
        if self.at(";"):
            self.next()
            rest = self.term(["_"] + vs, tvs)
            return App(Lam(TyUnit(), rest, "_"), t)
        return t

    def binder_term(self, vs, tvs):
        tok = self.peek()
        v = tok[1]
        if v == "\\":
            self.next()
            x = self.ident()
            self.expect(":")
            ty = self.type(tvs)
            self.expect(".")
            return Lam(ty, self.term([x] + vs, tvs), x)
        if v == "/\\":
            self.next()
            a = self.ident()
            self.expect(".")
            return TLam(self.term(vs, [a] + tvs), a)
        if v == "fix" and tok[0] == "kw":
            self.next()
            f = self.ident()
            self.expect("(")
            x = self.ident()
            self.expect(":")
            dom = self.type(tvs)
            self.expect(")")
            self.expect(":")
            cod = self.type(tvs)
            self.expect(".")
            return Fix(dom, cod, self.term([x, f] + vs, tvs), f, x)
        if v == "let" and tok[0] == "kw":
            self.next()
            x = self.ident()
            self.expect(":")
            ty = self.type(tvs)
            self.expect("=")
            bound = self.term(vs, tvs)
            self.expect("in")
            body = self.term([x] + vs, tvs)
            return App(Lam(ty, body, x), bound)
        if v == "case" and tok[0] == "kw":
            self.next()
            scrut = self.term(vs, tvs)
            self.expect("of")
            self.expect("inl")
            x1 = self.ident()
            self.expect("=>")
            left = self.binder_term([x1] + vs, tvs)
            self.expect("|")
            self.expect("inr")
            x2 = self.ident()
            self.expect("=>")
            right = self.binder_term([x2] + vs, tvs)
            return Case(scrut, left, right, x1, x2)
        left = self.app_term(vs, tvs)
        if self.at(":="):
            self.next()
            return Assign(left, self.app_term(vs, tvs))
        return left

    def _starts_unary(self):
        kind, v = self.peek()[:2]
        if kind in ("id", "loc"):
            return True
        if kind == "kw":
            return v in ("ref", "fst", "snd", "unfold", "fold", "inl", "inr", "void")
        return v in ("(", "!")

    def app_term(self, vs, tvs):
        t = self.unary_term(vs, tvs)
        while True:
            if self.at("["):
                t = TApp(t, self.bracket_type(tvs))
            elif self._starts_unary():
                t = App(t, self.unary_term(vs, tvs))
            else:
                return t

    def unary_term(self, vs, tvs):
        tok = self.peek()
        kind, v = tok[:2]
        if kind == "kw":
            if v in ("ref", "fst", "snd", "unfold"):
                self.next()
                cls = {"ref": Ref, "fst": Fst, "snd": Snd, "unfold": Unfold}[v]
                return cls(self.unary_term(vs, tvs))
            if v in ("fold", "inl", "inr", "void"):
                self.next()
                ty = self.bracket_type(tvs)
                cls = {"fold": Fold, "inl": Inl, "inr": Inr, "void": Void}[v]
                return cls(self.unary_term(vs, tvs), ty)
        if v == "!":
            self.next()
            return Deref(self.unary_term(vs, tvs))
        return self.atom(vs, tvs)

    def atom(self, vs, tvs):
        tok = self.next()
        kind, v = tok[:2]
        if kind == "id":
            if v not in vs:
                self.fail(f"unbound variable {v!r}", tok)
            return Var(vs.index(v), v)
        if kind == "loc":
            return Loc(int(v[1:]))
        if v == "(":
            if self.at(")"):
                self.next()
                return Unit()
            t = self.term(vs, tvs)
            if self.at(","):
                self.next()
                u = self.term(vs, tvs)
                self.expect(")")
                return Pair(t, u)
            self.expect(")")
            return t
        self.fail(f"unexpected {v or 'end of input'!r}", tok)


def parse_program(text: str):
    """Parse a closed term."""
    p = _Parser(text)
    t = p.term([], [])
    if p.peek()[0] != "eof":
        p.fail(f"trailing input {p.peek()[1]!r}")
    return t


def parse_srctype(text: str):
    """Parse a closed type."""
    p = _Parser(text)
    ty = p.type([])
    if p.peek()[0] != "eof":
        p.fail(f"trailing input {p.peek()[1]!r}")
    return ty


# ----------------------------------------------------------------------------
# Printing


def _fresh(hint: str, taken) -> str:
    base = hint if hint and hint not in KEYWORDS and hint != "unit" else "v"
    if base == "_":
        base = "u"
    name, i = base, 1
    while name in taken:
        name = f"{base}{i}"
        i += 1
    return name


def show_type(ty, tvars=()) -> str:
    return _ty(ty, list(tvars), 0)


def _ty(ty, tvs, prec):
    # prec: 0 top, 1 sum operand, 2 product operand, 3 atom
    match ty:
        case TyUnit():
            return "1"
        case TyVoid():
            return "0"
        case TyVar(i, h):
            return tvs[i] if i < len(tvs) else f"?{i}"
        case TyRef(b):
            s = "ref " + _ty(b, tvs, 3)
            return s
        case TyProd(l, r):
            s = f"{_ty(l, tvs, 2)} * {_ty(r, tvs, 3)}"
            return f"({s})" if prec > 2 else s
        case TySum(l, r):
            s = f"{_ty(l, tvs, 1)} + {_ty(r, tvs, 2)}"
            return f"({s})" if prec > 1 else s
        case TyArrow(d, c):
            s = f"{_ty(d, tvs, 1)} -> {_ty(c, tvs, 0)}"
            return f"({s})" if prec > 0 else s
        case TyMu(b, h) | TyAll(b, h):
            a = _fresh(h, tvs)
            kw = "mu" if isinstance(ty, TyMu) else "forall"
            s = f"{kw} {a}. {_ty(b, [a] + tvs, 0)}"
            return f"({s})" if prec > 0 else s
    raise TypeError(f"not a type: {ty!r}")


def show(t, vs=(), tvs=()) -> str:
    """Print a term in the concrete syntax accepted by :func:`parse_program`."""
    return _tm(t, list(vs), list(tvs), 0)


def _tm(t, vs, tvs, prec):
    # prec: 0 anywhere, 1 application head or argument position, 2 atom
    match t:
        case Var(i, h):
            return vs[i] if i < len(vs) else f"?{i}"
        case Loc(a):
            return f"#{a}"
        case Unit():
            return "()"
        case Pair(l, r):
            return f"({_tm(l, vs, tvs, 0)}, {_tm(r, vs, tvs, 0)})"
        case Lam(ty, b, h):
            x = _fresh(h, vs)
            s = f"\\{x}:{show_type(ty, tvs)}. {_tm(b, [x] + vs, tvs, 0)}"
            return f"({s})" if prec > 0 else s
        case TLam(b, h):
            a = _fresh(h, tvs)
            s = f"/\\{a}. {_tm(b, vs, [a] + tvs, 0)}"
            return f"({s})" if prec > 0 else s
        case Fix(d, c, b, fh, xh):
            f = _fresh(fh, vs)
            x = _fresh(xh, [f] + vs)
            s = (f"fix {f}({x}:{show_type(d, tvs)}):{show_type(c, tvs)}. "
                 f"{_tm(b, [x, f] + vs, tvs, 0)}")
            return f"({s})" if prec > 0 else s
        case Case(sc, l, r, lh, rh):
            x1 = _fresh(lh, vs)
            x2 = _fresh(rh, vs)
            s = (f"case {_tm(sc, vs, tvs, 0)} of inl {x1} => {_tm(l, [x1] + vs, tvs, 1)}"
                 f" | inr {x2} => {_tm(r, [x2] + vs, tvs, 1)}")
            return f"({s})" if prec > 0 else s
        case Assign(l, r):
            s = f"{_tm(l, vs, tvs, 1)} := {_tm(r, vs, tvs, 1)}"
            return f"({s})" if prec > 0 else s
        case App(f, a):
            s = f"{_tm(f, vs, tvs, 1)} {_tm(a, vs, tvs, 2)}"
            return f"({s})" if prec > 1 else s
        case TApp(f, ty):
            s = f"{_tm(f, vs, tvs, 1)} [{show_type(ty, tvs)}]"
            return f"({s})" if prec > 1 else s
        case Ref(b) | Deref(b) | Fst(b) | Snd(b) | Unfold(b):
            op = {Ref: "ref ", Deref: "!", Fst: "fst ", Snd: "snd ", Unfold: "unfold "}[type(t)]
            s = op + _tm(b, vs, tvs, 2)
            return f"({s})" if prec > 1 else s
        case Fold(b, ty) | Inl(b, ty) | Inr(b, ty) | Void(b, ty):
            op = {Fold: "fold", Inl: "inl", Inr: "inr", Void: "void"}[type(t)]
            s = f"{op}[{show_type(ty, tvs)}] {_tm(b, vs, tvs, 2)}"
            return f"({s})" if prec > 1 else s
    raise TypeError(f"not a term: {t!r}")
