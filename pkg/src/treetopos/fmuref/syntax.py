"""Abstract syntax of a call-by-value language with polymorphism, iso-recursive
types and general references.

Both type variables and term variables use de Bruijn indices; binder names are
kept only as printing hints and never take part in equality, so structural
equality is alpha-equivalence.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

# ----------------------------------------------------------------------------
# Types


@dataclass(frozen=True)
class TyUnit:
    pass


@dataclass(frozen=True)
class TyVoid:
    pass


@dataclass(frozen=True)
class TyProd:
    left: "Type"
    right: "Type"


@dataclass(frozen=True)
class TySum:
    left: "Type"
    right: "Type"


@dataclass(frozen=True)
class TyArrow:
    dom: "Type"
    cod: "Type"


@dataclass(frozen=True)
class TyRef:
    body: "Type"


@dataclass(frozen=True)
class TyVar:
    index: int
    hint: str = field(default="a", compare=False)


@dataclass(frozen=True)
class TyMu:
    body: "Type"
    hint: str = field(default="a", compare=False)


@dataclass(frozen=True)
class TyAll:
    body: "Type"
    hint: str = field(default="a", compare=False)


Type = Union[TyUnit, TyVoid, TyProd, TySum, TyArrow, TyRef, TyVar, TyMu, TyAll]


def ty_map(ty: Type, on_var, c: int = 0) -> Type:
    """Rebuild ``ty`` with ``on_var(c, var)`` at each variable; ``c`` counts binders."""
    match ty:
        case TyVar():
            return on_var(c, ty)
        case TyProd(l, r):
            return TyProd(ty_map(l, on_var, c), ty_map(r, on_var, c))
        case TySum(l, r):
            return TySum(ty_map(l, on_var, c), ty_map(r, on_var, c))
        case TyArrow(d, r):
            return TyArrow(ty_map(d, on_var, c), ty_map(r, on_var, c))
        case TyRef(b):
            return TyRef(ty_map(b, on_var, c))
        case TyMu(b, h):
            return TyMu(ty_map(b, on_var, c + 1), h)
        case TyAll(b, h):
            return TyAll(ty_map(b, on_var, c + 1), h)
    return ty


def ty_shift(ty: Type, d: int, cutoff: int = 0) -> Type:
    return ty_map(ty, lambda c, v: TyVar(v.index + d, v.hint) if v.index >= c else v, cutoff)


def ty_subst_top(body: Type, arg: Type) -> Type:
    """``body[arg/0]`` for a body under one binder."""

    def on_var(c, v):
        if v.index == c:
            return ty_shift(arg, c)
        if v.index > c:
            return TyVar(v.index - 1, v.hint)
        return v

    return ty_map(body, on_var)


def ty_free(ty: Type) -> set[int]:
    out: set[int] = set()

    def on_var(c, v):
        if v.index >= c:
            out.add(v.index - c)
        return v

    ty_map(ty, on_var)
    return out


def unroll(mu: TyMu) -> Type:
    """``τ[μα.τ/α]``."""
    return ty_subst_top(mu.body, mu)


# ----------------------------------------------------------------------------
# Terms


@dataclass(frozen=True)
class Var:
    index: int
    hint: str = field(default="x", compare=False)


@dataclass(frozen=True)
class Loc:
    addr: int


@dataclass(frozen=True)
class Unit:
    pass


@dataclass(frozen=True)
class Pair:
    left: "Term"
    right: "Term"


@dataclass(frozen=True)
class Fst:
    body: "Term"


@dataclass(frozen=True)
class Snd:
    body: "Term"


@dataclass(frozen=True)
class Void:
    """Elimination of the empty type; ``ty`` is the result type."""
    body: "Term"
    ty: Type


@dataclass(frozen=True)
class Inl:
    """Left injection; ``ty`` is the whole sum type."""
    body: "Term"
    ty: Type


@dataclass(frozen=True)
class Inr:
    body: "Term"
    ty: Type


@dataclass(frozen=True)
class Case:
    scrut: "Term"
    left: "Term"
    right: "Term"
    lhint: str = field(default="x", compare=False)
    rhint: str = field(default="y", compare=False)


@dataclass(frozen=True)
class Fold:
    """``fold`` into the recursive type ``ty``."""
    body: "Term"
    ty: Type


@dataclass(frozen=True)
class Unfold:
    body: "Term"


@dataclass(frozen=True)
class TLam:
    body: "Term"
    hint: str = field(default="a", compare=False)


@dataclass(frozen=True)
class TApp:
    fn: "Term"
    ty: Type


@dataclass(frozen=True)
class Lam:
    ty: Type
    body: "Term"
    hint: str = field(default="x", compare=False)


@dataclass(frozen=True)
class App:
    fn: "Term"
    arg: "Term"


@dataclass(frozen=True)
class Fix:
    """``fix f(x:dom):cod. body``; inside ``body`` index 0 is ``x`` and 1 is ``f``."""
    dom: Type
    cod: Type
    body: "Term"
    fhint: str = field(default="f", compare=False)
    xhint: str = field(default="x", compare=False)


@dataclass(frozen=True)
class Ref:
    body: "Term"


@dataclass(frozen=True)
class Deref:
    body: "Term"


@dataclass(frozen=True)
class Assign:
    target: "Term"
    value: "Term"


Term = Union[Var, Loc, Unit, Pair, Fst, Snd, Void, Inl, Inr, Case, Fold, Unfold, TLam, TApp,
             Lam, App, Fix, Ref, Deref, Assign]


def is_value(t: Term) -> bool:
    match t:
        case Var() | Loc() | Unit() | TLam() | Lam() | Fix():
            return True
        case Pair(l, r):
            return is_value(l) and is_value(r)
        case Fold(b, _) | Inl(b, _) | Inr(b, _):
            return is_value(b)
    return False


def children(t: Term):
    """Immediate subterms with the number of term binders each sits under."""
    match t:
        case Pair(l, r) | App(l, r) | Assign(l, r):
            return [(l, 0), (r, 0)]
        case Fst(b) | Snd(b) | Unfold(b) | Ref(b) | Deref(b) | TLam(b) | TApp(b, _) \
                | Void(b, _) | Inl(b, _) | Inr(b, _) | Fold(b, _):
            return [(b, 0)]
        case Case(s, l, r):
            return [(s, 0), (l, 1), (r, 1)]
        case Lam(_, b):
            return [(b, 1)]
        case Fix(_, _, b):
            return [(b, 2)]
    return []


def term_map(t: Term, on_var, c: int = 0, on_type=None, tc: int = 0) -> Term:
    """Rebuild ``t``; ``on_var(c, var)`` handles term variables under ``c`` binders
    and ``on_type(tc, ty)`` handles type annotations under ``tc`` type binders."""
    ot = (lambda k, ty: ty) if on_type is None else on_type

    def go(t, c, tc):
        match t:
            case Var():
                return on_var(c, t)
            case Loc() | Unit():
                return t
            case Pair(l, r):
                return Pair(go(l, c, tc), go(r, c, tc))
            case Fst(b):
                return Fst(go(b, c, tc))
            case Snd(b):
                return Snd(go(b, c, tc))
            case Void(b, ty):
                return Void(go(b, c, tc), ot(tc, ty))
            case Inl(b, ty):
                return Inl(go(b, c, tc), ot(tc, ty))
            case Inr(b, ty):
                return Inr(go(b, c, tc), ot(tc, ty))
            case Case(s, l, r, lh, rh):
                return Case(go(s, c, tc), go(l, c + 1, tc), go(r, c + 1, tc), lh, rh)
            case Fold(b, ty):
                return Fold(go(b, c, tc), ot(tc, ty))
            case Unfold(b):
                return Unfold(go(b, c, tc))
            case TLam(b, h):
                return TLam(go(b, c, tc + 1), h)
            case TApp(f, ty):
                return TApp(go(f, c, tc), ot(tc, ty))
            case Lam(ty, b, h):
                return Lam(ot(tc, ty), go(b, c + 1, tc), h)
            case App(f, a):
                return App(go(f, c, tc), go(a, c, tc))
            case Fix(d, r, b, fh, xh):
                return Fix(ot(tc, d), ot(tc, r), go(b, c + 2, tc), fh, xh)
            case Ref(b):
                return Ref(go(b, c, tc))
            case Deref(b):
                return Deref(go(b, c, tc))
            case Assign(l, r):
                return Assign(go(l, c, tc), go(r, c, tc))
        raise TypeError(f"not a term: {t!r}")

    return go(t, c, tc)


def shift(t: Term, d: int, cutoff: int = 0) -> Term:
    return term_map(t, lambda c, v: Var(v.index + d, v.hint) if v.index >= c else v, cutoff)


def subst(body: Term, *args: Term) -> Term:
    """Instantiate the innermost ``len(args)`` binders of ``body``.

    ``args[0]`` replaces index 0, ``args[1]`` index 1, and so on.  The arguments
    are expected to be closed, as they are during evaluation.
    """
    n = len(args)

    def on_var(c, v):
        i = v.index - c
        if 0 <= i < n:
            return shift(args[i], c) if c else args[i]
        if i >= n:
            return Var(v.index - n, v.hint)
        return v

    return term_map(body, on_var)


def subst_type(body: Term, ty: Type) -> Term:
    """Instantiate the innermost type binder of ``body`` with ``ty``."""

    def on_type(tc, t):
        def on_var(c, v):
            k = c + tc
            if v.index == k:
                return ty_shift(ty, k)
            if v.index > k:
                return TyVar(v.index - 1, v.hint)
            return v

        return ty_map(t, on_var)

    return term_map(body, lambda c, v: v, on_type=on_type)


def free_vars(t: Term) -> set[int]:
    out: set[int] = set()

    def on_var(c, v):
        if v.index >= c:
            out.add(v.index - c)
        return v

    term_map(t, on_var)
    return out


def is_closed(t: Term) -> bool:
    return not free_vars(t)


def locations(t: Term) -> set[int]:
    out: set[int] = set()
    stack = [t]
    while stack:
        u = stack.pop()
        if isinstance(u, Loc):
            out.add(u.addr)
        stack.extend(c for c, _ in children(u))
    return out


def size(t: Term) -> int:
    return 1 + sum(size(c) for c, _ in children(t))
