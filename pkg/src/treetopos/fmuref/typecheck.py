"""Syntax-directed typechecker.

Source programs never mention locations, so :func:`typecheck` rejects them
unless a location typing is supplied; the semantic checks in
:mod:`.model` pass one when they need to type values taken from a store.
"""

from __future__ import annotations

from .parser import show, show_type
from .syntax import (
    App, Assign, Case, Deref, Fix, Fold, Fst, Inl, Inr, Lam, Loc, Pair, Ref, Snd, TApp,
    TLam, TyAll, TyArrow, TyMu, TyProd, TyRef, TySum, TyUnit, TyVoid, Unfold, Unit, Var,
    Void, ty_free, ty_shift, ty_subst_top, unroll,
)


class TypeCheckError(TypeError):
    def __init__(self, msg: str, term=None):
        super().__init__(msg)
        self.term = term


def well_formed(ty, ntvars: int) -> bool:
    return all(i < ntvars for i in ty_free(ty))


def typecheck(t, ctx=(), ntvars: int = 0, locs=None):
    """The type of ``t``.

    ``ctx`` lists the types of free term variables, innermost first, and
    ``ntvars`` is the number of type variables in scope.  ``locs`` optionally
    maps locations to their (closed) content types.
    """
    return _tc(t, list(ctx), ntvars, locs)


def _fail(msg, t, ctx):
    try:
        shown = show(t, [f"x{i}" for i in range(len(ctx))])
    except Exception:  # noqa: BLE001 - printing is best effort
        shown = repr(t)
    raise TypeCheckError(f"{msg} in `{shown}`", t)


def _wf(ty, n, t, ctx):
    if not well_formed(ty, n):
        _fail(f"type {show_type(ty)} mentions an unbound type variable", t, ctx)


def _tc(t, ctx, n, locs):
    match t:
        case Var(i):
            if i >= len(ctx):
                _fail("unbound variable", t, ctx)
            return ctx[i]
        case Loc(a):
            if locs is None or a not in locs:
                _fail("locations are not allowed in source programs", t, ctx)
            return TyRef(ty_shift(locs[a], n))
        case Unit():
            return TyUnit()
        case Pair(l, r):
            return TyProd(_tc(l, ctx, n, locs), _tc(r, ctx, n, locs))
        case Fst(b) | Snd(b):
            ty = _tc(b, ctx, n, locs)
            if not isinstance(ty, TyProd):
                _fail(f"expected a product, found {show_type(ty)}", t, ctx)
            return ty.left if isinstance(t, Fst) else ty.right
        case Void(b, ty):
            _wf(ty, n, t, ctx)
            got = _tc(b, ctx, n, locs)
            if got != TyVoid():
                _fail(f"void expects type 0, found {show_type(got)}", t, ctx)
            return ty
        case Inl(b, ty) | Inr(b, ty):
            _wf(ty, n, t, ctx)
            if not isinstance(ty, TySum):
                _fail(f"injection annotated with non-sum type {show_type(ty)}", t, ctx)
            want = ty.left if isinstance(t, Inl) else ty.right
            got = _tc(b, ctx, n, locs)
            if got != want:
                _fail(f"injection expects {show_type(want)}, found {show_type(got)}", t, ctx)
            return ty
        case Case(s, l, r):
            ty = _tc(s, ctx, n, locs)
            if not isinstance(ty, TySum):
                _fail(f"case on non-sum type {show_type(ty)}", t, ctx)
            tl = _tc(l, [ty.left] + ctx, n, locs)
            tr = _tc(r, [ty.right] + ctx, n, locs)
            if tl != tr:
                _fail(f"case branches disagree: {show_type(tl)} vs {show_type(tr)}", t, ctx)
            return tl
        case Fold(b, ty):
            _wf(ty, n, t, ctx)
            if not isinstance(ty, TyMu):
                _fail(f"fold annotated with non-recursive type {show_type(ty)}", t, ctx)
            want = unroll(ty)
            got = _tc(b, ctx, n, locs)
            if got != want:
                _fail(f"fold expects {show_type(want)}, found {show_type(got)}", t, ctx)
            return ty
        case Unfold(b):
            ty = _tc(b, ctx, n, locs)
            if not isinstance(ty, TyMu):
                _fail(f"unfold of non-recursive type {show_type(ty)}", t, ctx)
            return unroll(ty)
        case TLam(b):
            # Term variables in ctx are shifted to live under the new type binder.
            body = _tc(b, [ty_shift(c, 1) for c in ctx], n + 1, locs)
            return TyAll(body, t.hint)
        case TApp(f, ty):
            _wf(ty, n, t, ctx)
            fty = _tc(f, ctx, n, locs)
            if not isinstance(fty, TyAll):
                _fail(f"type application of non-polymorphic {show_type(fty)}", t, ctx)
            return ty_subst_top(fty.body, ty)
        case Lam(ty, b):
            _wf(ty, n, t, ctx)
            return TyArrow(ty, _tc(b, [ty] + ctx, n, locs))
        case App(f, a):
            fty = _tc(f, ctx, n, locs)
            if not isinstance(fty, TyArrow):
                _fail(f"application of non-function {show_type(fty)}", t, ctx)
            aty = _tc(a, ctx, n, locs)
            if aty != fty.dom:
                _fail(f"argument has type {show_type(aty)}, expected {show_type(fty.dom)}",
                      t, ctx)
            return fty.cod
        case Fix(d, c, b):
            _wf(d, n, t, ctx)
            _wf(c, n, t, ctx)
            fty = TyArrow(d, c)
            got = _tc(b, [d, fty] + ctx, n, locs)
            if got != c:
                _fail(f"fix body has type {show_type(got)}, expected {show_type(c)}", t, ctx)
            return fty
        case Ref(b):
            return TyRef(_tc(b, ctx, n, locs))
        case Deref(b):
            ty = _tc(b, ctx, n, locs)
            if not isinstance(ty, TyRef):
                _fail(f"dereference of non-reference {show_type(ty)}", t, ctx)
            return ty.body
        case Assign(l, r):
            lt = _tc(l, ctx, n, locs)
            if not isinstance(lt, TyRef):
                _fail(f"assignment to non-reference {show_type(lt)}", t, ctx)
            rt = _tc(r, ctx, n, locs)
            if rt != lt.body:
                _fail(f"assigned value has type {show_type(rt)}, expected {show_type(lt.body)}",
                      t, ctx)
            return TyUnit()
    raise TypeCheckError(f"not a term: {t!r}", t)
