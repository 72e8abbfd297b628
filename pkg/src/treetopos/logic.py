"""Kripke-Joyal forcing for the internal logic of the topos of trees.

Formulas are small immutable trees.  Variables carry the object they range
over, so an environment is just a mapping from variable names to elements.
``force(n, phi, env)`` decides ``n ⊩ phi(env)`` by the usual clauses; the
later modality looks one level down and is vacuously true at level 1.

Guarded recursive predicates (:class:`MuPred`) are solved level by level: the
recursion variable may only occur under :class:`Later`, so level ``k`` of the
solution depends only on levels ``< k``.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass
from typing import Mapping, Union

from .presheaf import (
    STAR,
    GlobalElement,
    Morphism,
    PresheafError,
    Subobject,
    TruncatedPresheaf,
    later_sub,
    product,
    terminal,
)


class FormulaError(ValueError):
    """Ill-scoped formula, unguarded recursion, or a bad forcing level."""


# ----------------------------------------------------------------------------
# Terms


@dataclass(frozen=True)
class Var:
    name: str
    obj: TruncatedPresheaf


@dataclass(frozen=True)
class App:
    """A morphism applied to terms; several arguments are packed as a tuple."""
    mor: Morphism
    args: tuple


@dataclass(frozen=True)
class Pair:
    items: tuple


@dataclass(frozen=True)
class At:
    """The global element of ``obj`` determined by a top-level label."""
    obj: TruncatedPresheaf
    label: object


@dataclass(frozen=True)
class Point:
    element: GlobalElement


@dataclass(frozen=True)
class Next:
    term: "Term"


Term = Union[Var, App, Pair, At, Point, Next]


def term_type(t: Term) -> TruncatedPresheaf:
    from .presheaf import later_obj

    match t:
        case Var(_, obj) | At(obj, _):
            return obj
        case App(mor, _):
            return mor.target
        case Pair(items):
            return product(*(term_type(i) for i in items))
        case Point(el):
            return el.target
        case Next(inner):
            return later_obj(term_type(inner))
    raise FormulaError(f"not a term: {t!r}")


# ----------------------------------------------------------------------------
# Formulas


@dataclass(frozen=True)
class Top:
    pass


@dataclass(frozen=True)
class Bot:
    pass


@dataclass(frozen=True)
class Eq:
    left: Term
    right: Term


@dataclass(frozen=True)
class Rel:
    """``R(t_1, ..., t_k)`` for a subobject, a :class:`MuPred`, or a recursion variable."""
    rel: object
    args: tuple


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Implies:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Exists:
    var: str
    obj: TruncatedPresheaf
    body: "Formula"


@dataclass(frozen=True)
class Forall:
    var: str
    obj: TruncatedPresheaf
    body: "Formula"


@dataclass(frozen=True)
class Later:
    body: "Formula"


@dataclass(frozen=True)
class MuPred:
    """The guarded recursive predicate ``μ name. body`` over the given parameters.

    ``body`` may mention ``Rel(name, ...)`` only beneath :class:`Later`; its
    free variables must be exactly the parameters.
    """
    name: str
    params: tuple
    body: "Formula"

    @property
    def over(self) -> TruncatedPresheaf:
        objs = [obj for _, obj in self.params]
        return objs[0] if len(objs) == 1 else product(*objs)

    @property
    def depth(self) -> int:
        return self.params[0][1].depth


Formula = Union[Top, Bot, Eq, Rel, And, Or, Implies, Exists, Forall, Later]


def Not(phi: Formula) -> Formula:
    return Implies(phi, Bot())


def Iff(a: Formula, b: Formula) -> Formula:
    return And(Implies(a, b), Implies(b, a))


def conj(*parts: Formula) -> Formula:
    if not parts:
        return Top()
    return functools.reduce(And, parts)


def disj(*parts: Formula) -> Formula:
    if not parts:
        return Bot()
    return functools.reduce(Or, parts)


def Holds(t: Term) -> Formula:
    """The proposition ``t = ⊤`` for a term ``t`` of type ``Ω``."""
    from .presheaf import truth

    return Rel(truth(term_type(t).depth), (t,))


# ----------------------------------------------------------------------------
# Scoping


def _term_vars(t: Term, out: dict) -> None:
    match t:
        case Var(name, obj):
            if out.setdefault(name, obj) != obj:
                raise FormulaError(f"variable {name!r} used at two different types")
        case App(_, args) | Pair(args):
            for a in args:
                _term_vars(a, out)
        case Next(inner):
            _term_vars(inner, out)


def free_vars(phi: Formula) -> dict:
    """Free variables of ``phi`` with their objects, in first-occurrence order."""
    out: dict = {}
    _free(phi, out, frozenset())
    return out


def _free(phi, out, bound):
    match phi:
        case Eq(l, r):
            found = {}
            _term_vars(l, found)
            _term_vars(r, found)
            _merge(out, found, bound)
        case Rel(_, args):
            found = {}
            for a in args:
                _term_vars(a, found)
            _merge(out, found, bound)
        case And(l, r) | Or(l, r) | Implies(l, r):
            _free(l, out, bound)
            _free(r, out, bound)
        case Exists(v, _, body) | Forall(v, _, body):
            _free(body, out, bound | {v})
        case Later(body):
            _free(body, out, bound)


def _merge(out, found, bound):
    for name, obj in found.items():
        if name in bound:
            continue
        if out.setdefault(name, obj) != obj:
            raise FormulaError(f"variable {name!r} used at two different types")


def check_formula(phi: Formula, rec: str | None = None) -> None:
    """Validate scoping, binder types, and guardedness of ``rec``.

    Raises :class:`FormulaError` if a bound variable is used at a type other
    than its binder's, or if the recursion variable ``rec`` occurs outside a
    :class:`Later`.
    """
    _check(phi, {}, rec, guarded=False)


def _check(phi, scope, rec, guarded):
    match phi:
        case Top() | Bot():
            return
        case Eq(l, r):
            _check_terms((l, r), scope)
        case Rel(rel, args):
            _check_terms(args, scope)
            if isinstance(rel, str):
                if rel != rec:
                    raise FormulaError(f"unknown recursion variable {rel!r}")
                if not guarded:
                    raise FormulaError(f"recursion variable {rel!r} occurs unguarded")
            elif isinstance(rel, MuPred):
                solve_mu_pred(rel)
            elif not isinstance(rel, Subobject):
                raise FormulaError(f"cannot use {rel!r} as a relation")
        case And(l, r) | Or(l, r) | Implies(l, r):
            _check(l, scope, rec, guarded)
            _check(r, scope, rec, guarded)
        case Exists(v, obj, body) | Forall(v, obj, body):
            _check(body, {**scope, v: obj}, rec, guarded)
        case Later(body):
            _check(body, scope, rec, True)
        case _:
            raise FormulaError(f"not a formula: {phi!r}")


def _check_terms(terms, scope):
    found = {}
    for t in terms:
        _term_vars(t, found)
    for name, obj in found.items():
        if name in scope and scope[name] != obj:
            raise FormulaError(f"variable {name!r} does not match its binder's type")


# ----------------------------------------------------------------------------
# Forcing


def _eval_term(n: int, t: Term, env: Mapping):
    match t:
        case Var(name, _):
            try:
                return env[name][1]
            except KeyError:
                raise FormulaError(f"unbound variable {name!r}") from None
        case App(mor, args):
            vals = [_eval_term(n, a, env) for a in args]
            arg = vals[0] if len(vals) == 1 else tuple(vals)
            try:
                return mor.components[n - 1][arg]
            except KeyError:
                raise FormulaError(f"argument {arg!r} outside the domain of {mor!r}") from None
        case Pair(items):
            return tuple(_eval_term(n, i, env) for i in items)
        case At(obj, label):
            return obj.restrict(label, obj.depth, n)
        case Point(el):
            return el.at(n)
        case Next(inner):
            v = _eval_term(n, inner, env)
            return STAR if n == 1 else term_type(inner).restriction(n - 1)[v]
    raise FormulaError(f"not a term: {t!r}")


def _restrict_env(env: Mapping, n: int, k: int) -> dict:
    if k == n:
        return env
    return {name: (obj, obj.restrict(v, n, k)) for name, (obj, v) in env.items()}


def _force(n: int, phi: Formula, env: Mapping, rels: Mapping) -> bool:
    match phi:
        case Top():
            return True
        case Bot():
            return False
        case Eq(l, r):
            return _eval_term(n, l, env) == _eval_term(n, r, env)
        case Rel(rel, args):
            vals = [_eval_term(n, a, env) for a in args]
            arg = vals[0] if len(vals) == 1 else tuple(vals)
            if isinstance(rel, Subobject):
                return arg in rel.members[n - 1]
            if isinstance(rel, MuPred):
                return arg in solve_mu_pred(rel).members[n - 1]
            partial = rels.get(rel)
            if partial is None or len(partial) < n:
                raise FormulaError(f"recursion variable {rel!r} needed at level {n} "
                                   "before it is defined (unguarded occurrence)")
            return arg in partial[n - 1]
        case And(l, r):
            return _force(n, l, env, rels) and _force(n, r, env, rels)
        case Or(l, r):
            return _force(n, l, env, rels) or _force(n, r, env, rels)
        case Implies(l, r):
            for k in range(1, n + 1):
                sub = _restrict_env(env, n, k)
                if _force(k, l, sub, rels) and not _force(k, r, sub, rels):
                    return False
            return True
        case Exists(v, obj, body):
            return any(_force(n, body, {**env, v: (obj, a)}, rels) for a in obj.level(n))
        case Forall(v, obj, body):
            for k in range(1, n + 1):
                sub = _restrict_env(env, n, k)
                for a in obj.level(k):
                    if not _force(k, body, {**sub, v: (obj, a)}, rels):
                        return False
            return True
        case Later(body):
            if n == 1:
                return True
            return _force(n - 1, body, _restrict_env(env, n, n - 1), rels)
    raise FormulaError(f"not a formula: {phi!r}")


def _formula_depth(phi: Formula, fv: Mapping) -> int | None:
    depths = {obj.depth for obj in fv.values()}
    stack = [phi]
    while stack:
        p = stack.pop()
        match p:
            case And(l, r) | Or(l, r) | Implies(l, r):
                stack += [l, r]
            case Exists(_, obj, body) | Forall(_, obj, body):
                depths.add(obj.depth)
                stack.append(body)
            case Later(body):
                stack.append(body)
            case Rel(rel, _) if isinstance(rel, Subobject):
                depths.add(rel.ambient.depth)
            case Rel(rel, _) if isinstance(rel, MuPred):
                depths.add(rel.depth)
    if len(depths) > 1:
        raise FormulaError(f"formula mixes depths {sorted(depths)}")
    return depths.pop() if depths else None


def force(n: int, phi: Formula, env: Mapping | None = None) -> bool:
    """Decide ``n ⊩ phi`` with free variables bound by ``env`` at level ``n``."""
    env = dict(env or {})
    fv = free_vars(phi)
    depth = _formula_depth(phi, fv)
    if n < 1 or (depth is not None and n > depth):
        raise FormulaError(f"forcing level {n} out of range 1..{depth}")
    typed = {}
    for name, obj in fv.items():
        if name not in env:
            raise FormulaError(f"no value for free variable {name!r}")
        if not obj.contains(n, env[name]):
            raise FormulaError(f"{env[name]!r} is not in level {n} of {name!r}'s object")
        typed[name] = (obj, env[name])
    check_formula(phi)
    return _force(n, phi, typed, {})


def _context_ambient(ctx, depth):
    objs = [obj for _, obj in ctx]
    if not objs:
        if depth is None:
            raise FormulaError("an empty context needs an explicit depth")
        return terminal(depth)
    return objs[0] if len(objs) == 1 else product(*objs)


def _env_of(ctx, el):
    if len(ctx) == 1:
        return {ctx[0][0]: (ctx[0][1], el)}
    return {name: (obj, v) for (name, obj), v in zip(ctx, el)}


def denote(phi: Formula, ctx=(), depth: int | None = None) -> Subobject:
    """Tabulate forcing: the subobject ``{ env | n ⊩ phi(env) }`` of the context.

    ``ctx`` is a sequence of ``(name, object)`` pairs; free variables of
    ``phi`` must be among them.
    """
    ctx = tuple(ctx)
    fv = free_vars(phi)
    names = {name for name, _ in ctx}
    missing = set(fv) - names
    if missing:
        raise FormulaError(f"free variables {sorted(missing)} not in the context")
    check_formula(phi)
    d = _formula_depth(phi, dict(ctx))
    if depth is not None and d is not None and depth != d:
        raise FormulaError(f"depth {depth} does not match the formula's depth {d}")
    ambient = _context_ambient(ctx, depth if d is None else d)
    members = []
    for k in range(1, ambient.depth + 1):
        members.append({el for el in ambient.level(k)
                        if _force(k, phi, {} if not ctx else _env_of(ctx, el), {})})
    return Subobject(ambient, members)


def later_pred(A: Subobject) -> Subobject:
    """``▷A`` on a subobject."""
    return later_sub(A)


# ----------------------------------------------------------------------------
# Guarded recursive predicates


@functools.lru_cache(maxsize=256)
def solve_mu_pred(mu: MuPred) -> Subobject:
    """The unique subobject ``R`` with ``R = body[R/name]``, built level by level."""
    if not mu.params:
        raise FormulaError("a recursive predicate needs at least one parameter")
    fv = free_vars(mu.body)
    params = dict(mu.params)
    for name, obj in fv.items():
        if params.get(name) != obj:
            raise FormulaError(f"free variable {name!r} of the body is not a parameter")
    check_formula(mu.body, rec=mu.name)
    P = mu.over
    members: list = []
    rels = {mu.name: members}
    for k in range(1, P.depth + 1):
        level = {p for p in P.level(k) if _force(k, mu.body, _env_of(mu.params, p), rels)}
        members.append(level)
    return Subobject(P, members)


def unfold_mu(mu: MuPred, R: Subobject) -> Subobject:
    """One application of the body with the recursion variable set to ``R``.

    Used as an independent oracle: iterate from the empty and the maximal
    subobject and compare against :func:`solve_mu_pred`.
    """
    P = mu.over
    rels = {mu.name: [set(m) for m in R.members]}
    return Subobject(P, [{p for p in P.level(k)
                          if _force(k, mu.body, _env_of(mu.params, p), rels)}
                         for k in range(1, P.depth + 1)])


# ----------------------------------------------------------------------------
# Internal contractiveness and the Banach fixed point


def contr_formula(f: Morphism) -> Formula:
    """``∀x,x'. ▷(x = x') → f(x) = f(x')``."""
    X = f.source
    x, y = Var("x", X), Var("x'", X)
    return Forall("x", X, Forall("x'", X, Implies(
        Later(Eq(x, y)), Eq(App(f, (x,)), App(f, (y,))))))


def is_contr_internal(f: Morphism) -> bool:
    return force(f.depth, contr_formula(f))


def banach_fix(f: Morphism) -> GlobalElement:
    """The unique fixed point of an internally contractive endomorphism.

    Every component ``f_i^i`` is constant, so iterating ``depth`` times from
    any global element lands on the fixed point at every level.
    """
    X = f.source
    if f.target != X:
        raise PresheafError("banach_fix expects an endomorphism")
    n = X.depth
    if not X.level(n):
        raise PresheafError("banach_fix needs an object with a global element")
    if not is_contr_internal(f):
        raise PresheafError("banach_fix needs an internally contractive map")
    start = GlobalElement.from_top(X, X.level(n)[0])
    picks = []
    for k in range(1, n + 1):
        x = start.at(k)
        for _ in range(n):
            x = f.components[k - 1][x]
        picks.append(x)
    return GlobalElement(X, picks)


def fixed_points(f: Morphism) -> list[GlobalElement]:
    """Brute force: all global elements ``x`` with ``f ∘ x = x``."""
    X = f.source
    out = []
    for top in X.level(X.depth):
        el = GlobalElement.from_top(X, top)
        if all(f.components[k - 1][el.at(k)] == el.at(k) for k in range(1, X.depth + 1)):
            out.append(el)
    return out


def envs(ctx, k: int):
    """All environments for ``ctx`` at level ``k``."""
    names = [name for name, _ in ctx]
    for vals in itertools.product(*(obj.level(k) for _, obj in ctx)):
        yield dict(zip(names, vals))
