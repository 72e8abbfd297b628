"""Guarded recursive domain equations.

Type expressions are built from constants, ``Ω``, products, sums, function
spaces and the later functor.  A recursive type ``μX. F(X, X)`` is solved by
iterating ``X_{i+1} = F(X_i, X_i)`` from the terminal object: when every
occurrence of ``X`` sits under ``▶``, level ``k`` of ``F(X, X)`` depends only on
levels ``< k`` of ``X``, so after ``depth`` iterations the approximant is a
fixed point on the nose and fold/unfold are identities.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from typing import Mapping, Union

from . import presheaf as ps
from .presheaf import Morphism, TruncatedPresheaf
from .sexpr import Symbol, dump, head, parse


class TypeExprError(ValueError):
    """Raised for unguarded recursion, variance mismatches or unbound variables."""


@dataclass(frozen=True)
class TUnit:
    pass


@dataclass(frozen=True)
class TConst:
    elems: tuple


@dataclass(frozen=True)
class TOmega:
    pass


@dataclass(frozen=True)
class TVar:
    name: str


@dataclass(frozen=True)
class TProd:
    left: "TypeExpr"
    right: "TypeExpr"


@dataclass(frozen=True)
class TSum:
    left: "TypeExpr"
    right: "TypeExpr"


@dataclass(frozen=True)
class TArrow:
    dom: "TypeExpr"
    cod: "TypeExpr"


@dataclass(frozen=True)
class TLater:
    body: "TypeExpr"


@dataclass(frozen=True)
class TMu:
    name: str
    body: "TypeExpr"


TypeExpr = Union[TUnit, TConst, TOmega, TVar, TProd, TSum, TArrow, TLater, TMu]


# ----------------------------------------------------------------------------
# Variance and guardedness


@dataclass
class Occurrences:
    positive: int = 0
    negative: int = 0
    unguarded: int = 0

    @property
    def variance(self) -> str:
        if self.positive and self.negative:
            return "mixed"
        if self.negative:
            return "negative"
        if self.positive:
            return "positive"
        return "absent"


def occurrences(e: TypeExpr, var: str) -> Occurrences:
    """Count free occurrences of ``var`` by polarity and guardedness."""
    occ = Occurrences()

    def walk(e, pol, guarded):
        match e:
            case TVar(name) if name == var:
                if pol > 0:
                    occ.positive += 1
                else:
                    occ.negative += 1
                if not guarded:
                    occ.unguarded += 1
            case TProd(l, r) | TSum(l, r):
                walk(l, pol, guarded)
                walk(r, pol, guarded)
            case TArrow(d, c):
                walk(d, -pol, guarded)
                walk(c, pol, guarded)
            case TLater(body):
                walk(body, pol, True)
            case TMu(name, body) if name != var:
                walk(body, pol, guarded)

    walk(e, 1, False)
    return occ


def free_type_vars(e: TypeExpr) -> set[str]:
    match e:
        case TVar(name):
            return {name}
        case TProd(l, r) | TSum(l, r) | TArrow(l, r):
            return free_type_vars(l) | free_type_vars(r)
        case TLater(body):
            return free_type_vars(body)
        case TMu(name, body):
            return free_type_vars(body) - {name}
    return set()


def check_guarded(e: TypeExpr) -> dict[str, Occurrences]:
    """Variance report for every variable; raises on an unguarded ``μ`` variable.

    The report maps each free variable and each ``μ``-bound variable to its
    occurrence counts within its scope.
    """
    report: dict[str, Occurrences] = {}
    for name in sorted(free_type_vars(e)):
        report[name] = occurrences(e, name)

    def walk(e):
        match e:
            case TMu(name, body):
                occ = occurrences(body, name)
                if occ.unguarded:
                    raise TypeExprError(
                        f"μ{name}: {occ.unguarded} occurrence(s) of {name} not under ▶")
                report[name] = occ
                walk(body)
            case TProd(l, r) | TSum(l, r) | TArrow(l, r):
                walk(l)
                walk(r)
            case TLater(body):
                walk(body)
            case TConst(elems):
                if len(set(elems)) != len(elems):
                    raise TypeExprError("duplicate elements in a constant set")

    walk(e)
    return report


# ----------------------------------------------------------------------------
# Evaluation


@dataclass(frozen=True)
class SolvedType:
    """A solution ``X ≅ F(X, X)`` with its fold and unfold isomorphisms."""
    expr: TMu
    object: TruncatedPresheaf
    fold: Morphism
    unfold: Morphism
    approximants: tuple = field(default=(), repr=False, compare=False)

    def to_json(self) -> dict:
        return {
            "type": dump(to_sexpr(self.expr)),
            "sizes": list(self.object.sizes()),
            "object": self.object.to_json(),
            "fold": self.fold.to_json(),
            "unfold": self.unfold.to_json(),
        }


def _env_key(env: Mapping) -> tuple:
    return tuple(sorted(env.items(), key=lambda kv: kv[0]))


def eval_type(e: TypeExpr, env: Mapping[str, TruncatedPresheaf] | None = None,
              depth: int = 1, cap: int | None = None) -> TruncatedPresheaf:
    """Interpret a type expression as a truncated presheaf of the given depth."""
    check_guarded(e)
    return _eval(e, _env_key(env or {}), depth, cap)


@functools.lru_cache(maxsize=512)
def _eval(e, env_key, depth, cap):
    env = dict(env_key)
    match e:
        case TUnit():
            return ps.terminal(depth)
        case TConst(elems):
            return ps.constant(depth, elems)
        case TOmega():
            return ps.omega(depth)
        case TVar(name):
            try:
                X = env[name]
            except KeyError:
                raise TypeExprError(f"unbound type variable {name!r}") from None
            if X.depth != depth:
                raise TypeExprError(f"{name} has depth {X.depth}, expected {depth}")
            return X
        case TProd(l, r):
            return ps.product(_eval(l, env_key, depth, cap), _eval(r, env_key, depth, cap))
        case TSum(l, r):
            return ps.coproduct(_eval(l, env_key, depth, cap), _eval(r, env_key, depth, cap))
        case TArrow(d, c):
            return ps.exponential(_eval(d, env_key, depth, cap), _eval(c, env_key, depth, cap),
                                  cap)
        case TLater(body):
            return ps.later_obj(_eval(body, env_key, depth, cap))
        case TMu():
            return _solve(e, env_key, depth, cap, None).object
    raise TypeExprError(f"not a type expression: {e!r}")


def approximants(mu: TMu, env: Mapping | None = None, depth: int = 1,
                 seed: TruncatedPresheaf | None = None, steps: int | None = None,
                 cap: int | None = None) -> list[TruncatedPresheaf]:
    """``[X_0, X_1, ...]`` with ``X_0 = seed`` (default terminal) and ``X_{i+1} = F(X_i, X_i)``."""
    check_guarded(mu)
    env = dict(env or {})
    X = ps.terminal(depth) if seed is None else seed
    out = [X]
    for _ in range(depth if steps is None else steps):
        X = _eval(mu.body, _env_key({**env, mu.name: X}), depth, cap)
        out.append(X)
    return out


def solve(mu: TMu, env: Mapping | None = None, depth: int = 1,
          seed: TruncatedPresheaf | None = None, cap: int | None = None) -> SolvedType:
    """Solve ``X ≅ F(X, X)`` at the given depth."""
    if not isinstance(mu, TMu):
        raise TypeExprError("solve expects a μ-type")
    check_guarded(mu)
    return _solve(mu, _env_key(env or {}), depth, cap, seed)


def _solve(mu, env_key, depth, cap, seed):
    env = dict(env_key)
    if seed is not None and seed.depth != depth:
        raise TypeExprError("seed depth differs from the requested depth")
    chain = approximants(mu, env, depth, seed=seed, cap=cap)
    X = chain[-1]
    FX = _eval(mu.body, _env_key({**env, mu.name: X}), depth, cap)
    if FX == X:
        fold = ps.identity(X)
    else:
        fold = ps.find_iso(FX, X)
        if fold is None:
            raise TypeExprError("iteration did not stabilise; is the equation guarded?")
    unfold = Morphism(X, FX, [{y: x for x, y in c.items()} for c in fold.components])
    return SolvedType(mu, X, fold, unfold, tuple(chain))


# ----------------------------------------------------------------------------
# Functorial action


def functor_action(e: TypeExpr, var: str, f_neg: Morphism | None, f_pos: Morphism | None,
                   env: Mapping | None = None, cap: int | None = None) -> Morphism:
    """Mixed-variance action ``F(f_neg, f_pos) : F(N, P) -> F(N', P')``.

    ``f_neg : N' -> N`` acts on negative occurrences of ``var`` and
    ``f_pos : P -> P'`` on positive ones.  Function spaces pre- and
    post-compose, ``▶`` uses :func:`later_mor`, everything else acts
    componentwise or as the identity.
    """
    occ = occurrences(e, var)
    if occ.negative and f_neg is None:
        raise TypeExprError(f"{var} occurs negatively; f_neg is required")
    if occ.positive and f_pos is None:
        raise TypeExprError(f"{var} occurs positively; f_pos is required")
    given = [f for f in (f_neg, f_pos) if f is not None]
    depth = given[0].depth if given else None
    if depth is None:
        raise TypeExprError("functor_action needs at least one morphism")
    env = dict(env or {})
    N = f_neg.target if f_neg else None
    N1 = f_neg.source if f_neg else None
    P = f_pos.source if f_pos else None
    P1 = f_pos.target if f_pos else None

    def obj(e, pol, neg, pos):
        # Evaluate with var split by global polarity.
        match e:
            case TVar(name) if name == var:
                return pos if pol > 0 else neg
            case TProd(l, r):
                return ps.product(obj(l, pol, neg, pos), obj(r, pol, neg, pos))
            case TSum(l, r):
                return ps.coproduct(obj(l, pol, neg, pos), obj(r, pol, neg, pos))
            case TArrow(d, c):
                return ps.exponential(obj(d, -pol, neg, pos), obj(c, pol, neg, pos), cap)
            case TLater(body):
                return ps.later_obj(obj(body, pol, neg, pos))
            case TMu(name, _) if name != var and var in free_type_vars(e):
                raise TypeExprError("functor action through a nested μ is not supported")
        return _eval(e, _env_key(env), depth, cap)

    def act(e, pol):
        # pol > 0: src -> tgt; pol < 0: tgt -> src.
        match e:
            case TVar(name) if name == var:
                return f_pos if pol > 0 else f_neg
            case TProd(l, r):
                return ps.product_map(act(l, pol), act(r, pol))
            case TSum(l, r):
                return _sum_map(act(l, pol), act(r, pol))
            case TArrow(d, c):
                return _exp_map(act(d, -pol), act(c, pol), cap)
            case TLater(body):
                return ps.later_mor(act(body, pol))
        src = obj(e, pol, N, P) if pol > 0 else obj(e, pol, N1, P1)
        return ps.identity(src)

    return act(e, 1)


def _sum_map(f: Morphism, g: Morphism) -> Morphism:
    S = ps.coproduct(f.source, g.source)
    T = ps.coproduct(f.target, g.target)

    def h(k, t):
        tag, v = t
        return (tag, (f if tag == "inl" else g).components[k - 1][v])

    return ps.from_function(S, T, h)


def _exp_map(pre: Morphism, post: Morphism, cap=None) -> Morphism:
    """``h ↦ post ∘ h ∘ pre`` between exponentials ``B^A -> B'^A'``.

    ``pre : A' -> A`` and ``post : B -> B'``.
    """
    A1, A = pre.source, pre.target
    B, B1 = post.source, post.target
    S = ps.exponential(A, B, cap)
    T = ps.exponential(A1, B1, cap)

    def h(k, fn):
        return tuple(
            tuple(post.components[i - 1][fn[i - 1][A.index(i, pre.components[i - 1][a])]]
                  for a in A1.level(i))
            for i in range(1, k + 1))

    return ps.from_function(S, T, h)


n_iso_rank = ps.n_iso_rank


# ----------------------------------------------------------------------------
# Concrete syntax


def from_sexpr(form) -> TypeExpr:
    """Build a type expression from an s-expression form."""
    if isinstance(form, Symbol):
        name = str(form)
        if name in ("unit", "1"):
            return TUnit()
        if name == "omega":
            return TOmega()
        return TVar(name)
    op = head(form)
    args = form[1:] if isinstance(form, list) else None
    if op == "const":
        if len(args) == 1 and str(args[0]).isdigit():
            return TConst(tuple(range(int(args[0]))))
        return TConst(tuple(str(a) for a in args))
    if op in ("prod", "pair", "product", "*"):
        return _fold_binary(TProd, args)
    if op in ("sum", "+", "coproduct"):
        return _fold_binary(TSum, args)
    if op in ("arrow", "->"):
        if len(args) != 2:
            raise TypeExprError("arrow takes two arguments")
        return TArrow(from_sexpr(args[0]), from_sexpr(args[1]))
    if op == "later":
        if len(args) != 1:
            raise TypeExprError("later takes one argument")
        return TLater(from_sexpr(args[0]))
    if op == "mu":
        if len(args) != 2 or not isinstance(args[0], Symbol):
            raise TypeExprError("mu takes a variable and a body")
        return TMu(str(args[0]), from_sexpr(args[1]))
    raise TypeExprError(f"unknown type form {dump(form)}")


def _fold_binary(cls, args):
    if len(args) < 2:
        raise TypeExprError(f"{cls.__name__} needs at least two arguments")
    parts = [from_sexpr(a) for a in args]
    out = parts[-1]
    for p in reversed(parts[:-1]):
        out = cls(p, out)
    return out


def parse_type(text: str) -> TypeExpr:
    return from_sexpr(parse(text))


def to_sexpr(e: TypeExpr):
    match e:
        case TUnit():
            return Symbol("unit")
        case TOmega():
            return Symbol("omega")
        case TConst(elems):
            if elems == tuple(range(len(elems))) and elems:
                return [Symbol("const"), Symbol(str(len(elems)))]
            return [Symbol("const")] + [Symbol(str(x)) for x in elems]
        case TVar(name):
            return Symbol(name)
        case TProd(l, r):
            return [Symbol("prod"), to_sexpr(l), to_sexpr(r)]
        case TSum(l, r):
            return [Symbol("sum"), to_sexpr(l), to_sexpr(r)]
        case TArrow(d, c):
            return [Symbol("arrow"), to_sexpr(d), to_sexpr(c)]
        case TLater(body):
            return [Symbol("later"), to_sexpr(body)]
        case TMu(name, body):
            return [Symbol("mu"), Symbol(name), to_sexpr(body)]
    raise TypeExprError(f"not a type expression: {e!r}")
