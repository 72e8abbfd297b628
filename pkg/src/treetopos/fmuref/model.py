"""Bounded checks for the step-indexed Kripke model of types.

A world maps locations to closed syntactic types; a reference cell of type
``τ`` is then interpreted by "later ``⟦τ⟧``", which is exactly what the
reference clause of the model needs.  Membership ``v ∈ ⟦τ⟧(w)`` at index ``n``
is decided by recursion on ``(n, τ)``.  The clauses for functions and
polymorphic values quantify over all values, worlds and types; here they
range over a finite :class:`Pool`, so a positive answer is only as strong as
the pool.  Refutations are always backed by concrete witnesses whose own
membership was established without pool assumptions.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass

from .parser import show, show_type
from .semantics import Config, Outcome, Store, step
from .syntax import (
    App, Fix, Fold, Inl, Inr, Lam, Loc, Pair, TLam, TyAll, TyArrow, TyMu, TyProd, TyRef,
    TySum, TyUnit, TyVar, TyVoid, Unit, Var, is_value, subst, subst_type, ty_free, ty_subst_top,
    unroll,
)
from .typecheck import TypeCheckError, typecheck


@dataclass(frozen=True)
class Verdict:
    """``holds`` (``exact`` when no pool assumption was used), ``refuted`` or ``unknown``."""
    status: str
    exact: bool = True
    witness: str | None = None

    @property
    def holds(self) -> bool:
        return self.status == "holds"

    @property
    def refuted(self) -> bool:
        return self.status == "refuted"

    @property
    def unknown(self) -> bool:
        return self.status == "unknown"

    def __str__(self):
        if self.holds:
            return "holds" if self.exact else "holds (relative to the pool)"
        if self.refuted:
            return f"refuted: {self.witness}"
        return "unknown" + (f": {self.witness}" if self.witness else "")


HOLDS = Verdict("holds")
HOLDS_POOL = Verdict("holds", exact=False)


def refuted(why: str) -> Verdict:
    return Verdict("refuted", witness=why)


def unknown(why: str | None = None) -> Verdict:
    return Verdict("unknown", exact=False, witness=why)


def both(a: Verdict, b: Verdict) -> Verdict:
    if a.refuted:
        return a
    if b.refuted:
        return b
    if a.unknown:
        return a
    if b.unknown:
        return b
    return HOLDS if a.exact and b.exact else HOLDS_POOL


def implies(premise: Verdict, conclusion: Verdict, what: str) -> Verdict:
    """One instance of a universally quantified implication."""
    if premise.refuted or conclusion.holds:
        return HOLDS if premise.refuted or conclusion.exact else HOLDS_POOL
    if premise.holds and premise.exact and conclusion.refuted:
        return refuted(f"{what}: {conclusion.witness}")
    return unknown(f"{what}: premise not settled exactly")


def forall(instances) -> Verdict:
    """Conjunction over pool instances; positive answers are pool-relative."""
    worst = HOLDS_POOL
    for v in instances:
        if v.refuted:
            return v
        if v.unknown:
            worst = v
    return worst


# ----------------------------------------------------------------------------
# Worlds and pools


@dataclass(frozen=True)
class SynWorld:
    """Finite map from locations to closed types."""
    cells: tuple = ()

    @classmethod
    def of(cls, mapping) -> "SynWorld":
        for ty in dict(mapping).values():
            if ty_free(ty):
                raise ValueError("world types must be closed")
        return cls(tuple(sorted(dict(mapping).items())))

    def as_dict(self) -> dict:
        return dict(self.cells)

    def dom(self) -> frozenset:
        return frozenset(l for l, _ in self.cells)

    def __getitem__(self, loc):
        return self.as_dict()[loc]

    def __contains__(self, loc):
        return loc in self.dom()

    def extends(self, other: "SynWorld") -> bool:
        """``self ≥ other``: graph inclusion."""
        mine = self.as_dict()
        return all(l in mine and mine[l] == ty for l, ty in other.cells)

    def __str__(self):
        return "{" + ", ".join(f"#{l}: {show_type(t)}" for l, t in self.cells) + "}"


@dataclass(frozen=True)
class Pool:
    """Candidate values, worlds, types and stores for the universal clauses."""
    values: tuple = ()
    worlds: tuple = ()
    types: tuple = (TyUnit(),)
    stores: tuple = ()

    def worlds_above(self, w: SynWorld):
        seen = [w]
        for w1 in self.worlds:
            if w1 != w and w1.extends(w):
                seen.append(w1)
        return seen

    def stores_for(self, w: SynWorld):
        out = [s for s in self.stores if s.dom() == w.dom()]
        auto = canonical_store(w)
        if auto is not None and auto not in out:
            out.append(auto)
        return out


def default_pool() -> Pool:
    """Small pool used by the command line and the tests' defaults."""
    from .parser import parse_program

    vals = tuple(parse_program(src) for src in (
        "()", "((), ())", "inl[1 + 1] ()", "inr[1 + 1] ()", r"\x:1. x",
        r"/\a. \x:a. x",
    ))
    return Pool(values=vals, types=(TyUnit(), TyArrow(TyUnit(), TyUnit())))


# ----------------------------------------------------------------------------
# Canonical inhabitants


def _diverge(ty):
    """A closed term of type ``ty`` that loops forever."""
    return App(Fix(TyUnit(), ty, App(Var(1, "f"), Var(0, "x"))), Unit())


def inhabitant(ty, w: SynWorld, fuel: int = 6):
    """Some closed value of type ``ty`` in world ``w``, or ``None``."""
    if fuel == 0:
        return None
    match ty:
        case TyUnit():
            return Unit()
        case TyVoid():
            return None
        case TyProd(l, r):
            a, b = inhabitant(l, w, fuel - 1), inhabitant(r, w, fuel - 1)
            return None if a is None or b is None else Pair(a, b)
        case TySum(l, r):
            a = inhabitant(l, w, fuel - 1)
            if a is not None:
                return Inl(a, ty)
            b = inhabitant(r, w, fuel - 1)
            return None if b is None else Inr(b, ty)
        case TyArrow(d, c):
            return Lam(d, _diverge(c))
        case TyAll(b):
            return TLam(_diverge(b))
        case TyMu():
            v = inhabitant(unroll(ty), w, fuel - 1)
            return None if v is None else Fold(v, ty)
        case TyRef(b):
            for l, t in w.cells:
                if t == b:
                    return Loc(l)
            return None
    return None


def canonical_store(w: SynWorld):
    cells = {}
    for l, ty in w.cells:
        v = inhabitant(ty, w)
        if v is None:
            return None
        cells[l] = v
    return Store.of(cells)


def value_type(v, w: SynWorld):
    """Syntactic type of a closed value under the location typing ``w``."""
    try:
        return typecheck(v, locs=w.as_dict())
    except TypeCheckError:
        return None


# ----------------------------------------------------------------------------
# Membership


def member_check(v, ty, w: SynWorld, n: int, pool: Pool | None = None) -> Verdict:
    """Decide ``v ∈ ⟦ty⟧(w)`` at index ``n`` relative to ``pool``."""
    if n < 1:
        raise ValueError("the index must be at least 1")
    if ty_free(ty):
        raise ValueError("member_check expects a closed type")
    if not is_value(v):
        raise ValueError(f"{show(v)} is not a value")
    return _member(v, ty, w, n, pool or Pool())


def states_check(s: Store, w: SynWorld, n: int, pool: Pool | None = None) -> Verdict:
    """Decide ``s ∈ states(w)`` at index ``n``."""
    return _states(s, w, n, pool or Pool())


@functools.lru_cache(maxsize=200_000)
def _member(v, ty, w, n, pool) -> Verdict:
    match ty:
        case TyUnit():
            return HOLDS if isinstance(v, Unit) else refuted(f"{show(v)} is not ()")
        case TyVoid():
            return refuted("the empty type has no members")
        case TyProd(l, r):
            if not isinstance(v, Pair):
                return refuted(f"{show(v)} is not a pair")
            return both(_member(v.left, l, w, n, pool), _member(v.right, r, w, n, pool))
        case TySum(l, r):
            if isinstance(v, Inl):
                return _member(v.body, l, w, n, pool)
            if isinstance(v, Inr):
                return _member(v.body, r, w, n, pool)
            return refuted(f"{show(v)} is not an injection")
        case TyMu():
            if not isinstance(v, Fold):
                return refuted(f"{show(v)} is not folded")
            if n == 1:
                return HOLDS
            return _member(v.body, unroll(ty), w, n - 1, pool)
        case TyRef(body):
            return _member_ref(v, body, w, n, pool)
        case TyArrow(dom, cod):
            return _member_fun(v, dom, cod, w, n, pool)
        case TyAll(body):
            return _member_all(v, body, w, n, pool)
        case TyVar():
            raise ValueError("open type in member_check")
    raise ValueError(f"not a type: {ty!r}")


def _member_ref(v, body, w, n, pool):
    if not isinstance(v, Loc):
        return refuted(f"{show(v)} is not a location")
    if v.addr not in w:
        return refuted(f"#{v.addr} is not in the world")
    stored = w[v.addr]
    if stored == body or n == 1:
        return HOLDS
    # The two interpretations must agree below index n; look for a separating value.
    for w1 in pool.worlds_above(w):
        for u in pool.values:
            for k in range(1, n):
                a = _member(u, stored, w1, k, pool)
                b = _member(u, body, w1, k, pool)
                if (a.holds and a.exact and b.refuted) or (b.holds and b.exact and a.refuted):
                    return refuted(f"#{v.addr} stores {show_type(stored)}, which differs from "
                                   f"{show_type(body)} on {show(u)} at index {k}")
    return unknown(f"cannot compare {show_type(stored)} with {show_type(body)}")


def _member_fun(v, dom, cod, w, n, pool):
    if isinstance(v, Lam):
        instantiate = lambda a: subst(v.body, a)  # noqa: E731
    elif isinstance(v, Fix):
        instantiate = lambda a: subst(v.body, a, v)  # noqa: E731
    else:
        return refuted(f"{show(v)} is not a function")

    def instances():
        for w1 in pool.worlds_above(w):
            for a in _candidates(dom, w1, pool):
                for k in range(1, n + 1):
                    prem = _member(a, dom, w1, k, pool)
                    if prem.refuted:
                        continue
                    concl = comp_check(instantiate(a), cod, w1, k, pool)
                    yield implies(prem, concl, f"argument {show(a)} in world {w1} at index {k}")

    return forall(instances())


def _member_all(v, body, w, n, pool):
    if not isinstance(v, TLam):
        return refuted(f"{show(v)} is not a type abstraction")

    def instances():
        for w1 in pool.worlds_above(w):
            for sigma in pool.types:
                t = subst_type(v.body, sigma)
                inst = ty_subst_top(body, sigma)
                for k in range(1, n + 1):
                    concl = comp_check(t, inst, w1, k, pool)
                    yield implies(HOLDS, concl,
                                  f"instance {show_type(sigma)} in world {w1} at index {k}")

    return forall(instances())


def _candidates(ty, w, pool):
    out = list(pool.values)
    extra = inhabitant(ty, w)
    if extra is not None and extra not in out:
        out.append(extra)
    return out


@functools.lru_cache(maxsize=200_000)
def _states(s, w, n, pool) -> Verdict:
    if s.dom() != w.dom():
        return refuted(f"store domain {sorted(s.dom())} differs from world domain "
                       f"{sorted(w.dom())}")
    out = HOLDS
    if n == 1:
        return out
    for l, ty in w.cells:
        r = _member(s.get(l), ty, w, n - 1, pool)
        if r.refuted:
            return refuted(f"#{l}: {r.witness}")
        out = both(out, r)
    return out


# ----------------------------------------------------------------------------
# Computations


def comp_check(t, ty, w: SynWorld, n: int, pool: Pool) -> Verdict:
    """``t ∈ comp(⟦ty⟧)(w)`` at index ``n``: safe from every store in ``states(w)``,
    and any value reached lies in ``⟦ty⟧(w1)`` for some ``w1 ≥ w`` matching the
    final store."""
    results = []
    for s in pool.stores_for(w):
        for k in range(1, n + 1):
            prem = _states(s, w, k, pool)
            if prem.refuted:
                continue
            concl = _eval_tri(k, t, s, ty, w, pool)
            results.append(implies(prem, concl, f"store {s} at index {k}"))
    return forall(results)


def _eval_tri(n, t, s, ty, w, pool) -> Verdict:
    c = Config(t, s)
    k = n
    while True:
        if is_value(c.term):
            return _post(c.term, c.store, ty, w, k, pool)
        nxt = step(c)
        if nxt is Outcome.STUCK:
            return refuted(f"{show(c.term)} is stuck after {n - k} step(s)")
        if k == 1 or nxt == c:
            return HOLDS
        c, k = nxt, k - 1


def _post(v, s1, ty, w, k, pool) -> Verdict:
    """``∃ w1 ≥ w. v ∈ ⟦ty⟧(w1) ∧ s1 ∈ states(w1)``."""
    if not w.dom() <= s1.dom():
        return refuted("the final store lost locations of the world")
    fresh = sorted(s1.dom() - w.dom())
    if not fresh:
        return both(_member(v, ty, w, k, pool), _states(s1, w, k, pool))
    candidates = [w1 for w1 in pool.worlds if w1.dom() == s1.dom() and w1.extends(w)]
    guessed = _guess_world(s1, w, fresh)
    if guessed is not None and guessed not in candidates:
        candidates.append(guessed)
    for w1 in candidates:
        r = both(_member(v, ty, w1, k, pool), _states(s1, w1, k, pool))
        if r.holds:
            return r
    return unknown("no world in the pool explains the final store")


def _guess_world(s1, w, fresh):
    cells = w.as_dict()
    pending = list(fresh)
    # Stored values may refer to each other; type them in passes.
    for _ in range(len(fresh) + 1):
        still = []
        for l in pending:
            ty = value_type(s1.get(l), SynWorld.of(cells))
            if ty is None or ty_free(ty):
                still.append(l)
            else:
                cells[l] = ty
        if not still:
            return SynWorld.of(cells)
        if len(still) == len(pending):
            return None
        pending = still
    return None


def value_members(ty, w: SynWorld, n: int, pool: Pool):
    """Pool values (and a canonical inhabitant) that are exact members."""
    for v in _candidates(ty, w, pool):
        r = _member(v, ty, w, n, pool)
        if r.holds and r.exact:
            yield v


def pool_from(values=(), worlds=(), types=(TyUnit(),), stores=()) -> Pool:
    return Pool(tuple(values), tuple(worlds), tuple(types), tuple(stores))


def all_stores(w: SynWorld, values, limit: int = 64):
    """Stores with domain ``dom(w)`` built from ``values`` (at most ``limit``)."""
    locs = [l for l, _ in w.cells]
    return list(itertools.islice(
        (Store.of(dict(zip(locs, combo))) for combo in itertools.product(values, repeat=len(locs))),
        limit))
