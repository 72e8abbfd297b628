"""Seeded random generators shared by the tests."""

from __future__ import annotations

import itertools
import random

from treetopos import domain, logic
from treetopos import presheaf as ps
from treetopos.metric import BisectedSpace


def random_presheaf(rng: random.Random, depth: int, max_size: int = 3, total: bool = False,
                    inhabited: bool = False) -> ps.TruncatedPresheaf:
    """A random levelled forest; labels are ``"k.i"`` strings."""
    while True:
        sizes = [rng.randint(1 if (total or inhabited) else 0, max_size)]
        parents = []
        for k in range(1, depth):
            prev = sizes[-1]
            if prev == 0:
                sizes.append(0)
                parents.append([])
                continue
            lo = prev if total else (1 if inhabited else 0)
            n = rng.randint(lo, max(lo, max_size))
            ps_ = list(range(prev)) if total else []
            ps_ += [rng.randrange(prev) for _ in range(n - len(ps_))]
            rng.shuffle(ps_)
            sizes.append(n)
            parents.append(ps_)
        if inhabited and sizes[-1] == 0:
            continue
        levels = [[f"{k + 1}.{i}" for i in range(s)] for k, s in enumerate(sizes)]
        rs = [{levels[k + 1][i]: levels[k][p] for i, p in enumerate(parents[k])}
              for k in range(depth - 1)]
        return ps.TruncatedPresheaf(levels, rs)


def random_morphism(rng: random.Random, X, Y, tries: int = 20):
    """A random natural transformation ``X -> Y`` or ``None``."""
    for _ in range(tries):
        comps = []
        ok = True
        for k in range(1, X.depth + 1):
            comp = {}
            for x in X.level(k):
                if k == 1:
                    options = Y.level(1)
                else:
                    options = Y.fiber(k - 1, comps[-1][X.restriction(k - 1)[x]])
                if not options:
                    ok = False
                    break
                comp[x] = rng.choice(options)
            if not ok:
                break
            comps.append(comp)
        if ok:
            return ps.Morphism(X, Y, comps)
    return None


def random_subobject(rng: random.Random, X, p: float = 0.5) -> ps.Subobject:
    members = []
    for k in range(1, X.depth + 1):
        allowed = X.level(k) if k == 1 else [x for x in X.level(k)
                                            if X.restriction(k - 1)[x] in members[-1]]
        members.append({x for x in allowed if rng.random() < p})
    return ps.Subobject(X, members)


def all_presheaves(depth: int, max_size: int):
    """Every presheaf with level sizes ``<= max_size`` (labels ``"k.i"``)."""
    def grow(levels, rs):
        if len(levels) == depth:
            yield ps.TruncatedPresheaf(levels, rs)
            return
        prev = levels[-1]
        for n in range(0, max_size + 1 if prev else 1):
            lvl = [f"{len(levels) + 1}.{i}" for i in range(n)]
            for parents in itertools.product(prev, repeat=n):
                if list(parents) != sorted(parents, key=prev.index):
                    continue  # one representative per multiset of parents
                yield from grow(levels + [lvl], rs + [dict(zip(lvl, parents))])

    for n1 in range(max_size + 1):
        yield from grow([[f"1.{i}" for i in range(n1)]], [])


# ----------------------------------------------------------------------------
# Formulas


def random_formula(rng, ctx, objects, size: int = 4):
    """A random formula whose free variables are among ``ctx`` (name, object) pairs."""
    if size <= 1 or rng.random() < 0.2:
        return random_atom(rng, ctx)
    pick = rng.random()
    if pick < 0.15:
        return logic.Later(random_formula(rng, ctx, objects, size - 1))
    if pick < 0.55:
        cls = rng.choice([logic.And, logic.Or, logic.Implies])
        a = rng.randint(1, size - 1)
        return cls(random_formula(rng, ctx, objects, a),
                   random_formula(rng, ctx, objects, size - a))
    if pick < 0.75 and objects:
        Y = rng.choice(objects)
        name = f"v{len(ctx)}"
        cls = rng.choice([logic.Exists, logic.Forall])
        return cls(name, Y, random_formula(rng, ctx + [(name, Y)], objects, size - 1))
    return random_atom(rng, ctx)


def random_atom(rng, ctx):
    r = rng.random()
    if not ctx or r < 0.15:
        return rng.choice([logic.Top(), logic.Bot()])
    name, X = rng.choice(ctx)
    same = [n for n, Y in ctx if Y == X]
    if r < 0.45 and len(same) > 1:
        other = rng.choice(same)
        return logic.Eq(logic.Var(name, X), logic.Var(other, X))
    return logic.Rel(random_subobject(rng, X), (logic.Var(name, X),))


# ----------------------------------------------------------------------------
# Type expressions


def random_covariant(rng, size: int = 3, guarded: bool = False):
    """A type expression in ``X`` with only positive occurrences.

    Unless ``guarded`` is set, ``X`` may appear outside ``▶``.
    """
    consts = [domain.TConst(("a",)), domain.TConst(("a", "b")), domain.TUnit()]
    if size <= 1:
        if guarded:
            return rng.choice(consts)
        return rng.choice(consts + [domain.TVar("X"), domain.TVar("X")])
    pick = rng.random()
    if pick < 0.3:
        return domain.TLater(random_covariant(rng, size - 1, False))
    if pick < 0.55:
        return domain.TProd(random_covariant(rng, size - 1, guarded),
                            random_covariant(rng, size - 1, guarded))
    if pick < 0.75:
        return domain.TSum(random_covariant(rng, size - 1, guarded),
                           random_covariant(rng, size - 1, guarded))
    if pick < 0.9:
        return domain.TArrow(rng.choice(consts[:2]), random_covariant(rng, size - 1, guarded))
    return random_covariant(rng, 1, guarded)


def guard(e):
    """``e`` with ``X`` moved under ``▶`` where it occurs unguarded."""
    match e:
        case domain.TVar("X"):
            return domain.TLater(e)
        case domain.TProd(l, r):
            return domain.TProd(guard(l), guard(r))
        case domain.TSum(l, r):
            return domain.TSum(guard(l), guard(r))
        case domain.TArrow(d, c):
            return domain.TArrow(d, guard(c))
    return e


# ----------------------------------------------------------------------------
# Metric spaces


def random_space(rng, max_points: int = 6, max_exp: int = 5, min_points: int = 0) -> BisectedSpace:
    """Points are random words; the exponent is the common-prefix length (capped)."""
    n = rng.randint(min_points, max_points)
    words = set()
    while len(words) < n:
        words.add(tuple(rng.randrange(2) for _ in range(max_exp + 1)))
    words = sorted(words)
    pts = [f"p{i}" for i in range(n)]
    exps = {}
    for (i, u), (j, v) in itertools.permutations(enumerate(words), 2):
        common = 0
        while common < len(u) and u[common] == v[common]:
            common += 1
        exps[(pts[i], pts[j])] = min(common, max_exp)
    return BisectedSpace(pts, exps)


def random_nonexpansive(rng, M: BisectedSpace, tries: int = 50):
    """A random map ``M -> M`` that does not increase distances."""
    from treetopos.metric import is_non_expansive

    for _ in range(tries):
        f = {x: rng.choice(M.points) for x in M.points}
        if is_non_expansive(M, f):
            return f
    return {x: M.points[0] for x in M.points}
