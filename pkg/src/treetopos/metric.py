"""Finite bisected ultrametric spaces and their presheaf view.

Every nonzero distance is ``2^-e``; only the exponent ``e ≥ 0`` is stored and
``None`` stands for distance zero.  Two points agree at level ``n`` when their
distance is at most ``2^-n``, i.e. ``e ≥ n``; the presheaf of a space has the
classes of that relation at level ``n``.
"""

from __future__ import annotations

import itertools
from typing import Callable, Mapping

from . import presheaf as ps
from .presheaf import Morphism, TruncatedPresheaf, encode_label, sort_key


class MetricError(ValueError):
    pass


class BisectedSpace:
    """A finite ultrametric space whose nonzero distances are powers of two."""

    __slots__ = ("points", "_exp")

    def __init__(self, points, exponents: Mapping | None = None, check: bool = True):
        self.points = tuple(sorted(set(points), key=sort_key))
        if len(self.points) != len(tuple(points)):
            raise MetricError("duplicate points")
        self._exp = {}
        exponents = exponents or {}
        for (x, y), e in exponents.items():
            if x != y:
                self._exp[frozenset((x, y))] = e
        if check:
            self.validate()

    def exponent(self, x, y) -> int | None:
        """``e`` with ``d(x, y) = 2^-e``; ``None`` when ``x == y``."""
        if x == y:
            return None
        return self._exp[frozenset((x, y))]

    def dist(self, x, y) -> float:
        e = self.exponent(x, y)
        return 0.0 if e is None else 2.0 ** -e

    def agree(self, x, y, n: int) -> bool:
        """``x =_n y``."""
        e = self.exponent(x, y)
        return e is None or e >= n

    def validate(self) -> None:
        for x, y in itertools.combinations(self.points, 2):
            e = self._exp.get(frozenset((x, y)))
            if e is None:
                raise MetricError(f"distinct points {x!r}, {y!r} need a nonzero distance")
            if not isinstance(e, int) or isinstance(e, bool) or e < 0:
                raise MetricError(f"exponent {e!r} for {x!r}, {y!r} is not a natural number")
        extra = set().union(*self._exp) - set(self.points) if self._exp else set()
        if extra:
            raise MetricError(f"distances mention unknown points {sorted(map(str, extra))}")
        # Ultrametric: d(x,z) <= max(d(x,y), d(y,z)), i.e. e(x,z) >= min(e(x,y), e(y,z)).
        for x, y, z in itertools.permutations(self.points, 3):
            if self._exp[frozenset((x, z))] < min(self._exp[frozenset((x, y))],
                                                  self._exp[frozenset((y, z))]):
                raise MetricError(f"ultrametric inequality fails for {x!r}, {y!r}, {z!r}")

    def max_exponent(self) -> int:
        return max(self._exp.values(), default=0)

    def __len__(self):
        return len(self.points)

    def __eq__(self, other):
        return (isinstance(other, BisectedSpace) and self.points == other.points
                and self._exp == other._exp)

    def __hash__(self):
        return hash(self.points)

    def __repr__(self):
        return f"BisectedSpace({len(self.points)} points)"

    def to_json(self) -> dict:
        return {
            "points": [encode_label(p) for p in self.points],
            "dist_exponents": [[self.exponent(x, y) for y in self.points] for x in self.points],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "BisectedSpace":
        pts = list(data["points"])
        rows = data["dist_exponents"]
        if len(rows) != len(pts) or any(len(r) != len(pts) for r in rows):
            raise MetricError("dist_exponents must be a square matrix over the points")
        exps = {}
        for i, x in enumerate(pts):
            if rows[i][i] is not None:
                raise MetricError("the diagonal must be null (distance zero)")
            for j, y in enumerate(pts):
                if i != j:
                    if rows[i][j] != rows[j][i]:
                        raise MetricError(f"distance between {x} and {y} is not symmetric")
                    exps[(x, y)] = rows[i][j]
        return cls(pts, exps)


def discrete(points, exponent: int = 0) -> BisectedSpace:
    """All distinct points at distance ``2^-exponent``."""
    pts = list(points)
    return BisectedSpace(pts, {(x, y): exponent for x in pts for y in pts if x != y})


def is_isometry(f: Mapping, M: BisectedSpace, N: BisectedSpace) -> bool:
    if sorted(f, key=sort_key) != list(M.points) or sorted(f.values(), key=sort_key) != list(N.points):
        return False
    return all(M.exponent(x, y) == N.exponent(f[x], f[y])
               for x, y in itertools.combinations(M.points, 2))


# ----------------------------------------------------------------------------
# Spaces as presheaves


def _classes(M: BisectedSpace, n: int) -> dict:
    """Map each point to its ``=_n`` class (a frozenset)."""
    out = {}
    for x in M.points:
        out[x] = frozenset(y for y in M.points if M.agree(x, y, n))
    return out


def to_presheaf(M: BisectedSpace, depth: int) -> TruncatedPresheaf:
    """Level ``n`` is the set of ``=_n`` classes; restriction coarsens classes."""
    if depth < 1:
        raise MetricError("depth must be at least 1")
    cls = [_classes(M, n) for n in range(1, depth + 1)]
    levels = [sorted(set(c.values()), key=sort_key) for c in cls]
    rs = []
    for n in range(1, depth):
        rs.append({cls[n][x]: cls[n - 1][x] for x in M.points})
    return TruncatedPresheaf(levels, rs)


def point_class(M: BisectedSpace, x, n: int) -> frozenset:
    return frozenset(y for y in M.points if M.agree(x, y, n))


def map_to_presheaf(M: BisectedSpace, f: Callable | Mapping, depth: int,
                    N: BisectedSpace | None = None) -> Morphism:
    """The morphism induced by a non-expansive point map ``f : M -> N``."""
    N = M if N is None else N
    fn = f.__getitem__ if isinstance(f, Mapping) else f
    X, Y = to_presheaf(M, depth), to_presheaf(N, depth)
    comps = []
    for n in range(1, depth + 1):
        comp = {}
        for x in M.points:
            cx, cy = point_class(M, x, n), point_class(N, fn(x), n)
            if comp.setdefault(cx, cy) != cy:
                raise MetricError("the map is not non-expansive, so it does not act on classes")
            comp[cx] = cy
        comps.append(comp)
    return Morphism(X, Y, comps)


def from_presheaf(X: TruncatedPresheaf) -> BisectedSpace:
    """Points are the top level; the exponent is the last level where two points agree."""
    if not ps.is_total(X):
        raise MetricError("only total presheaves correspond to bisected spaces")
    n = X.depth
    pts = list(X.level(n))
    exps = {}
    for x, y in itertools.combinations(pts, 2):
        e = 0
        for k in range(n, 0, -1):
            if X.restrict(x, n, k) == X.restrict(y, n, k):
                e = k
                break
        exps[(x, y)] = exps[(y, x)] = e
    return BisectedSpace(pts, exps)


def is_non_expansive(M: BisectedSpace, f: Mapping, N: BisectedSpace | None = None) -> bool:
    N = M if N is None else N
    for x, y in itertools.combinations(M.points, 2):
        e, e1 = M.exponent(x, y), N.exponent(f[x], f[y])
        if e1 is not None and e1 < e:
            return False
    return True


def is_contractive_metric(M: BisectedSpace, f: Mapping, N: BisectedSpace | None = None) -> bool:
    """``d(f x, f y) <= d(x, y) / 2`` for all ``x, y``."""
    N = M if N is None else N
    for x, y in itertools.combinations(M.points, 2):
        e, e1 = M.exponent(x, y), N.exponent(f[x], f[y])
        if e1 is not None and e1 < e + 1:
            return False
    return True


def half_space(M: BisectedSpace) -> BisectedSpace:
    """Scale all distances by one half."""
    return BisectedSpace(M.points, {(x, y): M.exponent(x, y) + 1
                                    for x, y in itertools.permutations(M.points, 2)})
