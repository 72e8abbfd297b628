"""Depth-truncated presheaves on the ordered natural numbers.

A :class:`TruncatedPresheaf` of depth ``n`` stores the finite sets
``X(1), ..., X(n)`` together with the restriction maps
``r_k : X(k+1) -> X(k)``.  Everything in this module is computed levelwise,
so every identity that holds in the topos of trees can be checked exactly on
the first ``n`` levels.

Elements are arbitrary hashable Python values.  Structured objects use
canonical encodings: products hold tuples, coproducts hold ``("inl", x)`` /
``("inr", y)``, the later functor puts :data:`STAR` at level 1, and an element
of an exponential ``Y^X`` at level ``k`` is a tuple ``(f_1, ..., f_k)`` where
each ``f_i`` is the tuple of images of ``X(i)`` taken in canonical order.
"""

from __future__ import annotations

import itertools
import json
from collections.abc import Iterable, Mapping, Sequence
from typing import Any, Callable

STAR = "*"

#: Default bound on the number of candidates produced by the brute-force
#: enumerators (exponentials, hom-sets, subobjects).
ENUMERATION_CAP = 10**6


class PresheafError(ValueError):
    """Raised when a presheaf, morphism or subobject is malformed."""


class EnumerationCapExceeded(RuntimeError):
    """Raised when a brute-force enumeration would exceed the configured cap."""


def sort_key(x: Any):
    """Total order on labels: ints numerically, then strings, then tuples."""
    if isinstance(x, bool):
        return (0, int(x))
    if isinstance(x, int):
        return (0, x)
    if isinstance(x, str):
        return (1, x)
    if isinstance(x, tuple):
        return (2, tuple(sort_key(e) for e in x))
    if isinstance(x, frozenset):
        return (3, tuple(sorted(sort_key(e) for e in x)))
    return (4, repr(x))


def encode_label(x: Any) -> str:
    """Canonical string form of an element, used for JSON and text output."""
    if isinstance(x, str):
        return x
    if isinstance(x, tuple):
        return "(" + ",".join(encode_label(e) for e in x) + ")"
    if isinstance(x, frozenset):
        return "{" + ",".join(sorted(encode_label(e) for e in x)) + "}"
    return str(x)


def _cap(cap):
    return ENUMERATION_CAP if cap is None else cap


class TruncatedPresheaf:
    """The first ``depth`` levels of an object of the topos of trees.

    ``levels[k-1]`` is the set ``X(k)`` and ``restrictions[k-1]`` is the map
    ``X(k+1) -> X(k)``.  Instances are immutable; levels are stored in
    canonical order so structurally equal objects produce identical encodings.
    """

    __slots__ = ("levels", "restrictions", "structure", "_index", "_fibers", "_hash")

    def __init__(self, levels: Sequence[Iterable], restrictions: Sequence[Mapping] = (),
                 structure: tuple | None = None):
        levels = [list(level) for level in levels]
        if len(levels) < 1:
            raise PresheafError("depth must be at least 1")
        if len(restrictions) != len(levels) - 1:
            raise PresheafError(
                f"expected {len(levels) - 1} restriction maps, got {len(restrictions)}")
        index = []
        for k, level in enumerate(levels, start=1):
            if len(set(level)) != len(level):
                raise PresheafError(f"duplicate labels at level {k}")
            level.sort(key=sort_key)
            index.append({x: i for i, x in enumerate(level)})
        self.levels = tuple(tuple(level) for level in levels)
        rs = []
        for k, r in enumerate(restrictions, start=1):
            r = dict(r)
            if set(r) != set(index[k]):
                raise PresheafError(f"restriction r_{k} is not total on X({k + 1})")
            for x, y in r.items():
                if y not in index[k - 1]:
                    raise PresheafError(f"restriction r_{k} maps {x!r} outside X({k})")
            rs.append(r)
        self.restrictions = tuple(rs)
        self.structure = structure
        self._index = tuple(index)
        fibers = []
        for k, r in enumerate(rs, start=1):
            fib = {x: [] for x in self.levels[k - 1]}
            for x in self.levels[k]:
                fib[r[x]].append(x)
            fibers.append({x: tuple(v) for x, v in fib.items()})
        self._fibers = tuple(fibers)
        self._hash = hash((len(self.levels), tuple(len(level) for level in self.levels)))

    @property
    def depth(self) -> int:
        return len(self.levels)

    def level(self, k: int) -> tuple:
        self._check_level(k)
        return self.levels[k - 1]

    def sizes(self) -> tuple[int, ...]:
        return tuple(len(level) for level in self.levels)

    def contains(self, k: int, x) -> bool:
        return x in self._index[k - 1]

    def index(self, k: int, x) -> int:
        return self._index[k - 1][x]

    def restriction(self, k: int) -> Mapping:
        """The map ``r_k : X(k+1) -> X(k)``."""
        return self.restrictions[k - 1]

    def fiber(self, k: int, x) -> tuple:
        """Elements of ``X(k+1)`` that restrict to ``x`` in ``X(k)``."""
        return self._fibers[k - 1][x]

    def restrict(self, x, frm: int, to: int):
        """``x|_to`` for ``x`` in ``X(frm)``."""
        if to > frm:
            raise PresheafError(f"cannot restrict from level {frm} up to {to}")
        for k in range(frm - 1, to - 1, -1):
            x = self.restrictions[k - 1][x]
        return x

    def truncate(self, m: int) -> TruncatedPresheaf:
        if not 1 <= m <= self.depth:
            raise PresheafError(f"cannot truncate depth {self.depth} to {m}")
        return TruncatedPresheaf(self.levels[:m], self.restrictions[:m - 1])

    def _check_level(self, k: int) -> None:
        if not 1 <= k <= self.depth:
            raise PresheafError(f"level {k} out of range 1..{self.depth}")

    def __eq__(self, other):
        if not isinstance(other, TruncatedPresheaf):
            return NotImplemented
        return self.levels == other.levels and self.restrictions == other.restrictions

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"TruncatedPresheaf(sizes={self.sizes()})"

    def to_json(self) -> dict:
        levels = [[encode_label(x) for x in level] for level in self.levels]
        for k, level in enumerate(levels, start=1):
            if len(set(level)) != len(level):
                raise PresheafError(f"label encoding collides at level {k}")
        restrictions = [{encode_label(x): encode_label(y) for x, y in r.items()}
                        for r in self.restrictions]
        return {"depth": self.depth, "levels": levels, "restrictions": restrictions}

    @classmethod
    def from_json(cls, data: Mapping) -> TruncatedPresheaf:
        levels = data["levels"]
        if data.get("depth", len(levels)) != len(levels):
            raise PresheafError("depth field does not match number of levels")
        return cls(levels, data.get("restrictions", []))


class Morphism:
    """A natural transformation between presheaves of equal depth.

    ``components[k-1]`` maps ``X(k)`` into ``Y(k)``.  Naturality is checked on
    construction.
    """

    __slots__ = ("source", "target", "components")

    def __init__(self, source: TruncatedPresheaf, target: TruncatedPresheaf,
                 components: Sequence[Mapping], check: bool = True):
        if source.depth != target.depth:
            raise PresheafError(
                f"depth mismatch: source {source.depth}, target {target.depth}")
        if len(components) != source.depth:
            raise PresheafError("one component per level is required")
        self.source = source
        self.target = target
        self.components = tuple(dict(c) for c in components)
        if check:
            self._validate()

    def _validate(self):
        X, Y = self.source, self.target
        for k, f in enumerate(self.components, start=1):
            if len(f) != len(X.level(k)) or any(not X.contains(k, x) for x in f):
                raise PresheafError(f"component {k} is not total on the source level")
            for x, y in f.items():
                if not Y.contains(k, y):
                    raise PresheafError(f"component {k} maps {x!r} outside the target")
        for k in range(1, X.depth):
            f_k, f_k1 = self.components[k - 1], self.components[k]
            rX, rY = X.restriction(k), Y.restriction(k)
            for x in X.level(k + 1):
                if f_k[rX[x]] != rY[f_k1[x]]:
                    raise PresheafError(f"naturality fails at level {k} for {x!r}")

    @property
    def depth(self) -> int:
        return self.source.depth

    def apply(self, k: int, x):
        return self.components[k - 1][x]

    def __call__(self, k: int, x):
        return self.components[k - 1][x]

    def __eq__(self, other):
        if not isinstance(other, Morphism):
            return NotImplemented
        return (self.source == other.source and self.target == other.target
                and self.components == other.components)

    def __hash__(self):
        return hash((self.source, self.target))

    def __repr__(self):
        return f"Morphism({self.source!r} -> {self.target!r})"

    def is_iso(self) -> bool:
        return n_iso_rank(self) == self.depth

    def to_json(self) -> dict:
        return {
            "source": self.source.to_json(),
            "target": self.target.to_json(),
            "components": [{encode_label(x): encode_label(y) for x, y in c.items()}
                           for c in self.components],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> Morphism:
        return cls(TruncatedPresheaf.from_json(data["source"]),
                   TruncatedPresheaf.from_json(data["target"]), data["components"])


class Subobject:
    """A family ``A(k) ⊆ X(k)`` closed under restriction."""

    __slots__ = ("ambient", "members")

    def __init__(self, ambient: TruncatedPresheaf, members: Sequence[Iterable]):
        if len(members) != ambient.depth:
            raise PresheafError("one member set per level is required")
        self.ambient = ambient
        self.members = tuple(frozenset(m) for m in members)
        for k, m in enumerate(self.members, start=1):
            for x in m:
                if not ambient.contains(k, x):
                    raise PresheafError(f"{x!r} is not an element of level {k}")
        for k in range(1, ambient.depth):
            r = ambient.restriction(k)
            for x in self.members[k]:
                if r[x] not in self.members[k - 1]:
                    raise PresheafError(f"subobject not closed under r_{k} at {x!r}")

    def contains(self, k: int, x) -> bool:
        return x in self.members[k - 1]

    def __le__(self, other: Subobject) -> bool:
        return all(a <= b for a, b in zip(self.members, other.members))

    def __eq__(self, other):
        if not isinstance(other, Subobject):
            return NotImplemented
        return self.ambient == other.ambient and self.members == other.members

    def __hash__(self):
        return hash(self.members)

    def __repr__(self):
        return f"Subobject(sizes={tuple(len(m) for m in self.members)})"

    def is_maximal(self) -> bool:
        return all(len(m) == len(level)
                   for m, level in zip(self.members, self.ambient.levels))

    def to_json(self) -> dict:
        return {
            "ambient": self.ambient.to_json(),
            "members": [sorted((encode_label(x) for x in m)) for m in self.members],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> Subobject:
        return cls(TruncatedPresheaf.from_json(data["ambient"]), data["members"])


class GlobalElement:
    """A compatible choice ``x_k ∈ X(k)``, i.e. a morphism ``1 -> X``."""

    __slots__ = ("target", "picks")

    def __init__(self, target: TruncatedPresheaf, picks: Sequence):
        if len(picks) != target.depth:
            raise PresheafError("one pick per level is required")
        for k, x in enumerate(picks, start=1):
            if not target.contains(k, x):
                raise PresheafError(f"{x!r} is not an element of level {k}")
        for k in range(1, target.depth):
            if target.restriction(k)[picks[k]] != picks[k - 1]:
                raise PresheafError(f"picks are not compatible at level {k}")
        self.target = target
        self.picks = tuple(picks)

    @classmethod
    def from_top(cls, X: TruncatedPresheaf, x) -> GlobalElement:
        """The global element determined by ``x ∈ X(depth)``."""
        n = X.depth
        return cls(X, [X.restrict(x, n, k) for k in range(1, n + 1)])

    def at(self, k: int):
        return self.picks[k - 1]

    def __eq__(self, other):
        if not isinstance(other, GlobalElement):
            return NotImplemented
        return self.target == other.target and self.picks == other.picks

    def __hash__(self):
        return hash(self.picks)

    def __repr__(self):
        return f"GlobalElement({', '.join(encode_label(x) for x in self.picks)})"

    def as_morphism(self) -> Morphism:
        one = terminal(self.target.depth)
        return Morphism(one, self.target, [{STAR: x} for x in self.picks])


# ----------------------------------------------------------------------------
# Basic objects


def _check_depth(depth: int) -> None:
    if not isinstance(depth, int) or depth < 1:
        raise PresheafError(f"depth must be a positive integer, got {depth!r}")


def constant(depth: int, elems: Iterable) -> TruncatedPresheaf:
    """The constant presheaf ``Δ(elems)`` with identity restrictions."""
    _check_depth(depth)
    elems = list(elems)
    ident = {x: x for x in elems}
    return TruncatedPresheaf([elems] * depth, [ident] * (depth - 1),
                             structure=("constant", tuple(sorted(elems, key=sort_key))))


def terminal(depth: int) -> TruncatedPresheaf:
    return constant(depth, [STAR])


def initial(depth: int) -> TruncatedPresheaf:
    return constant(depth, [])


def omega(depth: int) -> TruncatedPresheaf:
    """The subobject classifier: ``Ω(k) = {0..k}``, ``r_k(x) = min(k, x)``."""
    _check_depth(depth)
    levels = [range(k + 1) for k in range(1, depth + 1)]
    rs = [{x: min(k, x) for x in range(k + 2)} for k in range(1, depth)]
    return TruncatedPresheaf(levels, rs, structure=("omega",))


def _same_depth(*objs: TruncatedPresheaf) -> int:
    depths = {X.depth for X in objs}
    if len(depths) != 1:
        raise PresheafError(f"depth mismatch: {sorted(depths)}")
    return depths.pop()


def product(*factors: TruncatedPresheaf) -> TruncatedPresheaf:
    """Levelwise cartesian product; elements are tuples, one entry per factor."""
    if not factors:
        raise PresheafError("product needs at least one factor; use terminal(depth)")
    n = _same_depth(*factors)
    levels = [list(itertools.product(*(X.level(k) for X in factors)))
              for k in range(1, n + 1)]
    rs = []
    for k in range(1, n):
        maps = [X.restriction(k) for X in factors]
        rs.append({t: tuple(m[c] for m, c in zip(maps, t)) for t in levels[k]})
    return TruncatedPresheaf(levels, rs, structure=("product", tuple(factors)))


def coproduct(X: TruncatedPresheaf, Y: TruncatedPresheaf) -> TruncatedPresheaf:
    n = _same_depth(X, Y)
    levels = [[("inl", x) for x in X.level(k)] + [("inr", y) for y in Y.level(k)]
              for k in range(1, n + 1)]
    rs = []
    for k in range(1, n):
        r = {("inl", x): ("inl", X.restriction(k)[x]) for x in X.level(k + 1)}
        r.update({("inr", y): ("inr", Y.restriction(k)[y]) for y in Y.level(k + 1)})
        rs.append(r)
    return TruncatedPresheaf(levels, rs, structure=("coproduct", (X, Y)))


def exponential(X: TruncatedPresheaf, Y: TruncatedPresheaf, cap: int | None = None
                ) -> TruncatedPresheaf:
    """``Y^X``: level ``k`` holds the commuting tuples ``(f_1, ..., f_k)``.

    Level ``k+1`` is built by extending each level-``k`` tuple with every
    ``f_{k+1}`` that sends ``x`` into the fiber of ``r^Y_k`` over
    ``f_k(r^X_k x)``.  The restriction drops the last component.
    """
    n = _same_depth(X, Y)
    cap = _cap(cap)
    first = list(itertools.product(Y.level(1), repeat=len(X.level(1))))
    if len(first) > cap:
        raise EnumerationCapExceeded(f"exponential level 1 has {len(first)} > {cap} elements")
    levels = [[(f,) for f in first]]
    rs = []
    for k in range(1, n):
        rX = X.restriction(k)
        xs_next = X.level(k + 1)
        nxt, r = [], {}
        for tup in levels[-1]:
            f_k = tup[-1]
            choices = [Y.fiber(k, f_k[X.index(k, rX[x])]) for x in xs_next]
            count = 1
            for c in choices:
                count *= len(c)
            if len(nxt) + count > cap:
                raise EnumerationCapExceeded(
                    f"exponential level {k + 1} exceeds {cap} elements")
            for f in itertools.product(*choices):
                t = tup + (f,)
                nxt.append(t)
                r[t] = tup
        levels.append(nxt)
        rs.append(r)
    return TruncatedPresheaf(levels, rs, structure=("exponential", (X, Y)))


def apply_fn(X: TruncatedPresheaf, fn: tuple, k: int, x):
    """Evaluate an element ``fn ∈ (Y^X)(m)`` at ``x ∈ X(k)`` for ``k <= m``."""
    return fn[k - 1][X.index(k, x)]


def fn_from_morphism(f: Morphism, k: int | None = None) -> tuple:
    """Encode the first ``k`` components of ``f`` as an element of ``(Y^X)(k)``."""
    k = f.depth if k is None else k
    X = f.source
    return tuple(tuple(f.components[i - 1][x] for x in X.level(i)) for i in range(1, k + 1))


def name_of(f: Morphism) -> GlobalElement:
    """The global element ``⌜f⌝ : 1 -> Y^X`` of a morphism."""
    E = exponential(f.source, f.target)
    return GlobalElement(E, [fn_from_morphism(f, k) for k in range(1, f.depth + 1)])


def morphism_from_name(X: TruncatedPresheaf, Y: TruncatedPresheaf, fn: tuple) -> Morphism:
    """Inverse of :func:`name_of` for a top-level element of ``Y^X``."""
    comps = [{x: apply_fn(X, fn, k, x) for x in X.level(k)} for k in range(1, X.depth + 1)]
    return Morphism(X, Y, comps)


# ----------------------------------------------------------------------------
# Morphism combinators


def identity(X: TruncatedPresheaf) -> Morphism:
    return Morphism(X, X, [{x: x for x in level} for level in X.levels], check=False)


def compose(g: Morphism, f: Morphism) -> Morphism:
    """``g ∘ f``."""
    if f.target != g.source:
        raise PresheafError("cannot compose: codomain of f differs from domain of g")
    comps = [{x: gk[fx] for x, fx in fk.items()}
             for fk, gk in zip(f.components, g.components)]
    return Morphism(f.source, g.target, comps, check=False)


def from_function(X: TruncatedPresheaf, Y: TruncatedPresheaf,
                  fn: Callable[[int, Any], Any]) -> Morphism:
    """Build a morphism from a levelwise function ``fn(k, x)``; naturality is checked."""
    return Morphism(X, Y, [{x: fn(k, x) for x in X.level(k)} for k in range(1, X.depth + 1)])


def bang(X: TruncatedPresheaf) -> Morphism:
    """The unique map ``X -> 1``."""
    return from_function(X, terminal(X.depth), lambda k, x: STAR)


def projection(P: TruncatedPresheaf, i: int) -> Morphism:
    factors = _factors(P)
    return from_function(P, factors[i], lambda k, t: t[i])


def pairing(*fs: Morphism) -> Morphism:
    """``⟨f_1, ..., f_m⟩ : X -> Y_1 × ... × Y_m``."""
    X = fs[0].source
    if any(f.source != X for f in fs):
        raise PresheafError("pairing needs morphisms with a common source")
    P = product(*(f.target for f in fs))
    return Morphism(X, P, [{x: tuple(f.components[k][x] for f in fs) for x in X.levels[k]}
                           for k in range(X.depth)], check=False)


def product_map(*fs: Morphism) -> Morphism:
    """``f_1 × ... × f_m``."""
    S = product(*(f.source for f in fs))
    T = product(*(f.target for f in fs))
    return Morphism(S, T, [{t: tuple(f.components[k][c] for f, c in zip(fs, t))
                            for t in S.levels[k]} for k in range(S.depth)], check=False)


def _factors(P: TruncatedPresheaf) -> tuple:
    if not P.structure or P.structure[0] != "product":
        raise PresheafError("expected a product object")
    return P.structure[1]


def _exp_parts(E: TruncatedPresheaf) -> tuple:
    if not E.structure or E.structure[0] != "exponential":
        raise PresheafError("expected an exponential object")
    return E.structure[1]


def evaluation(X: TruncatedPresheaf, Y: TruncatedPresheaf, cap: int | None = None) -> Morphism:
    """``ev : Y^X × X -> Y``."""
    E = exponential(X, Y, cap)
    return from_function(product(E, X), Y, lambda k, p: apply_fn(X, p[0], k, p[1]))


def curry(g: Morphism, cap: int | None = None) -> Morphism:
    """Exponential transpose of ``g : A × B -> C`` as ``ĝ : B -> C^A``.

    At level ``k``, ``b`` goes to the tuple ``(h_1..h_k)`` with
    ``h_i(a) = g_i(a, b|_i)``.
    """
    A, B = _factors(g.source)
    C = g.target
    E = exponential(A, C, cap)

    def transpose(k, b):
        return tuple(tuple(g.components[i - 1][(a, B.restrict(b, k, i))] for a in A.level(i))
                     for i in range(1, k + 1))

    return from_function(B, E, transpose)


# ----------------------------------------------------------------------------
# The later functor, next, and the left adjoint


def later_obj(X: TruncatedPresheaf, grow: bool = False) -> TruncatedPresheaf:
    """``▶X``: ``{⋆}`` at level 1 and ``X(k)`` at level ``k+1``.

    The result keeps the depth of ``X`` (its top level is dropped) unless
    ``grow`` is set, in which case the depth increases by one.
    """
    n = X.depth + 1 if grow else X.depth
    levels = [[STAR]] + [X.level(k) for k in range(1, n)]
    rs = []
    if n >= 2:
        rs.append({x: STAR for x in X.level(1)})
        rs.extend(X.restriction(k) for k in range(1, n - 1))
    return TruncatedPresheaf(levels, rs, structure=("later", X))


def later_mor(f: Morphism) -> Morphism:
    n = f.depth
    comps = [{STAR: STAR}] + [f.components[k - 1] for k in range(1, n)]
    return Morphism(later_obj(f.source), later_obj(f.target), comps, check=False)


def next_map(X: TruncatedPresheaf) -> Morphism:
    """``next_X : X -> ▶X``; level 1 collapses to ``⋆``, level ``k+1`` is ``r_k``."""
    comps = [{x: STAR for x in X.level(1)}]
    comps += [dict(X.restriction(k)) for k in range(1, X.depth)]
    return Morphism(X, later_obj(X), comps, check=False)


def earlier_obj(X: TruncatedPresheaf) -> TruncatedPresheaf:
    """``◀X`` truncated to depth ``n-1``: level ``k`` is ``X(k+1)``."""
    if X.depth < 2:
        raise PresheafError("earlier_obj needs depth >= 2")
    return TruncatedPresheaf(X.levels[1:], X.restrictions[1:], structure=("earlier", X))


def earlier_mor(f: Morphism) -> Morphism:
    return Morphism(earlier_obj(f.source), earlier_obj(f.target), f.components[1:],
                    check=False)


def later_transpose(g: Morphism, X: TruncatedPresheaf) -> Morphism:
    """The adjunction bijection ``Hom(◀X, Y) -> Hom(X, ▶Y)``.

    ``g`` has depth ``n-1`` and ``X`` depth ``n``; the target is
    ``later_obj(Y, grow=True)``.  Level 1 collapses to ``⋆`` and level ``k+1``
    is ``g_k``.
    """
    if X.depth != g.depth + 1 or earlier_obj(X) != g.source:
        raise PresheafError("later_transpose expects g : ◀X -> Y")
    comps = [{x: STAR for x in X.level(1)}] + list(g.components)
    return Morphism(X, later_obj(g.target, grow=True), comps)


def earlier_transpose(f: Morphism) -> Morphism:
    """Inverse of :func:`later_transpose`: drop the first component."""
    Y = earlier_obj(f.target)
    return Morphism(earlier_obj(f.source), Y, f.components[1:])


def later_app(X: TruncatedPresheaf, Y: TruncatedPresheaf, cap: int | None = None) -> Morphism:
    """The canonical ``J : ▶(Y^X) -> (▶Y)^(▶X)``.

    Level 1 sends ``⋆`` to the unique function ``{⋆} -> {⋆}``; level ``k+1``
    sends ``(f_1..f_k)`` to ``(⋆↦⋆, f_1, ..., f_k)``.
    """
    _same_depth(X, Y)
    src = later_obj(exponential(X, Y, cap))
    tgt = exponential(later_obj(X), later_obj(Y), cap)
    unit = ((STAR,),)

    def J(k, h):
        return unit if k == 1 else unit + h

    return from_function(src, tgt, J)


def succ_map(depth: int) -> Morphism:
    """``succ : ▶Ω -> Ω``, ``k ↦ k+1`` (and ``⋆ ↦ 1``)."""
    Om = omega(depth)
    return from_function(later_obj(Om), Om, lambda k, x: 1 if x == STAR else x + 1)


def later_omega(depth: int) -> Morphism:
    """``▷ : Ω -> Ω``, sending ``x ∈ Ω(k)`` to ``min(k, x+1)``."""
    Om = omega(depth)
    return from_function(Om, Om, lambda k, x: min(k, x + 1))


def truth(depth: int) -> Subobject:
    """The generic subobject ``⊤ : 1 -> Ω``: ``{k}`` at level ``k``."""
    return Subobject(omega(depth), [{k} for k in range(1, depth + 1)])


# ----------------------------------------------------------------------------
# Subobjects and characteristic maps


def maximal(X: TruncatedPresheaf) -> Subobject:
    return Subobject(X, X.levels)


def empty_sub(X: TruncatedPresheaf) -> Subobject:
    return Subobject(X, [()] * X.depth)


def char(A: Subobject) -> Morphism:
    """``χ_A``: ``x ∈ X(n)`` goes to the largest ``m <= n`` with ``x|_m ∈ A(m)``, else 0."""
    X = A.ambient

    def chi(n, x):
        for m in range(n, 0, -1):
            if X.restrict(x, n, m) in A.members[m - 1]:
                return m
        return 0

    return from_function(X, omega(X.depth), chi)


def sub_of_char(m: Morphism) -> Subobject:
    if m.target != omega(m.depth):
        raise PresheafError("sub_of_char expects a morphism into Ω")
    X = m.source
    return Subobject(X, [{x for x in X.level(k) if m.components[k - 1][x] == k}
                         for k in range(1, X.depth + 1)])


def pullback_sub(A: Subobject, f: Morphism) -> Subobject:
    """Inverse image ``f^*(A)``."""
    X = f.source
    return Subobject(X, [{x for x in X.level(k) if f.components[k - 1][x] in A.members[k - 1]}
                         for k in range(1, X.depth + 1)])


def later_sub(A: Subobject) -> Subobject:
    """``▷A``: all of ``X(1)``, and ``{x | x|_k ∈ A(k)}`` at level ``k+1``."""
    X = A.ambient
    members = [set(X.level(1))]
    for k in range(1, X.depth):
        r = X.restriction(k)
        members.append({x for x in X.level(k + 1) if r[x] in A.members[k - 1]})
    return Subobject(X, members)


# ----------------------------------------------------------------------------
# Contractiveness and fixed points


def is_total(X: TruncatedPresheaf) -> bool:
    """True iff every restriction map is surjective."""
    return all(set(X.restriction(k).values()) == set(X.level(k)) for k in range(1, X.depth))


def is_contractive_ext(f: Morphism) -> Morphism | None:
    """Return ``g : ▶X -> Y`` with ``f = g ∘ next_X``, or ``None`` if none exists.

    ``f_1`` must be constant and each ``f_{k+1}`` constant on the fibers of
    ``r_k``.  Elements of ``X(k)`` with an empty fiber are free; they get the
    first admissible value in canonical order.  When ``X(1)`` is empty the
    image of ``⋆`` is the first element of ``Y(1)``.
    """
    X, Y = f.source, f.target
    n = X.depth
    values = set(f.components[0].values())
    if len(values) > 1:
        return None
    if values:
        star_image = values.pop()
    elif Y.level(1):
        star_image = Y.level(1)[0]
    else:
        return None
    comps = [{STAR: star_image}]
    for k in range(1, n):
        rX = X.restriction(k)
        f_k1 = f.components[k]
        g_k1 = {}
        for x in X.level(k + 1):
            y = f_k1[x]
            prev = g_k1.setdefault(rX[x], y)
            if prev != y:
                return None
        prev_g = comps[k - 1]
        for xp in X.level(k):
            if xp in g_k1:
                continue
            below = STAR if k == 1 else X.restriction(k - 1)[xp]
            options = Y.fiber(k, prev_g[below])
            if not options:
                return None
            g_k1[xp] = options[0]
        comps.append(g_k1)
    return Morphism(later_obj(X), Y, comps)


def fix_sequence(step: Callable[[int, Any], Any], depth: int) -> list:
    """Iterate ``x_1 = step(1, ⋆)``, ``x_{k+1} = step(k+1, x_k)``.

    ``step(k, y)`` is the level-``k`` component of some ``g : ▶X -> X``.  This
    form lets callers supply ``g`` pointwise when ``▶X`` is too large to build.
    """
    xs = [step(1, STAR)]
    for k in range(2, depth + 1):
        xs.append(step(k, xs[-1]))
    return xs


def fix(g: Morphism) -> GlobalElement:
    """Unique fixed point of the contractive map ``g ∘ next_X`` for ``g : ▶X -> X``."""
    X = g.target
    if g.source != later_obj(X):
        raise PresheafError("fix expects a morphism of shape ▶X -> X")
    return GlobalElement(X, fix_sequence(g.apply, X.depth))


def fix_map(X: TruncatedPresheaf, cap: int | None = None) -> Morphism:
    """The internal ``fix_X : (▶X -> X) -> X``, computed from each tuple's recurrence."""
    L = later_obj(X)
    E = exponential(L, X, cap)

    def run(k, fn):
        return fix_sequence(lambda i, y: apply_fn(L, fn, i, y), k)[-1]

    return from_function(E, X, run)


# ----------------------------------------------------------------------------
# Brute-force enumerators


def global_elements(X: TruncatedPresheaf) -> list[GlobalElement]:
    """Every global element; each is determined by its top-level pick."""
    return [GlobalElement.from_top(X, x) for x in X.level(X.depth)]


def hom_set(X: TruncatedPresheaf, Y: TruncatedPresheaf, cap: int | None = None
            ) -> list[Morphism]:
    """All natural transformations ``X -> Y``, enumerated level by level."""
    n = _same_depth(X, Y)
    cap = _cap(cap)
    xs1 = X.level(1)
    partial = [[dict(zip(xs1, img))]
               for img in itertools.product(Y.level(1), repeat=len(xs1))]
    if len(partial) > cap:
        raise EnumerationCapExceeded(f"hom-set exceeds {cap} candidates")
    for k in range(1, n):
        rX = X.restriction(k)
        xs = X.level(k + 1)
        grown = []
        for comps in partial:
            f_k = comps[-1]
            choices = [Y.fiber(k, f_k[rX[x]]) for x in xs]
            count = 1
            for c in choices:
                count *= len(c)
            if len(grown) + count > cap:
                raise EnumerationCapExceeded(f"hom-set exceeds {cap} candidates")
            for img in itertools.product(*choices):
                grown.append(comps + [dict(zip(xs, img))])
        partial = grown
    return [Morphism(X, Y, comps, check=False) for comps in partial]


def subobjects(X: TruncatedPresheaf, cap: int | None = None) -> list[Subobject]:
    """All subobjects of ``X``."""
    cap = _cap(cap)

    def subsets(items):
        items = list(items)
        for r in range(len(items) + 1):
            yield from itertools.combinations(items, r)

    partial = [[frozenset(s)] for s in subsets(X.level(1))]
    for k in range(1, X.depth):
        r = X.restriction(k)
        grown = []
        for mem in partial:
            allowed = [x for x in X.level(k + 1) if r[x] in mem[-1]]
            if len(grown) + 2 ** len(allowed) > cap:
                raise EnumerationCapExceeded(f"subobject enumeration exceeds {cap}")
            grown.extend(mem + [frozenset(s)] for s in subsets(allowed))
        partial = grown
    return [Subobject(X, mem) for mem in partial]


# ----------------------------------------------------------------------------
# Isomorphism


def n_iso_rank(f: Morphism) -> int:
    """Largest ``k`` such that ``f_1, ..., f_k`` are bijections."""
    rank = 0
    for k, comp in enumerate(f.components, start=1):
        if len(set(comp.values())) != len(comp) or len(comp) != len(f.target.level(k)):
            break
        rank = k
    return rank


def _signatures(X: TruncatedPresheaf) -> list[dict]:
    """Canonical subtree signature of every element, bottom level first."""
    sigs = [dict() for _ in range(X.depth)]
    for x in X.level(X.depth):
        sigs[-1][x] = ()
    for k in range(X.depth - 1, 0, -1):
        for x in X.level(k):
            sigs[k - 1][x] = tuple(sorted(sigs[k][c] for c in X.fiber(k, x)))
    return sigs


def find_iso(X: TruncatedPresheaf, Y: TruncatedPresheaf) -> Morphism | None:
    """An isomorphism ``X -> Y`` or ``None``.

    A truncated presheaf is a levelled forest (each element of ``X(k+1)`` has
    its restriction as parent), so isomorphism is forest isomorphism: compare
    canonical subtree signatures, then match children with equal signatures.
    """
    if X.depth != Y.depth:
        return None
    sx, sy = _signatures(X), _signatures(Y)
    if sorted(sx[0].values()) != sorted(sy[0].values()):
        return None
    comps = [dict() for _ in range(X.depth)]

    def match(k, xs, ys):
        buckets = {}
        for y in ys:
            buckets.setdefault(sy[k - 1][y], []).append(y)
        for x in xs:
            y = buckets[sx[k - 1][x]].pop()
            comps[k - 1][x] = y
            if k < X.depth:
                match(k + 1, X.fiber(k, x), Y.fiber(k, y))

    match(1, X.level(1), Y.level(1))
    return Morphism(X, Y, comps)


def is_isomorphic(X: TruncatedPresheaf, Y: TruncatedPresheaf) -> bool:
    return find_iso(X, Y) is not None


def dumps(obj) -> str:
    """Deterministic JSON for any object with a ``to_json`` method."""
    return json.dumps(obj.to_json(), sort_keys=True, ensure_ascii=False)
