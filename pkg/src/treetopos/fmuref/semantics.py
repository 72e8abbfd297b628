"""Small-step semantics and the guarded evaluation predicates.

Evaluation is call-by-value and left-to-right.  A term is split into an
evaluation context and a redex by :func:`decompose`; :func:`step` contracts
the redex and plugs the result back.  Allocation always picks the least
location not in the store.

``eval_check(n, t, s, Q)`` decides, at index ``n``, the guarded predicate
"either ``t`` is a value satisfying ``Q``, or ``(t, s)`` steps and the
successor satisfies it one index later".  Each step costs one index; the
predicate is vacuous once only one index is left and a step exists.  A stuck
configuration satisfies it at no index.
"""

from __future__ import annotations

import enum
import functools
import re
from dataclasses import dataclass
from typing import Callable

from .parser import show
from .syntax import (
    App, Assign, Case, Deref, Fix, Fold, Fst, Inl, Inr, Lam, Loc, Pair, Ref, Snd, TApp,
    TLam, Unfold, Unit, Void, is_value, subst, subst_type,
)
from .typecheck import typecheck


@dataclass(frozen=True)
class Store:
    """A finite map from locations to closed values."""
    cells: tuple = ()

    @classmethod
    def of(cls, mapping) -> "Store":
        return cls(tuple(sorted(dict(mapping).items())))

    def as_dict(self) -> dict:
        return dict(self.cells)

    def dom(self) -> frozenset:
        return frozenset(l for l, _ in self.cells)

    def get(self, loc: int):
        for l, v in self.cells:
            if l == loc:
                return v
        return None

    def __contains__(self, loc: int) -> bool:
        return any(l == loc for l, _ in self.cells)

    def __len__(self):
        return len(self.cells)

    def set(self, loc: int, value) -> "Store":
        d = self.as_dict()
        d[loc] = value
        return Store.of(d)

    def fresh(self) -> int:
        used = self.dom()
        loc = 0
        while loc in used:
            loc += 1
        return loc

    def __str__(self):
        return "{" + ", ".join(f"#{l} -> {show(v)}" for l, v in self.cells) + "}"


@dataclass(frozen=True)
class Config:
    term: object
    store: Store = Store()

    def __str__(self):
        return f"<{show(self.term)}, {self.store}>"


class Outcome(enum.Enum):
    VALUE = "value"
    STUCK = "stuck"
    FUEL = "fuel"


# ----------------------------------------------------------------------------
# Evaluation contexts


@dataclass(frozen=True)
class Frame:
    """One layer of an evaluation context; ``args`` are the other subterms."""
    kind: str
    args: tuple = ()

    def fill(self, t):
        a = self.args
        match self.kind:
            case "pair_l":
                return Pair(t, a[0])
            case "pair_r":
                return Pair(a[0], t)
            case "fst":
                return Fst(t)
            case "snd":
                return Snd(t)
            case "void":
                return Void(t, a[0])
            case "inl":
                return Inl(t, a[0])
            case "inr":
                return Inr(t, a[0])
            case "case":
                return Case(t, *a)
            case "fold":
                return Fold(t, a[0])
            case "unfold":
                return Unfold(t)
            case "tapp":
                return TApp(t, a[0])
            case "app_l":
                return App(t, a[0])
            case "app_r":
                return App(a[0], t)
            case "ref":
                return Ref(t)
            case "deref":
                return Deref(t)
            case "assign_l":
                return Assign(t, a[0])
            case "assign_r":
                return Assign(a[0], t)
        raise ValueError(f"unknown frame {self.kind!r}")


def _focus(t):
    """The frame and subterm to evaluate next, or ``None`` if ``t`` is a redex."""
    match t:
        case Pair(l, r):
            if not is_value(l):
                return Frame("pair_l", (r,)), l
            return Frame("pair_r", (l,)), r
        case App(f, a) | Assign(f, a):
            left, right = ("app_l", "app_r") if isinstance(t, App) else ("assign_l", "assign_r")
            if not is_value(f):
                return Frame(left, (a,)), f
            if not is_value(a):
                return Frame(right, (f,)), a
            return None
        case Fst(b) | Snd(b) | Unfold(b) | Ref(b) | Deref(b):
            kind = {Fst: "fst", Snd: "snd", Unfold: "unfold", Ref: "ref", Deref: "deref"}[type(t)]
            return None if is_value(b) else (Frame(kind), b)
        case Void(b, ty) | Inl(b, ty) | Inr(b, ty) | Fold(b, ty):
            kind = {Void: "void", Inl: "inl", Inr: "inr", Fold: "fold"}[type(t)]
            return None if is_value(b) else (Frame(kind, (ty,)), b)
        case Case(s, l, r, lh, rh):
            return None if is_value(s) else (Frame("case", (l, r, lh, rh)), s)
        case TApp(f, ty):
            return None if is_value(f) else (Frame("tapp", (ty,)), f)
    return None


def decompose(t) -> tuple[tuple, object]:
    """Split ``t`` as ``E[r]`` with ``r`` a value or a redex candidate."""
    frames = []
    while not is_value(t):
        fo = _focus(t)
        if fo is None:
            break
        frame, t = fo
        frames.append(frame)
    return tuple(frames), t


def plug(ctx, t):
    for frame in reversed(ctx):
        t = frame.fill(t)
    return t


def is_eval_context(ctx) -> bool:
    """Every frame must be a valid evaluation position (values to the left)."""
    for fr in ctx:
        if fr.kind in ("pair_r", "app_r", "assign_r") and not is_value(fr.args[0]):
            return False
    return True


# ----------------------------------------------------------------------------
# One step


def contract(t, store: Store):
    """Reduce a redex; ``None`` when no rule applies."""
    match t:
        case Fst(Pair(v1, _)):
            return v1, store
        case Snd(Pair(_, v2)):
            return v2, store
        case Case(Inl(v, _), l, _r):
            return subst(l, v), store
        case Case(Inr(v, _), _l, r):
            return subst(r, v), store
        case Unfold(Fold(v, _)):
            return v, store
        case TApp(TLam(body), ty):
            return subst_type(body, ty), store
        case App(Lam(_, body), v):
            return subst(body, v), store
        case App(Fix(_, _, body) as f, v):
            return subst(body, v, f), store
        case Ref(v):
            loc = store.fresh()
            return Loc(loc), store.set(loc, v)
        case Deref(Loc(loc)) if loc in store:
            return store.get(loc), store
        case Assign(Loc(loc), v) if loc in store:
            return Unit(), store.set(loc, v)
    return None


def step(c: Config):
    """The successor configuration, or :attr:`Outcome.VALUE` / :attr:`Outcome.STUCK`."""
    if is_value(c.term):
        return Outcome.VALUE
    ctx, redex = decompose(c.term)
    res = contract(redex, c.store)
    if res is None:
        return Outcome.STUCK
    t1, s1 = res
    return Config(plug(ctx, t1), s1)


@dataclass(frozen=True)
class Trace:
    configs: tuple
    outcome: Outcome

    @property
    def final(self) -> Config:
        return self.configs[-1]

    @property
    def steps(self) -> int:
        return len(self.configs) - 1


def run(c: Config, fuel: int) -> Trace:
    """Iterate :func:`step` at most ``fuel`` times."""
    if fuel < 0:
        raise ValueError("fuel must be non-negative")
    configs = [c]
    for _ in range(fuel):
        nxt = step(c)
        if isinstance(nxt, Outcome):
            return Trace(tuple(configs), nxt)
        c = nxt
        configs.append(c)
    if is_value(c.term):
        return Trace(tuple(configs), Outcome.VALUE)
    return Trace(tuple(configs), Outcome.STUCK if step(c) is Outcome.STUCK else Outcome.FUEL)


# ----------------------------------------------------------------------------
# Guarded evaluation predicates

Post = Callable[[object, Store, int], bool]


def TRUE(v, s, k) -> bool:
    return True


def eval_check(n: int, t, s: Store | None = None, Q: Post = TRUE) -> bool:
    """Decide the guarded evaluation predicate at index ``n``."""
    if n < 1:
        raise ValueError("the index must be at least 1")
    c = Config(t, Store() if s is None else s)
    k = n
    while True:
        if is_value(c.term):
            return bool(Q(c.term, c.store, k))
        nxt = step(c)
        if nxt is Outcome.STUCK:
            return False
        if k == 1 or nxt == c:
            # Later is vacuous at index 1; a self-loop holds at every index.
            return True
        c, k = nxt, k - 1


def default_succs(c: Config):
    nxt = step(c)
    return () if isinstance(nxt, Outcome) else (nxt,)


def default_error(c: Config) -> bool:
    return step(c) is Outcome.STUCK


def evalprime_check(n: int, t, s: Store | None = None, Q: Post = TRUE, succs=None,
                    error=None) -> bool:
    """The universally quantified variant for a finitely branching step relation.

    ``succs(config)`` lists successor configurations and ``error(config)``
    flags erroneous ones; both default to the deterministic semantics.
    """
    if n < 1:
        raise ValueError("the index must be at least 1")
    succs = succs or default_succs
    error = error or default_error

    @functools.lru_cache(maxsize=None)
    def ev(k, c):
        if is_value(c.term) and not Q(c.term, c.store, k):
            return False
        if error(c):
            return False
        return k == 1 or all(ev(k - 1, c1) for c1 in succs(c))

    return ev(n, Config(t, Store() if s is None else s))


def safety_check(n: int, t) -> bool:
    """Typecheck ``t`` (raising on failure) and run it from the empty store."""
    typecheck(t)
    return eval_check(n, t, Store(), TRUE)


# ----------------------------------------------------------------------------
# Post-condition queries

_SHAPES = {
    "unit": lambda v: isinstance(v, Unit),
    "loc": lambda v: isinstance(v, Loc),
    "pair": lambda v: isinstance(v, Pair),
    "inl": lambda v: isinstance(v, Inl),
    "inr": lambda v: isinstance(v, Inr),
    "sum": lambda v: isinstance(v, (Inl, Inr)),
    "fold": lambda v: isinstance(v, Fold),
    "fun": lambda v: isinstance(v, (Lam, Fix)),
    "poly": lambda v: isinstance(v, TLam),
    "any": lambda v: True,
}


class QueryError(ValueError):
    pass


@dataclass(frozen=True)
class Query:
    """A conjunction of atomic post-conditions on the final value and store."""
    atoms: tuple
    max_steps: int | None = None

    def __call__(self, v, s: Store, k: int) -> bool:
        for atom in self.atoms:
            match atom:
                case ("result-is-unit",):
                    if not isinstance(v, Unit):
                        return False
                case ("result-is-loc",):
                    if not isinstance(v, Loc):
                        return False
                case ("store-has", loc, shape):
                    if loc not in s or not _SHAPES[shape](s.get(loc)):
                        return False
        return True

    def __str__(self):
        parts = [" ".join(str(x) if i != 1 or a[0] != "store-has" else f"#{x}"
                          for i, x in enumerate(a)) for a in self.atoms]
        if self.max_steps is not None:
            parts.append(f"steps<={self.max_steps}")
        return " && ".join(parts) or "true"


def parse_query(text: str) -> Query:
    """Parse ``atom && atom ...``; ``and`` and ``,`` also separate atoms."""
    atoms, max_steps = [], None
    for part in re.split(r"\s*(?:&&|,|\band\b)\s*", text.strip()):
        if not part or part == "true":
            continue
        words = part.split()
        m = re.fullmatch(r"steps\s*<=\s*(\d+)", part)
        if m:
            k = int(m.group(1))
            max_steps = k if max_steps is None else min(max_steps, k)
        elif words == ["result-is-unit"] or words == ["result-is-loc"]:
            atoms.append((words[0],))
        elif len(words) == 3 and words[0] == "store-has":
            loc = words[1].lstrip("#")
            if not loc.isdigit():
                raise QueryError(f"bad location {words[1]!r}")
            if words[2] not in _SHAPES:
                raise QueryError(f"unknown shape {words[2]!r}; expected one of "
                                 f"{', '.join(sorted(_SHAPES))}")
            atoms.append(("store-has", int(loc), words[2]))
        else:
            raise QueryError(f"cannot parse query atom {part!r}")
    return Query(tuple(atoms), max_steps)


def eval_query(n: int, t, s: Store | None, query: Query) -> bool:
    """``eval_check`` with a query; ``steps<=K`` bounds the steps to any value reached."""
    if query.max_steps is None:
        return eval_check(n, t, s, query)
    K = query.max_steps
    return eval_check(n, t, s, lambda v, st, k: n - k <= K and query(v, st, k))
