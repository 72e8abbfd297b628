"""Acceptance criteria, each with its size and time bound.

Each test prints a one-line summary; the PASS/FAIL table is printed at the end
of the session by ``conftest.py``.
"""

import random
import time

import pytest

from treetopos import domain as D
from treetopos import fmuref as F
from treetopos import logic as L
from treetopos import metric as M
from treetopos import presheaf as ps
from treetopos.fmuref import syntax as S
from treetopos.fmuref.semantics import Config, Outcome

from gen import (
    all_presheaves, guard, random_covariant, random_formula, random_morphism,
    random_nonexpansive, random_presheaf, random_space,
)
from oracles import (
    arrow_to_two, direct_succ, eval_oracle, forest_of, forest_signature, later_forest,
    reflexive_iterates, rewrite_closed_form,
)


class Clock:
    def __init__(self, limit):
        self.limit = limit

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start
        if exc[0] is None:
            assert self.elapsed < self.limit, f"took {self.elapsed:.1f}s, bound {self.limit}s"


# ----------------------------------------------------------------------------


def brute_fixed_points(f):
    """Every global element fixed by ``f``, found from the top level down."""
    X = f.source
    n = X.depth
    found = []
    for top in X.level(n):
        picks = [top]
        for k in range(n - 1, 0, -1):
            picks.append(X.restriction(k)[picks[-1]])
        picks.reverse()
        if all(f(k, picks[k - 1]) == picks[k - 1] for k in range(1, n + 1)):
            found.append(tuple(picks))
    return found


@pytest.mark.criterion("fixed-point uniqueness (>=200 contractive endomorphisms, depth<=4, <30s)")
def test_fixed_point_uniqueness():
    rng = random.Random(2024)
    checked = 0
    with Clock(30):
        while checked < 250:
            depth = rng.randint(1, 4)
            X = random_presheaf(rng, depth, max_size=4)
            g = random_morphism(rng, ps.later_obj(X), X)
            if g is None:
                continue
            f = ps.compose(g, ps.next_map(X))
            assert ps.is_contractive_ext(f) is not None
            assert brute_fixed_points(f) == [ps.fix(g).picks]
            checked += 1
        # also every contractive endomorphism of a few small objects, exhaustively
        for seed in range(6):
            X = random_presheaf(random.Random(seed), 3, max_size=2, inhabited=True)
            for g in ps.hom_set(ps.later_obj(X), X):
                f = ps.compose(g, ps.next_map(X))
                assert brute_fixed_points(f) == [ps.fix(g).picks]
                checked += 1
    print(f"{checked} contractive endomorphisms, each with exactly one fixed point")


# ----------------------------------------------------------------------------


def later_members(A):
    """``▷A`` computed directly: everything at level 1, then preimages one level down."""
    X = A.ambient
    out = [set(X.level(1))]
    for k in range(1, X.depth):
        out.append({x for x in X.level(k + 1) if X.restriction(k)[x] in A.members[k - 1]})
    return out


@pytest.mark.criterion("Löb suite (every subobject of a generated family, depth<=3, <10s)")
def test_lob_suite():
    subs = 0
    with Clock(10):
        for depth in (1, 2, 3):
            for X in all_presheaves(depth, 2):
                x = L.Var("x", X)
                for A in ps.subobjects(X):
                    m = L.Rel(A, (x,))
                    lob = L.Implies(L.Implies(L.Later(m), m), m)
                    assert L.denote(lob, [("x", X)]).is_maximal()
                    if all(a <= set(b) for a, b in zip(later_members(A), A.members)):
                        assert A.is_maximal()
                    subs += 1
            p = L.Var("p", ps.omega(depth))
            closed = L.Forall("p", ps.omega(depth), L.Implies(
                L.Implies(L.Later(L.Holds(p)), L.Holds(p)), L.Holds(p)))
            assert all(L.force(n, closed, {}) for n in range(1, depth + 1))
    print(f"Löb checked on {subs} subobjects")


# ----------------------------------------------------------------------------


def maximal(phi, ctx):
    return L.denote(phi, ctx).is_maximal()


@pytest.mark.criterion("internal-logic rule families (>=500 random formulas, depth<=3, <60s)")
def test_internal_logic_rules():
    rng = random.Random(7)
    count = conv_exists = conv_forall = 0
    with Clock(60):
        while count < 520:
            depth = rng.randint(1, 3)
            X = random_presheaf(rng, depth, 3)
            Y = random_presheaf(rng, depth, 3, total=rng.random() < 0.5,
                                inhabited=rng.random() < 0.6)
            ctx = [("x", X)]
            phi = random_formula(rng, ctx + [("y", Y)], [X, Y], size=5)
            psi = random_formula(rng, ctx, [X, Y], size=4)
            chi = L.Exists("y", Y, phi)
            # 1: monotonicity, 2: Löb
            for a in (chi, psi):
                assert maximal(L.Implies(a, L.Later(a)), ctx)
                assert maximal(L.Implies(L.Implies(L.Later(a), a), a), ctx)
            # 3: ▷ commutes with the connectives and ⊤
            for op in (L.And, L.Or, L.Implies):
                assert (L.denote(L.Later(op(chi, psi)), ctx)
                        == L.denote(op(L.Later(chi), L.Later(psi)), ctx))
            assert maximal(L.Later(L.Top()), ctx)
            # 4: ∃ and ▷
            ex_l, ex_r = L.Exists("y", Y, L.Later(phi)), L.Later(L.Exists("y", Y, phi))
            assert maximal(L.Implies(ex_l, ex_r), ctx)
            if ps.is_total(Y) and Y.level(depth):
                assert L.denote(ex_l, ctx) == L.denote(ex_r, ctx)
                conv_exists += 1
            # 5: ∀ and ▷
            al_l, al_r = L.Later(L.Forall("y", Y, phi)), L.Forall("y", Y, L.Later(phi))
            assert maximal(L.Implies(al_l, al_r), ctx)
            if ps.is_total(Y):
                assert L.denote(al_l, ctx) == L.denote(al_r, ctx)
                conv_forall += 1
            count += 1

        # ▷⊥ is not ⊥
        assert not L.denote(L.Later(L.Bot()), (), depth=2) == L.denote(L.Bot(), (), depth=2)
        # non-total: Y(1) = {y}, Y(2) = ∅ and φ = ⊥ breaks ∀y.▷φ → ▷∀y.φ at level 2
        Y = ps.TruncatedPresheaf([["y"], []], [{}])
        conv = L.Implies(L.Forall("y", Y, L.Later(L.Bot())), L.Later(L.Forall("y", Y, L.Bot())))
        assert L.force(1, conv, {}) and not L.force(2, conv, {})
        # non-inhabited: Y(1) = ∅ breaks ▷∃y.⊤ → ∃y.▷⊤ at level 1
        E = ps.initial(2)
        conv = L.Implies(L.Later(L.Exists("y", E, L.Top())), L.Exists("y", E, L.Later(L.Top())))
        assert not L.force(1, conv, {})
    print(f"{count} formulas; {conv_exists} ∃-converses and {conv_forall} ∀-converses checked")


# ----------------------------------------------------------------------------


def rewrite_pred(X, R0):
    x, y, z = L.Var("x", X), L.Var("y", X), L.Var("z", X)
    body = L.Or(L.Eq(x, y),
                L.Exists("z", X, L.And(L.Rel(R0, (x, z)), L.Later(L.Rel("R", (z, y))))))
    return L.MuPred("R", (("x", X), ("y", X)), body)


@pytest.mark.criterion("rewrite closure closed form (|X|<=5, random R, depth<=6, <10s)")
def test_rewrite_closed_form():
    rng = random.Random(11)
    cases = 0
    with Clock(10):
        for _ in range(40):
            size, depth = rng.randint(1, 5), rng.randint(1, 6)
            elems = [f"e{i}" for i in range(size)]
            rel = {(a, b) for a in elems for b in elems if rng.random() < 0.25}
            X = ps.constant(depth, elems)
            XX = ps.product(X, X)
            R0 = ps.Subobject(XX, [rel] * depth)
            R = L.solve_mu_pred(rewrite_pred(X, R0))
            for n in range(1, depth + 1):
                assert set(R.members[n - 1]) == rewrite_closed_form(elems, rel, n)
            cases += 1
    print(f"{cases} relations agree with the closed form at every level")


# ----------------------------------------------------------------------------


@pytest.mark.criterion("streams (sizes 3,9,27,81,243; fixed-point succ = direct succ, <5s)")
def test_streams():
    with Clock(5):
        mu = D.TMu("X", D.TProd(D.TConst((0, 1, 2)), D.TLater(D.TVar("X"))))
        Str = D.eval_type(mu, depth=5)
        assert Str.sizes() == (3, 9, 27, 81, 243)

        def tail_map(prev, i):
            # J(next f) at level i: the unique map on ⋆ at level 1, then f one level down
            if i == 1:
                return {ps.STAR: ps.STAR}
            return prev[i - 2]

        def step(k, prev):
            # F(f)(a, t) = (a + 1, f t), a contractive map on Str -> Str
            out = []
            for i in range(1, k + 1):
                tails = tail_map(prev, i)
                out.append({s: ((s[0] + 1) % 3, tails[s[1]]) for s in Str.level(i)})
            return tuple(out)

        succ = ps.fix_sequence(step, 5)
        for k in range(1, 6):
            for i, h in enumerate(succ[k - 1], start=1):
                for s in Str.level(i):
                    assert h[s] == direct_succ(s, 3)
        # the recurrence is a morphism Str -> Str
        ps.Morphism(Str, Str, succ[-1])
    print("succ agrees with +1 mod 3 on all 363 prefixes")


# ----------------------------------------------------------------------------


@pytest.mark.criterion("mixed-variance solve (1,2,2,2,2; brute force; uniqueness at depth 3, <30s)")
def test_mixed_variance():
    with Clock(30):
        mu = D.parse_type("(mu X (later (arrow X (const 0 1))))")
        solved = D.solve(mu, depth=5)
        assert solved.object.sizes() == (1, 2, 2, 2, 2)
        brute = reflexive_iterates(5)[-1]
        assert tuple(len(lv) for lv in brute[0]) == (1, 2, 2, 2, 2)
        assert forest_signature(*forest_of(solved.object)) == forest_signature(*brute)
        assert ps.compose(solved.fold, solved.unfold) == ps.identity(solved.object)

        # every presheaf of depth 3 with levels of size <= 3, up to isomorphism
        solutions, seen = set(), 0
        for X in all_presheaves(3, 3):
            fx = forest_of(X)
            if forest_signature(*later_forest(*arrow_to_two(*fx))) == forest_signature(*fx):
                solutions.add(forest_signature(*fx))
            seen += 1
        assert solutions == {forest_signature(*forest_of(D.solve(mu, depth=3).object))}
    print(f"unique solution among {seen} presheaves of depth 3")


# ----------------------------------------------------------------------------


@pytest.mark.criterion("guarded functors raise iso rank (>=200 guarded functors and morphisms, <30s)")
def test_n_iso_rank_increases():
    rng = random.Random(99)
    checked, ranks = 0, set()
    with Clock(30):
        while checked < 220:
            e = guard(random_covariant(rng, rng.randint(1, 3)))
            depth = rng.randint(2, 4)
            A = random_presheaf(rng, depth, 2)
            if rng.random() < 0.4:
                B = A  # automorphisms and idempotents give high ranks
            else:
                B = random_presheaf(rng, depth, 2)
            f = random_morphism(rng, A, B)
            if f is None:
                continue
            try:
                Ff = D.functor_action(e, "X", None, f, cap=5_000)
            except ps.EnumerationCapExceeded:
                continue
            r = ps.n_iso_rank(f)
            assert ps.n_iso_rank(Ff) >= min(r + 1, depth)
            ranks.add(r)
            checked += 1
    assert len(ranks) >= 3
    print(f"{checked} functor/morphism pairs; source ranks seen {sorted(ranks)}")


# ----------------------------------------------------------------------------


@pytest.mark.criterion("language safety (>=25 good programs at index 1000, >=10 bad, <60s)")
def test_language_safety():
    corpus = F.corpus()
    good = bad = 0
    with Clock(60):
        for name, src in corpus.items():
            t = F.parse_program(src)
            expect = F.expectation(src)
            if expect is None:
                assert F.safety_check(1000, t), name
                good += 1
                continue
            with pytest.raises(F.TypeCheckError):
                F.typecheck(t)
            if expect == "stuck":
                assert F.run(Config(t), 1000).outcome is Outcome.STUCK, name
                assert not F.eval_check(1000, t)
            bad += 1
    assert good >= 25 and bad >= 10
    print(f"{good} well-typed programs safe; {bad} bad programs rejected")


# ----------------------------------------------------------------------------


def _shape(pred):
    return lambda v, s, k: pred(v)


def _index_at_most(K):
    return lambda v, s, k: k <= K


POSTS = [
    ("true", F.TRUE),
    ("false", lambda v, s, k: False),
    ("unit", _shape(lambda v: isinstance(v, S.Unit))),
    ("loc", _shape(lambda v: isinstance(v, S.Loc))),
    ("fold", _shape(lambda v: isinstance(v, S.Fold))),
    ("store0", lambda v, s, k: 0 in s),
    ("k<=3", _index_at_most(3)),
    ("k<=10", _index_at_most(10)),
]


def random_tuple(rng, programs):
    """A reachable configuration split as ``E[t]``, a post-condition pair ``Q ⊆ Q'``, an index."""
    t0 = rng.choice(programs)
    tr = F.run(Config(t0), rng.randint(0, 25))
    c = tr.final
    frames, redex = F.decompose(c.term)
    j = rng.randint(0, len(frames))
    E, inner = frames[:j], F.plug(frames[j:], redex)
    _, Q = rng.choice(POSTS)
    _, R = rng.choice(POSTS)
    Q2 = rng.choice([F.TRUE, Q, lambda v, s, k: Q(v, s, k) or R(v, s, k)])
    return c.store, E, inner, Q, Q2, rng.randint(1, 20)


@pytest.mark.criterion("eval laws (consequence, bind, oracle; >=300 tuples, index<=20, <60s)")
def test_eval_laws():
    rng = random.Random(31)
    programs = [F.parse_program(src) for src in F.corpus().values()]
    n_tuples = 0
    with Clock(60):
        while n_tuples < 320:
            s, E, t, Q, Q2, n = random_tuple(rng, programs)
            assert F.is_eval_context(E)
            whole = F.plug(E, t)
            # consequence
            if F.eval_check(n, t, s, Q):
                assert F.eval_check(n, t, s, Q2)

            # bind
            def bound(v, s1, k, E=E, Q=Q):
                return F.eval_check(k, F.plug(E, v), s1, Q)

            def bound_oracle(v, s1, k, E=E, Q=Q):
                return eval_oracle(k, F.plug(E, v), s1, Q)

            lhs = F.eval_check(n, whole, s, Q)
            assert lhs == F.eval_check(n, t, s, bound)
            # the oracle, on every instance used above
            assert lhs == eval_oracle(n, whole, s, Q)
            assert F.eval_check(n, t, s, Q) == eval_oracle(n, t, s, Q)
            assert F.eval_check(n, t, s, Q2) == eval_oracle(n, t, s, Q2)
            assert F.eval_check(n, t, s, bound) == eval_oracle(n, t, s, bound_oracle)
            n_tuples += 1
    print(f"{n_tuples} (configuration, context, post-condition, index) tuples")


# ----------------------------------------------------------------------------


@pytest.mark.criterion("metric bridge (>=100 spaces, <=6 points, exponents<=5, depth 6, <20s)")
def test_metric_bridge():
    rng = random.Random(5)
    spaces = nonempty = 0
    empty_seen = False
    with Clock(20):
        while spaces < 120 or not empty_seen:
            Sp = random_space(rng, max_points=6, max_exp=5)
            X = M.to_presheaf(Sp, 6)
            # round trip
            back = M.from_presheaf(X)
            iso = {x: frozenset(y for y in Sp.points if Sp.agree(x, y, 6)) for x in Sp.points}
            assert M.is_isometry(iso, Sp, back)
            assert ps.is_isomorphic(M.to_presheaf(back, 6), X)
            if Sp.points:
                # contractiveness
                for _ in range(3):
                    f = random_nonexpansive(rng, Sp)
                    mor = M.map_to_presheaf(Sp, f, 6)
                    assert M.is_contractive_metric(Sp, f) == (ps.is_contractive_ext(mor) is not None)
                # halving is ▶
                assert ps.is_isomorphic(M.to_presheaf(M.half_space(Sp), 6), ps.later_obj(X))
                nonempty += 1
            else:
                empty_seen = True
                assert M.to_presheaf(M.half_space(Sp), 6).sizes() == (0,) * 6
                assert ps.later_obj(X).sizes() == (1,) + (0,) * 5
            spaces += 1
    print(f"{spaces} spaces ({nonempty} nonempty); the empty space is the only exception")
