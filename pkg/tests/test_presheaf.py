import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from treetopos import presheaf as ps
from treetopos.presheaf import STAR

from gen import random_morphism, random_presheaf


def seeded(seed, **kw):
    return random_presheaf(random.Random(seed), **kw)


def test_constant_and_omega():
    X = ps.constant(3, "ab")
    assert X.sizes() == (2, 2, 2)
    assert X.restrict("a", 3, 1) == "a"
    assert ps.omega(3).level(2) == (0, 1, 2)
    assert ps.omega(3).restriction(2)[3] == 2
    assert ps.omega(3).restriction(2)[1] == 1


def test_bad_restriction_rejected():
    with pytest.raises(ps.PresheafError):
        ps.TruncatedPresheaf([["a"], ["b"]], [{"b": "zz"}])
    with pytest.raises(ps.PresheafError):
        ps.TruncatedPresheaf([["a"], ["b"]], [{}])


def test_naturality_is_checked():
    X = ps.TruncatedPresheaf([["a"], ["b", "c"]], [{"b": "a", "c": "a"}])
    Y = ps.TruncatedPresheaf([["p", "q"], ["r", "s"]], [{"r": "p", "s": "q"}])
    ps.Morphism(X, Y, [{"a": "p"}, {"b": "r", "c": "r"}])
    with pytest.raises(ps.PresheafError):
        ps.Morphism(X, Y, [{"a": "p"}, {"b": "r", "c": "s"}])


def test_json_round_trip():
    X = seeded(3, depth=3)
    assert ps.TruncatedPresheaf.from_json(X.to_json()) == X
    f = random_morphism(random.Random(1), X, X)
    if f is not None:
        assert ps.Morphism.from_json(f.to_json()) == f


def test_later_shape_and_next():
    X = ps.constant(3, "ab")
    L = ps.later_obj(X)
    assert L.sizes() == (1, 2, 2)
    assert ps.later_obj(X, grow=True).sizes() == (1, 2, 2, 2)
    nxt = ps.next_map(X)
    assert nxt(1, "a") == STAR and nxt(3, "b") == "b"


def test_later_of_empty_is_not_empty():
    E = ps.initial(3)
    assert ps.later_obj(E).sizes() == (1, 0, 0)


@given(st.integers(0, 10_000))
@settings(max_examples=40, deadline=None)
def test_later_is_functorial(seed):
    rng = random.Random(seed)
    X, Y = random_presheaf(rng, 3), random_presheaf(rng, 3)
    f = random_morphism(rng, X, Y)
    g = random_morphism(rng, Y, X)
    if f is None or g is None:
        return
    assert ps.later_mor(ps.compose(g, f)) == ps.compose(ps.later_mor(g), ps.later_mor(f))
    assert ps.later_mor(ps.identity(X)) == ps.identity(ps.later_obj(X))
    # next is natural
    assert ps.compose(ps.next_map(Y), f) == ps.compose(ps.later_mor(f), ps.next_map(X))


def test_product_projection_pairing():
    X, Y = ps.constant(2, "ab"), ps.omega(2)
    P = ps.product(X, Y)
    assert P.sizes() == (4, 6)
    p1, p2 = ps.projection(P, 0), ps.projection(P, 1)
    assert ps.pairing(p1, p2) == ps.identity(P)


def test_coproduct_sizes():
    X, Y = ps.constant(2, "ab"), ps.omega(2)
    assert ps.coproduct(X, Y).sizes() == (4, 5)


def _count_natural(X, Y):
    """Hom-set size by brute force over all level maps, checked for naturality."""
    count = 0
    choices = [list(itertools.product(Y.level(k), repeat=len(X.level(k))))
               for k in range(1, X.depth + 1)]
    for imgs in itertools.product(*choices):
        comps = [dict(zip(X.level(k), imgs[k - 1])) for k in range(1, X.depth + 1)]
        if all(comps[k - 1][X.restriction(k)[x]] == Y.restriction(k)[comps[k][x]]
               for k in range(1, X.depth) for x in X.level(k + 1)):
            count += 1
    return count


@given(st.integers(0, 10_000))
@settings(max_examples=30, deadline=None)
def test_hom_set_matches_brute_force(seed):
    rng = random.Random(seed)
    X, Y = random_presheaf(rng, 2, 2), random_presheaf(rng, 2, 3)
    assert len(ps.hom_set(X, Y)) == _count_natural(X, Y)


@given(st.integers(0, 10_000))
@settings(max_examples=25, deadline=None)
def test_exponential_top_level_counts_morphisms(seed):
    # Y^X(n) at the top level is Hom(y(n) × X, Y), i.e. Hom(X, Y) when truncated at n.
    rng = random.Random(seed)
    X, Y = random_presheaf(rng, 2, 2), random_presheaf(rng, 2, 2)
    E = ps.exponential(X, Y)
    assert len(E.level(2)) == len(ps.hom_set(X, Y))


def test_evaluation_and_curry():
    X, Y = ps.constant(2, "ab"), ps.omega(2)
    ev = ps.evaluation(X, Y)
    g = ps.from_function(ps.product(X, Y), Y, lambda k, p: p[1] if p[0] == "a" else 0)
    named = ps.curry(g)
    for k in (1, 2):
        for a, b in ps.product(X, Y).level(k):
            assert ev(k, (named(k, b), a)) == g(k, (a, b))


def test_char_and_sub_of_char_inverse():
    X = seeded(7, depth=3)
    for A in ps.subobjects(X):
        assert ps.sub_of_char(ps.char(A)) == A


def test_later_sub_on_omega_truth():
    T = ps.truth(3)
    L = ps.later_sub(T)
    # ▷⊤ is still everything that restricts into ⊤ one step earlier
    assert L.members[0] == frozenset({0, 1})
    assert L.members[1] == frozenset({1, 2})


def test_later_omega_matches_char_of_later_truth():
    assert ps.later_omega(3) == ps.char(ps.later_sub(ps.truth(3)))


def test_contractive_extension_and_fix():
    X = ps.omega(3)
    succ = ps.succ_map(3)
    f = ps.compose(succ, ps.next_map(X))
    g = ps.is_contractive_ext(f)
    assert g is not None and ps.compose(g, ps.next_map(X)) == f
    # the fixed point of succ is "true at every level"
    assert ps.fix(succ).picks == (1, 2, 3)
    assert ps.is_contractive_ext(ps.identity(X)) is None


def test_fix_map_agrees_with_fix():
    X = ps.constant(2, "ab")
    F = ps.fix_map(X)
    E = F.source
    L = ps.later_obj(X)
    for fn in E.level(2):
        g = ps.morphism_from_name(L, X, fn)
        assert F(2, fn) == ps.fix(g).at(2)


def test_later_transpose_round_trip():
    X = seeded(11, depth=3)
    Y = ps.constant(2, "ab")
    for g in ps.hom_set(ps.earlier_obj(X), Y):
        f = ps.later_transpose(g, X)
        assert ps.earlier_transpose(f) == g


@given(st.integers(0, 10_000))
@settings(max_examples=40, deadline=None)
def test_find_iso_on_relabelled_copy(seed):
    rng = random.Random(seed)
    X = random_presheaf(rng, 3)
    ren = [{x: f"r{k}-{rng.random()}" for x in X.level(k)} for k in range(1, 4)]
    Y = ps.TruncatedPresheaf([[ren[k - 1][x] for x in X.level(k)] for k in range(1, 4)],
                             [{ren[k][x]: ren[k - 1][y] for x, y in X.restriction(k).items()}
                              for k in range(1, 3)])
    iso = ps.find_iso(X, Y)
    assert iso is not None and iso.is_iso()


def test_non_isomorphic_same_sizes():
    X = ps.TruncatedPresheaf([["a", "b"], ["c", "d"]], [{"c": "a", "d": "a"}])
    Y = ps.TruncatedPresheaf([["a", "b"], ["c", "d"]], [{"c": "a", "d": "b"}])
    assert not ps.is_isomorphic(X, Y)


def test_n_iso_rank():
    X = ps.constant(3, "ab")
    Y = ps.TruncatedPresheaf([["p", "q"], ["p1", "q1"], ["p2", "q2", "q3"]],
                             [{"p1": "p", "q1": "q"}, {"p2": "p1", "q2": "q1", "q3": "q1"}])
    f = ps.from_function(X, Y, lambda k, x: {1: {"a": "p", "b": "q"},
                                              2: {"a": "p1", "b": "q1"},
                                              3: {"a": "p2", "b": "q2"}}[k][x])
    assert ps.n_iso_rank(f) == 2


def test_enumeration_cap():
    X = ps.constant(2, "abcd")
    with pytest.raises(ps.EnumerationCapExceeded):
        ps.hom_set(X, X, cap=10)


def test_encoding_is_deterministic():
    X = ps.product(ps.constant(2, "ba"), ps.omega(2))
    assert ps.dumps(X) == ps.dumps(ps.product(ps.constant(2, "ab"), ps.omega(2)))
