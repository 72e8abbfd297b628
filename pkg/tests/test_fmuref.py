import pytest
from hypothesis import given, settings, strategies as st

from treetopos import fmuref as F
from treetopos.fmuref import syntax as S
from treetopos.fmuref.semantics import Config, Outcome, Store

from oracles import eval_oracle

CORPUS = F.corpus()
GOOD = {k: v for k, v in CORPUS.items() if F.expectation(v) is None}
BAD = {k: v for k, v in CORPUS.items() if F.expectation(v) is not None}


def P(text):
    return F.parse_program(text)


# ----------------------------------------------------------------------------
# Parsing and printing


def test_parse_lambda_and_ref():
    assert P(r"\x:1. x") == S.Lam(S.TyUnit(), S.Var(0))
    assert P("ref ()") == S.Ref(S.Unit())


def test_alpha_equivalent_terms_are_equal():
    assert P(r"\x:1. x") == P(r"\y:1. y")
    assert F.parse_srctype("forall a. a -> a") == F.parse_srctype("forall b. b -> b")


def test_parse_error_has_location():
    with pytest.raises(F.ParseError) as err:
        P("\\x:1. (x")
    assert ":" in str(err.value)


@pytest.mark.parametrize("name", sorted(CORPUS))
def test_print_parse_round_trip(name):
    t = P(CORPUS[name])
    assert P(F.show(t)) == t


def test_type_precedence():
    assert F.parse_srctype("1 + 1 -> 1") == S.TyArrow(S.TySum(S.TyUnit(), S.TyUnit()), S.TyUnit())
    assert F.parse_srctype("1 -> 1 -> 1") == S.TyArrow(S.TyUnit(), S.TyArrow(S.TyUnit(), S.TyUnit()))


# ----------------------------------------------------------------------------
# Typing


def test_typecheck_examples():
    assert F.typecheck(P(r"\x:1. x")) == S.TyArrow(S.TyUnit(), S.TyUnit())
    assert F.typecheck(P(r"/\a. \x:a. x")) == F.parse_srctype("forall a. a -> a")
    omega = P(r"\x:(mu a. a -> 1). (unfold x) x")
    assert F.typecheck(omega) == F.parse_srctype("(mu a. a -> 1) -> 1")


def test_self_application_via_fold():
    src = r"""let w:(mu a. a -> 1) -> 1 = \x:(mu a. a -> 1). (unfold x) x in
              w (fold[mu a. a -> 1] w)"""
    assert F.typecheck(P(src)) == S.TyUnit()


@pytest.mark.parametrize("name", sorted(GOOD))
def test_good_programs_typecheck(name):
    F.typecheck(P(GOOD[name]))


@pytest.mark.parametrize("name", sorted(BAD))
def test_bad_programs_are_ill_typed(name):
    with pytest.raises(F.TypeCheckError):
        F.typecheck(P(BAD[name]))


def test_locations_need_a_store_typing():
    with pytest.raises(F.TypeCheckError):
        F.typecheck(P("#0"))


# ----------------------------------------------------------------------------
# Reduction


def test_step_examples():
    c = F.step(Config(P(r"(\x:1. x) ()")))
    assert c == Config(S.Unit(), Store())
    c = F.step(Config(P("ref ()")))
    assert c == Config(S.Loc(0), Store.of({0: S.Unit()}))
    assert F.step(Config(P("fst ()"))) is Outcome.STUCK
    assert F.step(Config(S.Unit())) is Outcome.VALUE


def test_least_free_location():
    s = Store.of({0: S.Unit(), 2: S.Unit()})
    assert F.step(Config(P("ref ()"), s)).term == S.Loc(1)


def test_absent_location_is_stuck():
    assert F.step(Config(P("!#3"))) is Outcome.STUCK
    assert F.step(Config(P("#3 := ()"))) is Outcome.STUCK


def test_left_to_right():
    t = P("(ref (), ref ((), ()))")
    tr = F.run(Config(t), 10)
    assert tr.final.term == S.Pair(S.Loc(0), S.Loc(1))
    assert tr.final.store.get(1) == S.Pair(S.Unit(), S.Unit())


def test_run_examples():
    assert F.run(Config(S.Unit()), 10).outcome is Outcome.VALUE
    assert F.run(Config(S.Unit()), 10).steps == 0
    stuck = F.run(Config(P("fst ()")), 10)
    assert stuck.outcome is Outcome.STUCK and stuck.steps == 0
    for fuel in (0, 5, 200):
        tr = F.run(Config(P(CORPUS["landin_knot.fmr"])), fuel)
        assert tr.outcome is Outcome.FUEL and len(tr.configs) <= fuel + 1


def test_counter_result():
    tr = F.run(Config(P(CORPUS["store_counter.fmr"])), 1000)
    assert tr.outcome is Outcome.VALUE
    assert F.show(tr.final.term).count("inr") == 3


def test_determinism():
    t = P(CORPUS["higher_order_store.fmr"])
    assert F.run(Config(t), 500).configs == F.run(Config(t), 500).configs


def test_decompose_and_plug():
    t = P(r"fst ((\x:1. x) (), ())")
    ctx, redex = F.decompose(t)
    assert F.is_eval_context(ctx)
    assert F.plug(ctx, redex) == t
    assert redex == P(r"(\x:1. x) ()")


# ----------------------------------------------------------------------------
# The guarded evaluation predicates


def unit_result(v, s, k):
    return isinstance(v, S.Unit)


def test_eval_examples():
    assert F.eval_check(5, S.Unit(), Store(), unit_result)
    loop = P(r"(fix f(x:1):1. f x) ()")
    never = lambda v, s, k: False  # noqa: E731
    for n in (1, 2, 7, 50):
        assert F.eval_check(n, loop, Store(), never)
    assert not F.eval_check(3, P("fst ()"), Store(), F.TRUE)


def test_stuck_at_index_one_follows_the_definition():
    # Neither disjunct holds for a stuck non-value, not even at index 1.
    t = P("fst ()")
    assert F.eval_check(1, t, Store(), F.TRUE) == eval_oracle(1, t, Store(), F.TRUE) is False


def test_stuck_after_one_step():
    t = P(r"fst ((\x:1. x) ())")
    assert F.eval_check(1, t, Store(), F.TRUE)
    assert not F.eval_check(2, t, Store(), F.TRUE)


@pytest.mark.parametrize("name", sorted(CORPUS))
def test_eval_matches_oracle_on_corpus(name):
    t = P(CORPUS[name])
    for n in range(1, 16):
        for Q in (F.TRUE, unit_result):
            assert F.eval_check(n, t, Store(), Q) == eval_oracle(n, t, Store(), Q)


@pytest.mark.parametrize("name", sorted(CORPUS))
def test_eval_is_downward_closed(name):
    t = P(CORPUS[name])
    vals = [F.eval_check(n, t, Store(), F.TRUE) for n in range(1, 31)]
    assert vals == sorted(vals, reverse=True)


@pytest.mark.parametrize("name", sorted(CORPUS))
def test_evalprime_deterministic_agrees(name):
    t = P(CORPUS[name])
    for n in (1, 3, 10):
        assert F.evalprime_check(n, t, Store()) == F.eval_check(n, t, Store())


def test_evalprime_two_state_system():
    a, b = Config(P("fst ()")), Config(S.Unit())
    succs = {a: (a, b), b: ()}.__getitem__
    for n in range(1, 12):
        assert F.evalprime_check(n, a.term, a.store, F.TRUE, succs, lambda c: False)


def test_evalprime_error_after_one_step():
    a, e = Config(P("fst ()")), Config(P("snd ()"))
    succs = {a: (e,), e: ()}.__getitem__
    error = lambda c: c == e  # noqa: E731
    assert F.evalprime_check(1, a.term, a.store, F.TRUE, succs, error)
    for n in (2, 3, 8):
        assert not F.evalprime_check(n, a.term, a.store, F.TRUE, succs, error)


@pytest.mark.parametrize("name", sorted(GOOD))
def test_safety_of_good_programs(name):
    assert F.safety_check(1000, P(GOOD[name]))


def test_safety_rejects_ill_typed():
    with pytest.raises(F.TypeCheckError):
        F.safety_check(10, P("fst ()"))


@given(st.integers(1, 300))
@settings(max_examples=30, deadline=None)
def test_knot_is_safe_at_every_index(n):
    assert F.safety_check(n, P(CORPUS["landin_knot.fmr"]))


# ----------------------------------------------------------------------------
# Queries


def test_query_parsing():
    q = F.parse_query("result-is-unit && store-has #0 fold, steps<=40")
    assert q.atoms == (("result-is-unit",), ("store-has", 0, "fold"))
    assert q.max_steps == 40
    with pytest.raises(F.QueryError):
        F.parse_query("store-has x fold")
    with pytest.raises(F.QueryError):
        F.parse_query("result-is-banana")


def test_eval_query_on_counter():
    t = P(CORPUS["store_counter.fmr"])
    assert F.eval_query(1000, t, Store(), F.parse_query("store-has #0 fold"))
    assert not F.eval_query(1000, t, Store(), F.parse_query("result-is-unit"))
    steps = F.run(Config(t), 1000).steps
    assert F.eval_query(1000, t, Store(), F.parse_query(f"steps<={steps}"))
    assert not F.eval_query(1000, t, Store(), F.parse_query(f"steps<={steps - 1}"))
    # too small an index never reaches the value, so the bound is not observed
    assert F.eval_query(steps, t, Store(), F.parse_query("steps<=0"))
