"""Programs with recursive types and higher-order store.

Run with ``python3 demos/store_programs.py``.
"""

from treetopos import fmuref as F
from treetopos.fmuref import Config, Store

knot = F.parse_program(r"""
let r:ref (1 -> 1) = ref (\x:1. x) in
r := (\x:1. (!r) x);
(!r) ()
""")
print("knot :", F.show_type(F.typecheck(knot)))
trace = F.run(Config(knot), 40)
print("after 40 steps:", trace.outcome.value, "with store", trace.final.store)
print("safe at index 1000:", F.safety_check(1000, knot))

stuck = F.parse_program("fst ()")
print("fst () steps to:", F.step(Config(stuck)))
print("eval at indices 1..3:", [F.eval_check(n, stuck) for n in (1, 2, 3)])

counter = F.parse_program(F.corpus()["store_counter.fmr"])
q = F.parse_query("store-has #0 fold && steps<=60")
print("counter post-condition:", q, "->", F.eval_query(500, counter, Store(), q))

# Membership in the Kripke model, checked against a small pool.
pool = F.default_pool()
w = F.SynWorld.of({})
bad = F.parse_program(r"\x:1*1. fst x")
print("λx.fst x ∈ 1->1 ?", F.member_check(bad, F.parse_srctype("1 -> 1"), w, 3, pool))
good = F.parse_program(r"/\a. \x:a. x")
print("Λa.λx.x ∈ ∀a.a->a ?",
      F.member_check(good, F.parse_srctype("forall a. a -> a"), w, 3, pool))
