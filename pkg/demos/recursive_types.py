"""Guarded recursive types: streams and a mixed-variance equation.

Run with ``python3 demos/recursive_types.py``.
"""

from treetopos import domain as D
from treetopos import presheaf as ps

streams = D.parse_type("(mu X (prod (const 0 1 2) (later X)))")
S = D.solve(streams, depth=5)
print("streams over three letters:", S.object.sizes())
print("a level-3 element:", S.object.level(3)[5])

# X ≅ ▶(X -> 2): X occurs negatively, yet the iteration still settles.
refl = D.parse_type("(mu X (later (arrow X (const 0 1))))")
print("approximants:", [X.sizes() for X in D.approximants(refl, depth=5)])
R = D.solve(refl, depth=5)
print("solution:", R.object.sizes(), "fold is iso:", R.fold.is_iso())

# An unguarded equation has no unique solution and is rejected.
try:
    D.solve(D.parse_type("(mu X (arrow X X))"), depth=3)
except D.TypeExprError as exc:
    print("rejected:", exc)

# Guarded functors raise the agreement level of maps by one.
F = D.parse_type("(prod (const a) (later X))")
A = ps.constant(3, "pq")
B = ps.constant(3, "r")
f = ps.from_function(A, B, lambda k, x: "r")
print("rank of f:", ps.n_iso_rank(f), "rank of F f:",
      ps.n_iso_rank(D.functor_action(F, "X", None, f)))
