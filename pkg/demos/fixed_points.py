"""Contractive maps, their unique fixed points, and Löb induction.

Run with ``python3 demos/fixed_points.py``.
"""

from treetopos import logic as L
from treetopos import presheaf as ps

depth = 4
Om = ps.omega(depth)

# succ : ▶Ω -> Ω composed with next is contractive; its fixed point is "true".
succ = ps.succ_map(depth)
print("fix(succ) =", ps.fix(succ))
print("brute-force fixed points:", L.fixed_points(ps.compose(succ, ps.next_map(Om))))

# The identity is not contractive, and has many fixed points.
print("identity contractive?", ps.is_contractive_ext(ps.identity(Om)) is not None)
print("fixed points of the identity:", len(L.fixed_points(ps.identity(Om))))

# Löb: (▷p → p) → p holds at every level for every truth value p.
p = L.Var("p", Om)
lob = L.Forall("p", Om, L.Implies(L.Implies(L.Later(L.Holds(p)), L.Holds(p)), L.Holds(p)))
print("Löb at each level:", [L.force(n, lob, {}) for n in range(1, depth + 1)])

# ▷⊥ is true at level 1 only.
print("▷⊥ by level:", [L.force(n, L.Later(L.Bot()), {}) for n in range(1, depth + 1)])
