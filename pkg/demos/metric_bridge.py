"""Ultrametric spaces with power-of-two distances as presheaves.

Run with ``python3 demos/metric_bridge.py``.
"""

from treetopos import metric as M
from treetopos import presheaf as ps

space = M.BisectedSpace(["aa", "ab", "b"], {("aa", "ab"): 2, ("aa", "b"): 0, ("ab", "b"): 0})
X = M.to_presheaf(space, 4)
print("agreement classes per level:", X.sizes())
print("round trip:", M.from_presheaf(X).to_json())

# Halving distances is the later functor.
print("½X ≅ ▶X:", ps.is_isomorphic(M.to_presheaf(M.half_space(space), 4), ps.later_obj(X)))

# A map that halves distances is exactly one that factors through next.
f = {"aa": "aa", "ab": "aa", "b": "ab"}
print("contractive:", M.is_contractive_metric(space, f),
      "factors through next:", ps.is_contractive_ext(M.map_to_presheaf(space, f, 4)) is not None)

empty = M.BisectedSpace([], {})
print("empty: ½∅ gives", M.to_presheaf(M.half_space(empty), 3).sizes(),
      "but ▶∅ has", ps.later_obj(M.to_presheaf(empty, 3)).sizes())
