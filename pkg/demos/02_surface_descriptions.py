"""From surface bookkeeping to dual complexes and smoothability arithmetic.

A normal-crossing surface is described by its strata (components, double
curves, triple points), their branch sets, and how branches continue when
one sheet is left out.  The dual complex is read straight off that data.
The two ways of merging three crossings into one triple point give the two
gluing patterns of the first demo; only one of them can possibly smooth to
a simply connected surface, and the degree arithmetic singles it out.
"""

from dualcx.ncgeom import (
    duncehat_curve_graph,
    duncehat_surface_description,
    dual_complex,
    generic_fiber_euler,
    kulikov_report,
    numerical_invariants,
    pi1_vanishing_verdict,
    pic0_structure,
    three_planes_description,
    wrong_case_surface_description,
)
from dualcx.simplicial import functor_p, isomorphic, make_duncehat, make_cyclic_triangle, make_single_2_simplex

right = duncehat_surface_description()
wrong = wrong_case_surface_description()

print("right case dual complex is the dunce hat:",
      isomorphic(dual_complex(right), functor_p(make_duncehat())))
print("wrong case dual complex is the cyclic triangle:",
      isomorphic(dual_complex(wrong), make_cyclic_triangle()))
print("three planes give a single ordinary triangle:",
      isomorphic(dual_complex(three_planes_description()), functor_p(make_single_2_simplex())))
print()

print("triple-point degree report (must vanish for smoothability):")
for row in kulikov_report(right):
    print("  double curve", row["curve"], "degree", row["degree"], "vanishes:", row["vanishes"])
print()

chi = generic_fiber_euler(right)
print("euler characteristic of the nearby fiber:", chi)
print("its invariants:", numerical_invariants(chi, 0, 0))
print()

torus = pic0_structure(duncehat_curve_graph())
print("gluing-data torus of the singular curve: dimension", torus.dimension)
print()

print("simple connectivity verdicts:")
print("  right case, components declared simply connected:",
      pi1_vanishing_verdict(right, [True]).status)
verdict = pi1_vanishing_verdict(wrong, [True])
print("  wrong case:", verdict.status, "-", verdict.reasons[0])
