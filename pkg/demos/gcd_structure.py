"""gcd structure of consecutive best approximations in the plane.

For x = (a, (a+1)/2) the coordinates are rationally dependent, so numerators of
consecutive approximants obey p_2 = p_1/2 + q/2 and the ratio classifier settles
on (1/2, 1/2).  A generic pair only contributes the early, trivial gaps.
"""

from fractions import Fraction

from wdiophantine import Sqrt
from wdiophantine.structure import consecutive_pair_analysis, exponent_relation_check

a = Sqrt(2) - 1
dep = consecutive_pair_analysis([a, (a + 1) / 2], Fraction(4, 5), 10**6)
print(f"dependent: {dep.classification}, coefficients {tuple(map(str, dep.coefficients))}")
for row in dep.rows[:5]:
    print(f"  n={row.n:2d} q={row.q:>7} -> {row.q_next:>7}  r={row.r}  ell={row.ell}  k={row.k}  {row.label}")

gen = consecutive_pair_analysis([a, Sqrt(3) - 1], Fraction(4, 5), 10**6)
print(f"generic: {len(gen.rows)} selected gap(s), bounds hold: {gen.all_bounds_hold()}")

for s2 in (Fraction(4, 5), Fraction(9, 10)):
    print(f"sigma2 = {s2} -> sigma1 = {exponent_relation_check(s2)}")
