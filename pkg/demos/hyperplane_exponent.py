"""A point on a rational line, x = (1/3, sqrt(2) - 1), with weight (1/2, 1/2).

Points with a rational first coordinate are expected to have uniform exponent
1/(1 - w_1) = 2.  The best denominators are multiples of 3, and the per-gap
exponents climb towards 2 only logarithmically.
"""

from fractions import Fraction

from wdiophantine import Sqrt, Weight, best_sequence, epsilon_singular_certificate, uniform_exponent_estimate
from wdiophantine.structure import hyperplane_point

x = [Fraction(1, 3), Sqrt(2) - 1]
w = Weight.of(Fraction(1, 2), Fraction(1, 2))

seq = best_sequence(x, w, 10**6)
print("best denominators:", seq.qs)

est = uniform_exponent_estimate(x, w, 10**6, sequence=seq)
print("per-gap exponents:", ", ".join(f"{v:.3f}" for _, _, v in est.samples))
print(f"tail estimate {est.value:.4f} (limit 2)")

point = hyperplane_point(w, 1, [Fraction(1, 3)], [Sqrt(2) - 1])
cert = epsilon_singular_certificate(point.x, w, Fraction(9, 5), 10**5)
print(f"(1.8, w)-singular up to 1e5: {cert.success}, from Q0 = {cert.Q0}")
