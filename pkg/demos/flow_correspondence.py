"""Approximation exponents seen through the diagonal flow.

The shortest vector of a_t u_x Z^2 decays like e^{-t} for rational x and stays
bounded for the golden ratio; the decay rate tau and the uniform exponent sigma
are tied by sigma = (1 + tau)/(1 - tau).
"""

from fractions import Fraction

from wdiophantine import Weight, WeightSet, golden
from wdiophantine.dynamics import single_weight_equality_check, tau_hat_estimate, verify_sandwich

one = Weight.of(1)
for label, x in (("1/2", [Fraction(1, 2)]), ("golden", [golden()])):
    tr = tau_hat_estimate(x, one, t_max=15)
    tail = tr.samples[tr.window_start :]
    print(f"{label:>6}: tau_hat = {tr.tail_estimate:.4f}  (t from {tail[0][0]} to {tail[-1][0]})")

v = verify_sandwich([golden()], WeightSet.of(one), 10**6, 15, 0.1)
print(f"sandwich: {v.bounds['lower']:.4f} <= sigma_hat = {v.sigma:.4f} <= {v.bounds['upper']:.4f}")
eq = single_weight_equality_check([golden()], one, 10**6, 15, 0.1)
print(f"(1+tau)/(1-tau) = {eq.bounds['predicted_sigma']:.4f}, passed: {eq.passed}")
