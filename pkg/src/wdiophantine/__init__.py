"""Computable weighted Diophantine approximation."""

from .approx import (
    Approximant,
    BestSequence,
    CertificateReport,
    ExponentEstimate,
    best_sequence,
    dirichlet_certificate,
    dirichlet_solve,
    epsilon_singular_certificate,
    min_error,
    ordinary_exponent_estimate,
    sigma_hat_W_estimate,
    singular_certificate,
    uniform_exponent_estimate,
)
from .core import (
    QuasiNormValue,
    TargetVector,
    Weight,
    WeightSet,
    as_target,
    quasi_norm,
    quasi_norm_leq,
    weight_restriction,
)
from .dynamics import (
    FlowPoint,
    RateTrace,
    SubmoduleBasis,
    covolume_decomposition_check,
    delta,
    delta_quasi,
    delta_W,
    single_weight_equality_check,
    submodule_covolume,
    tau_hat_estimate,
    verify_sandwich,
)
from .errors import *  # noqa: F401,F403
from .reals import ComputableReal, ContinuedFraction, Liouville, Sqrt, continued_fraction, golden, quadratic_tail
from .structure import (
    AffineMap,
    PairDecomposition,
    PolynomialMap,
    SolutionFamily,
    consecutive_pair_analysis,
    continued_fraction_vector,
    exponent_relation_check,
    hyperplane_point,
    inheritance_probe,
    solve_linear_diophantine,
)

__version__ = "0.1.0"
