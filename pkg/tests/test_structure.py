from fractions import Fraction as F

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from wdiophantine import (
    ContainmentViolation,
    DimensionMismatch,
    DomainError,
    InsufficientData,
    Sqrt,
    Weight,
    as_target,
    best_sequence,
    golden,
    quadratic_tail,
)
from wdiophantine.structure import (
    AffineMap,
    PolynomialMap,
    consecutive_pair_analysis,
    continued_fraction_vector,
    curve_in_subspace,
    exponent_relation_check,
    hyperplane_point,
    inheritance_probe,
    solve_linear_diophantine,
)
from wdiophantine.structure import _row

H = F(1, 2)
HH = Weight.of(H, H)
ALPHA = Sqrt(2) - 1


# aX - bY = c ---------------------------------------------------------------------------------

@pytest.mark.parametrize(
    "abc,base,steps",
    [((3, 5, 1), (2, 1), (5, 3)), ((4, 6, 2), (2, 1), (3, 2))],
)
def test_diophantine_examples(abc, base, steps):
    fam = solve_linear_diophantine(*abc)
    assert (fam.base, fam.steps) == (base, steps)


def test_diophantine_none_and_precondition():
    assert solve_linear_diophantine(4, 6, 3) is None
    with pytest.raises(DomainError):
        solve_linear_diophantine(0, 0, 1)


@given(st.integers(-50, 50), st.integers(-50, 50), st.integers(-100, 100))
def test_diophantine_vs_exhaustive(a, b, c):
    if a == 0 and b == 0:
        return
    fam = solve_linear_diophantine(a, b, c)
    found = oracles.diophantine_exists(a, b, c)
    assert (fam is None) == (found is None)
    if fam is None:
        return
    assert fam.contains(*found)
    for n in (-3, 0, 1, 7):
        X, Y = fam.at(n)
        assert a * X - b * Y == c
    if b:
        assert 0 <= fam.base[0] < abs(b // fam.g)


# consecutive pairs ---------------------------------------------------------------------------

DEPENDENT = [ALPHA, (ALPHA + 1) / 2]


def test_dependent_pair_is_stable():
    dec = consecutive_pair_analysis(DEPENDENT, F(4, 5), 10**6)
    assert dec.classification == "stable"
    assert dec.coefficients == (H, H)
    assert dec.identity_holds
    assert dec.all_reconstruct() and dec.all_bounds_hold()


def test_generic_pair_bounds():
    dec = consecutive_pair_analysis([ALPHA, Sqrt(3) - 1], F(4, 5), 10**6)
    assert dec.rows and dec.all_bounds_hold() and dec.all_reconstruct()
    for r in dec.rows:
        bound = 2 * r.q_next ** (1 - 0.8)
        assert all(r.r * abs(l) < bound for l in r.ell)


@pytest.mark.parametrize(
    "x",
    [DEPENDENT, [ALPHA, Sqrt(3) - 1], [golden(), quadratic_tail(3)], [F(1, 3), ALPHA], [F(3, 7), F(5, 11)]],
)
def test_every_consecutive_pair_reconstructs(x):
    # all pairs, not just the selected ones: the identities are unconditional
    x = as_target(x)
    seq = best_sequence(x, Weight.standard(2), 10**5)
    for n, (a, b) in enumerate(zip(seq.entries, seq.entries[1:])):
        row = _row(n, a, b, x, F(4, 5))
        assert row.reconstructs()


def test_pair_domain_and_empty():
    with pytest.raises(DomainError):
        consecutive_pair_analysis(DEPENDENT, F(3, 4), 1000)
    with pytest.raises(InsufficientData):
        consecutive_pair_analysis([golden(), quadratic_tail(3)], F(99, 100), 1)


def test_pair_columns():
    cols = consecutive_pair_analysis(DEPENDENT, F(4, 5), 10**4).columns()
    assert cols["n"] == sorted(cols["n"]) and len(set(map(len, cols.values()))) == 1


# exponent relation ----------------------------------------------------------------------------

def test_relation_examples():
    assert exponent_relation_check(F(4, 5)) == F(6, 5)
    assert exponent_relation_check(F(9, 10)) == F(18, 5)
    assert exponent_relation_check(F(3, 4)) == F(3, 4)
    assert exponent_relation_check(0.8) == F(6, 5)
    for bad in (F(1, 2), 1, F(11, 10)):
        with pytest.raises(DomainError):
            exponent_relation_check(bad)


@given(st.fractions(min_value=F(3, 4), max_value=F(999, 1000)), st.fractions(min_value=F(3, 4), max_value=F(999, 1000)))
def test_relation_monotone(a, b):
    if a < b:
        assert exponent_relation_check(a) < exponent_relation_check(b)


# constructions ---------------------------------------------------------------------------------

def test_hyperplane_examples():
    p = hyperplane_point(HH, 1, [F(1, 3)])
    assert p.predicted_epsilon == 2
    assert p.verify(10**5).success
    assert hyperplane_point(HH, 1, [0]).predicted_epsilon == 2
    third = Weight.of(F(1, 3), F(1, 3), F(1, 3))
    assert hyperplane_point(third, 2, [0, H]).predicted_epsilon == 3
    assert hyperplane_point(Weight.of(F(1, 4), F(3, 4)), 1, [H]).predicted_epsilon == F(4, 3)


def test_hyperplane_errors():
    with pytest.raises(DomainError):
        hyperplane_point(HH, 2, [0, 0])
    with pytest.raises(DimensionMismatch):
        hyperplane_point(HH, 1, [0, 0])
    with pytest.raises(DomainError):
        hyperplane_point(Weight.of(1, 0), 1, [0])


def test_zero_head_reduces_to_one_dimension():
    p = hyperplane_point(HH, 1, [0], [ALPHA])
    a = best_sequence(p.x, HH, 1000).qs
    assert a == best_sequence([ALPHA], Weight.of(1), 1000).qs


def test_cf_vectors():
    assert continued_fraction_vector("ones").sigma == 1
    assert abs(continued_fraction_vector("ones").growth_estimate() - 1) < 0.25
    assert abs(continued_fraction_vector("index").growth_estimate() - 1) < 0.35
    sq = continued_fraction_vector("square")
    assert sq.sigma == 2 and abs(sq.growth_estimate(8) - 2) < 0.05
    ones = continued_fraction_vector("ones")
    with mpmath.workprec(200):
        assert abs(ones.x.mp_coords()[0] - (mpmath.sqrt(5) - 1) / 2) < mpmath.mpf(2) ** -190
    with pytest.raises(DomainError):
        continued_fraction_vector("nope")


# inheritance probe ------------------------------------------------------------------------------

def test_containment():
    L = AffineMap.of([[1, 0], [0, 1], [1, 1]], [0, 0, 0])
    good = PolynomialMap.of([{(1,): 1}, {(2,): 1}, {(1,): 1, (2,): 1}], 1)
    bad = PolynomialMap.of([{(1,): 1}, {(2,): 1}, {(1,): 1, (2,): 2}], 1)
    assert curve_in_subspace(L, good)
    assert not curve_in_subspace(L, bad)
    for s in (F(1, 3), F(-2, 5)):
        x, y, z = good([s])
        assert z == x + y
    with pytest.raises(ContainmentViolation):
        inheritance_probe(L, bad, Weight.of(F(1, 3), F(1, 3), F(1, 3)), 100, 1)


@pytest.fixture(scope="module")
def hyperplane_probe():
    L = AffineMap.of([[0], [1]], [F(1, 3), 0])
    curve = PolynomialMap.of([{(0,): F(1, 3)}, {(1,): 1}], 1)
    return inheritance_probe(L, curve, HH, 10**5, 8, seed=1)


def test_probe_hyperplane(hyperplane_probe):
    r = hyperplane_probe
    assert r.subspace_stats["median"] > 1.5 and r.curve_stats["median"] > 1.5
    assert r.median_gap < 0.15
    assert r.config["Q_max"] == 10**5


def test_probe_plane_and_parabola():
    L = AffineMap.of([[1, 0], [0, 1]], [0, 0])
    curve = PolynomialMap.of([{(1,): 1}, {(2,): 1}], 1)
    r = inheritance_probe(L, curve, HH, 10**5, 6, seed=2)
    assert 0.95 <= r.subspace_stats["median"] <= 1.3
    assert 0.95 <= r.curve_stats["median"] <= 1.3


def test_probe_deterministic():
    L = AffineMap.of([[1, 0], [0, 1]], [0, 0])
    curve = PolynomialMap.of([{(1,): 1}, {(2,): 1}], 1)
    a = inheritance_probe(L, curve, HH, 2000, 3, seed=9).as_dict()
    b = inheritance_probe(L, curve, HH, 2000, 3, seed=9).as_dict()
    assert a == b
