import math
import random
from fractions import Fraction as F

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from wdiophantine import (
    DecompositionError,
    DimensionMismatch,
    DomainError,
    ScaleOverflow,
    Sqrt,
    Weight,
    WeightSet,
    as_target,
    golden,
    quadratic_tail,
)
from wdiophantine.dynamics import (
    FlowPoint,
    SubmoduleBasis,
    certify_decomposition_constant,
    covolume_decomposition_check,
    dani_direction_check,
    decompose,
    default_decomposition_constant,
    delta,
    delta_quasi,
    delta_W,
    gram_covolume_squared,
    plucker_coordinates,
    plucker_covolume_squared_exact,
    rescale_plucker,
    sandwich_bounds,
    shortest_vector,
    single_weight_equality_check,
    submodule_covolume,
    tau_hat_estimate,
    verify_sandwich,
)

H = F(1, 2)
W1 = Weight.of(1)
HH = Weight.of(H, H)
ALPHA = Sqrt(2) - 1


def fp(x, w, t):
    return FlowPoint(as_target(x), w, t)


# delta ------------------------------------------------------------------------------------

def test_half_at_t2():
    v = delta(fp([H], W1, 2))
    assert abs(v - 2 * mpmath.e ** -2) < mpmath.mpf(2) ** -200
    sv = shortest_vector(fp([H], W1, 2))
    assert (sv.q, sv.p) == (2, (1,))


def test_pell_window():
    assert 0.25 <= delta(fp([ALPHA], W1, 3)) <= 0.75


@pytest.mark.parametrize(
    "x,w,t,norm,expected",
    [
        ([ALPHA], W1, 3, "sup", "0.597444820414367316"),
        ([ALPHA], W1, 5, "sup", "0.749580530097980875"),
        ([F(1, 3), ALPHA], HH, 4, "sup", "0.219787666664810164"),
        ([ALPHA, Sqrt(3) - 1], Weight.of(F(1, 3), F(2, 3)), 5, "sup", "0.394772465949728401"),
        ([golden()], W1, 4, "quasi", "0.718272377848460753"),
    ],
)
def test_frozen_values(x, w, t, norm, expected):
    # frozen from the brute-force enumeration in tests/oracles.py
    v = shortest_vector(fp(x, w, t), norm=norm).value
    assert abs(v - mpmath.mpf(expected)) < 1e-17


def test_delta_W_examples():
    W = WeightSet.of(HH)
    assert delta_W([H, F(1, 3)], W, 0) <= 1
    v = delta_W([H, F(1, 3)], W, math.log(6))
    assert abs(v - mpmath.mpf(2) / 3) < 1e-15
    with mpmath.workprec(200):
        brute = oracles.delta_brute([mpmath.mpf(1) / 2, mpmath.mpf(1) / 3], [0.5, 0.5], mpmath.log(6), norm_weights=[0.5, 0.5])
    assert abs(v - brute) < 1e-15
    v = delta_W([ALPHA, F(1, 3)], WeightSet.of(Weight.of(F(1, 3), F(2, 3))), 3)
    assert abs(v - mpmath.mpf("0.597444820414367316")) < 1e-17


def test_delta_W_singleton_standard_is_delta():
    for t in (1, 2.5, 4):
        assert abs(delta_W([ALPHA], WeightSet.of(W1), t) - delta(fp([ALPHA], W1, t))) < 1e-30


def test_delta_W_inf_over_members():
    x = [ALPHA, F(2, 7)]
    A, B = Weight.of(F(1, 4), F(3, 4)), Weight.of(F(3, 4), F(1, 4))
    both = delta_W(x, WeightSet.of(A, B), 3)
    assert both == min(delta_W(x, WeightSet.of(A), 3), delta_W(x, WeightSet.of(B), 3))


def _coords():
    return st.sampled_from([ALPHA, golden(), Sqrt(3) - 1, quadratic_tail(3), F(1, 3), F(5, 7), F(0)])


@settings(max_examples=25)
@given(st.data())
def test_enumeration_matches_brute_force(data):
    d = data.draw(st.integers(1, 2))
    x = [data.draw(_coords()) for _ in range(d)]
    w = W1 if d == 1 else data.draw(st.sampled_from([HH, Weight.of(F(1, 3), F(2, 3)), Weight.of(F(1, 5), F(4, 5))]))
    t = data.draw(st.sampled_from([0, 0.5, 1.75, 3, 4.5, 6] + ([8] if d == 1 else [])))
    norm = data.draw(st.sampled_from(["sup", "quasi"]))
    got = shortest_vector(fp(x, w, t), norm=norm).value
    with mpmath.workprec(200):
        xs = as_target(x).mp_coords()
        brute = oracles.delta_brute(xs, [float(e) for e in w.entries], t, None if norm == "sup" else [float(e) for e in w.entries])
    assert abs(got - brute) <= 1e-12 * brute


@given(st.data())
def test_minkowski_bound(data):
    d = data.draw(st.integers(1, 3))
    x = [data.draw(_coords()) for _ in range(d)]
    m = 12
    cuts = sorted(data.draw(st.lists(st.integers(1, m - 1), min_size=d - 1, max_size=d - 1, unique=True)))
    w = Weight(tuple(F(b - a, m) for a, b in zip([0, *cuts], [*cuts, m])))
    t = data.draw(st.floats(0, 9))
    assert delta(fp(x, w, t)) <= 1
    assert delta_quasi(fp(x, w, t)) <= 1


def test_rational_collapse():
    # delta = D e^{-t} once the denominator D is reached
    for t in (5, 8, 11):
        assert abs(delta(fp([F(2, 7), F(3, 7)], HH, t)) - 7 * mpmath.e ** -t) < 1e-40


def test_zero_stratum_wins_at_small_t():
    sv = shortest_vector(fp([ALPHA], W1, 0))
    assert sv.value == 1
    sv = shortest_vector(fp([F(1, 3), ALPHA], Weight.of(F(1, 4), F(3, 4)), 0.3))
    assert sv.q in (0, 1) and sv.value <= 1


def test_flow_point_validation():
    with pytest.raises(DomainError):
        fp([ALPHA], W1, -1)
    with pytest.raises(DimensionMismatch):
        fp([ALPHA], HH, 1)


def test_scale_overflow():
    with pytest.raises(ScaleOverflow):
        delta(fp([ALPHA], W1, 30))
    with pytest.raises(ScaleOverflow):
        tau_hat_estimate([ALPHA], W1, t_max=20, budget=1 << 20)


# rates and sandwiches -----------------------------------------------------------------------

def test_tau_rational_and_golden():
    assert tau_hat_estimate([H], W1, t_max=15).tail_estimate >= 0.9
    assert tau_hat_estimate([golden()], W1, t_max=15).tail_estimate <= 0.05


def test_rate_trace_shape():
    tr = tau_hat_estimate([ALPHA, F(1, 3)], WeightSet.of(HH, Weight.of(F(1, 3), F(2, 3))), t_max=6)
    cols = tr.columns()
    assert list(cols) == ["t", "w_index", "delta", "rate"]
    assert cols["t"] == sorted(cols["t"]) and all(v > 0 for v in cols["delta"])
    assert tr.tail_estimate == min(cols["rate"][tr.window_start:])
    with pytest.raises(DomainError):
        tau_hat_estimate([ALPHA], W1, t_grid=[1, 1])


@pytest.mark.parametrize("x", [[H], [ALPHA], [F(1, 3), ALPHA], [F(2, 5), F(3, 5)]])
def test_rate_at_most_one(x):
    w = W1 if len(x) == 1 else HH
    for _, _, _, rate in tau_hat_estimate(x, w, t_max=10).samples:
        assert rate <= 1 + 1e-12


def test_sandwich_bounds_collapse_for_standard_weight():
    lo, hi = sandwich_bounds(0.3, 0.5, 0.5)
    assert lo == pytest.approx(hi) == pytest.approx((1 + 2 * 0.3) / (1 - 0.3))


@given(st.floats(0, 0.9), st.floats(0.05, 0.5))
def test_sandwich_bounds_ordered(tau, wmin):
    lo, hi = sandwich_bounds(tau, wmin, 1 - wmin)
    assert lo <= hi + 1e-12


def test_sandwich_golden():
    v = verify_sandwich([golden()], WeightSet.of(W1), 10**6, 15, 0.1)
    assert v.passed and abs(v.sigma - 1) < 0.1 and v.tau < 0.05


def test_sandwich_hyperplane_point():
    v = verify_sandwich([F(1, 3), ALPHA], WeightSet.of(HH), 10**5, 12, 0.15)
    assert v.passed
    assert set(v.as_dict()) >= {"sigma_hat", "tau_hat", "bounds", "checks"}


def test_sandwich_rational_undecidable():
    assert verify_sandwich([H], WeightSet.of(W1), 10**4, 10, 0.1).status == "undecidable"


def test_single_weight_identity():
    v = single_weight_equality_check([golden()], W1, 10**6, 15, 0.1)
    assert v.passed
    v = single_weight_equality_check([F(1, 3), ALPHA], HH, 10**5, 12, 0.15)
    assert v.passed and abs(v.tau - F(1, 3)) < 0.1
    with pytest.raises(DomainError):
        single_weight_equality_check([H], W1, 100, 5, 0.1)


def test_dani_direction():
    rep, rows = dani_direction_check([H, F(1, 3)], WeightSet.grid(2, F(1, 4)), F(1, 10), 500)
    assert rep.success and rows and all(r["ok"] for r in rows)
    rep, rows = dani_direction_check([F(1, 3), ALPHA], HH, F(1, 10), 3000)
    assert all(r["ok"] for r in rows)


# covolumes ----------------------------------------------------------------------------------

W3 = Weight.of(F(1, 3), F(2, 3))
X2 = [ALPHA, F(2, 7)]


def test_basis_canonical_form():
    b = SubmoduleBasis(((2, 4, 0), (1, 2, 1)))
    assert b.vectors == ((1, 2, 1), (0, 0, 2))
    assert not b.is_primitive
    assert SubmoduleBasis(((1, 0, 0), (0, 1, 2))).is_primitive
    with pytest.raises(DecompositionError):
        SubmoduleBasis(((1, 2, 3), (2, 4, 6)))


@pytest.mark.parametrize("t", [0, 1.5, 7])
def test_eigenvector_e0(t):
    c = submodule_covolume(SubmoduleBasis(((1, 0, 0),)), X2, W3, t)
    with mpmath.workprec(256):
        assert abs(c - mpmath.exp(mpmath.mpf(t) / 3)) < 1e-70


@pytest.mark.parametrize("t", [0, 2, 9])
def test_last_axis(t):
    c = submodule_covolume(SubmoduleBasis(((0, 0, 1),)), X2, W3, t)
    with mpmath.workprec(256):
        xs = as_target(X2).mp_coords()
        tt = mpmath.mpf(t)
        expect = mpmath.sqrt((mpmath.exp(tt / 3) * xs[0]) ** 2 + (mpmath.exp(2 * tt / 3) * xs[1]) ** 2 + mpmath.exp(-2 * tt))
    assert abs(c - expect) < 1e-60 * expect


def _random_basis(rng, rank):
    while True:
        vecs = [[rng.randint(-6, 6) for _ in range(3)] for _ in range(rank)]
        try:
            return SubmoduleBasis(tuple(map(tuple, vecs)))
        except DecompositionError:
            continue


def test_gram_matches_plucker_exactly():
    rng = random.Random(3)
    x = [F(2, 7), F(-5, 3)]
    for _ in range(30):
        b = _random_basis(rng, rng.randint(1, 2))
        assert gram_covolume_squared(b, x) == plucker_covolume_squared_exact(b, x)
        assert abs(submodule_covolume(b, x, W3, 0) ** 2 - _mpq(gram_covolume_squared(b, x))) < 1e-60


def _mpq(r):
    return mpmath.mpf(r.numerator) / r.denominator


def test_cocycle():
    rng = random.Random(5)
    for _ in range(10):
        b = _random_basis(rng, 2)
        t1, t2 = rng.randint(0, 40) / 8, rng.randint(0, 40) / 8
        stepped = rescale_plucker(plucker_coordinates(b, X2, W3, t1), W3, t2, 256)
        direct = plucker_coordinates(b, X2, W3, t1 + t2)
        for I in direct:
            assert abs(stepped[I] - direct[I]) <= mpmath.mpf(2) ** -248 * max(1, abs(direct[I]))


def test_decomposition_reassembles():
    rng = random.Random(11)
    for _ in range(50):
        b = _random_basis(rng, rng.randint(1, 2))
        dec = decompose(b)
        assert all(v[-1] == 0 for v in dec.v0)
        if dec.q:
            top = [-c for c in dec.p] + [dec.q]
            got = _plucker_exact(dec.v0 + [top])
        else:
            got = _plucker_exact(dec.v0)
        want = b.plucker()
        assert got == want or got == {k: -v for k, v in want.items()}


def _plucker_exact(vecs):
    from itertools import combinations

    def det(M):
        return M[0][0] if len(M) == 1 else M[0][0] * M[1][1] - M[0][1] * M[1][0]

    return {I: det([[v[i] for i in I] for v in vecs]) for I in combinations(range(3), len(vecs))}


def test_decomposition_examples():
    # single vector: equal up to sqrt(n+1)
    v = covolume_decomposition_check(SubmoduleBasis(((-1, 0, 3),)), X2, W3, 4, math.sqrt(3))
    assert v.passed and v.bounds["q"] == 3
    # q = 0 branch: M is the covolume itself
    v = covolume_decomposition_check(SubmoduleBasis(((1, 2, 0), (0, 3, 0))), X2, W3, 6, 1.0 + 1e-12)
    assert v.passed and v.bounds["q"] == 0 and v.bounds["B"] == 0.0


def test_decomposition_constant_certified():
    rng = random.Random(17)
    corpus = [(_random_basis(rng, rng.randint(1, 2)), X2, W3, rng.uniform(0, 10)) for _ in range(60)]
    worst = certify_decomposition_constant(corpus)
    assert 1 <= worst <= math.sqrt(2) + 1e-9
    assert default_decomposition_constant(2) == 6
