"""Diagonal flows on the lattices ``u_x Z^{d+1}``: shortest vectors, divergence
rates, exterior-power covolumes and the exponent sandwich.

Lattice vectors of ``a_{f,t} u_x Z^{d+1}`` have the closed form
``(e^{f_i t}(q x_i - p_i))_i, e^{-t} q)``.  Shortest vectors are found stratum by
stratum in ``q``: the ``q = 0`` stratum is solved in closed form and each ``q >= 1``
stratum is minimised by the nearest-integer ``p``.  A float pass over all strata
selects candidates, which are then re-evaluated from the exact coordinate
brackets at the working precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import factorial

import mpmath
import numpy as np

from .approx import sigma_hat_W_estimate, singular_certificate
from .core import TargetVector, Weight, WeightSet, as_target
from .errors import (
    DecompositionError,
    DimensionMismatch,
    DomainError,
    ScaleOverflow,
    TerminatedRational,
)
from .scan import DIST_EPS, DistanceScanner

ENUMERATION_BUDGET = 1 << 24
DEFAULT_T_STEP = 0.25
DEFAULT_TAU_WINDOW = 0.25


@dataclass(frozen=True)
class FlowPoint:
    """The lattice ``a_{w,t} u_x Z^{d+1}``, kept implicit."""

    x: TargetVector
    w: Weight
    t: float

    def __post_init__(self):
        if self.t < 0:
            raise DomainError("flow time must be non-negative")
        if self.x.d != self.w.d:
            raise DimensionMismatch("x and w dimensions differ")

    def matrix(self):
        """``a_{w,t} u_x`` as an mpmath matrix (for brute-force checks)."""
        d = self.x.d
        xs = self.x.mp_coords()
        with mpmath.workprec(self.x.precision_bits):
            m = mpmath.eye(d + 1)
            for i in range(d):
                m[i, d] = xs[i]
            for i in range(d):
                s = mpmath.exp(mpmath.mpf(self.w[i].numerator) / self.w[i].denominator * self.t)
                for j in range(d + 1):
                    m[i, j] *= s
            for j in range(d + 1):
                m[d, j] *= mpmath.exp(-mpmath.mpf(self.t))
        return m


@dataclass
class ShortVector:
    value: mpmath.mpf
    q: int
    p: tuple[int, ...]


class _Strata:
    """Nearest-integer distances for q = 1..N, grown on demand."""

    def __init__(self, x: TargetVector, budget: int):
        self.x = x
        self.budget = budget
        self.scanner = DistanceScanner(x)
        self.dist = np.empty((x.d, 0))

    def upto(self, n: int) -> np.ndarray:
        if n > self.budget:
            raise ScaleOverflow(f"enumeration up to q={n} exceeds budget {self.budget}")
        have = self.dist.shape[1]
        if n > have:
            q = np.arange(have + 1, n + 1, dtype=np.int64)
            self.dist = np.concatenate([self.dist, self.scanner.distances(q)], axis=1)
        return self.dist[:, :n]


def _component_scales(flow: Weight | tuple, t: float) -> np.ndarray:
    return np.array([math.exp(float(f) * t) for f in flow])


def _norm_bounds(dist, scales, norm_weight, t, q):
    """Float lower/upper bounds of the lattice-vector norm for each q."""
    lo_parts, hi_parts = [], []
    for i, s in enumerate(scales):
        d_lo = np.maximum(dist[i] - DIST_EPS, 0.0) * s
        d_hi = (dist[i] + DIST_EPS) * s
        if norm_weight is None:
            lo_parts.append(d_lo)
            hi_parts.append(d_hi)
            continue
        wi = norm_weight[i]
        if wi == 0:
            # limit convention: below 1 contributes 0, at or above 1 contributes >= 1
            lo_parts.append(np.where(d_lo >= 1.0, 1.0, 0.0))
            hi_parts.append(np.where(d_hi < 1.0, 0.0, np.inf))
            continue
        inv = 1.0 / float(wi)
        with np.errstate(over="ignore", under="ignore"):
            lo_parts.append(d_lo**inv)
            hi_parts.append(d_hi**inv)
    last = math.exp(-t) * q.astype(np.float64)
    lo = np.maximum.reduce([*lo_parts, last])
    hi = np.maximum.reduce([*hi_parts, last])
    return lo * (1 - 1e-9), hi * (1 + 1e-9)


def _zero_stratum(flow, norm_weight, t):
    """Minimum over nonzero p of the norm of ``(e^{f_i t} p_i)_i``: attained at a unit vector."""
    best = math.inf
    for i, f in enumerate(flow):
        s = math.exp(float(f) * t)
        if norm_weight is None:
            v = s
        elif norm_weight[i] == 0:
            v = 0.0 if s < 1 else (1.0 if s == 1 else math.inf)
        else:
            v = s ** (1.0 / float(norm_weight[i]))
        best = min(best, v)
    return best


def _exact_value(x: TargetVector, q: int, flow, norm_weight, t):
    prec = x.precision_bits
    with mpmath.workprec(prec):
        tt = mpmath.mpf(t)
        parts, p = [], []
        for i, f in enumerate(flow):
            pi, lo, hi, den = x.residual(q, i)
            p.append(pi)
            r = abs(mpmath.mpf(lo + hi) / (2 * den))
            c = mpmath.exp(mpmath.mpf(Fraction(f).numerator) / Fraction(f).denominator * tt) * r
            if norm_weight is None:
                parts.append(c)
            elif norm_weight[i] == 0:
                parts.append(mpmath.mpf(0) if c < 1 else (mpmath.mpf(1) if c == 1 else mpmath.inf))
            else:
                wi = norm_weight[i]
                parts.append(c ** (mpmath.mpf(wi.denominator) / wi.numerator))
        parts.append(mpmath.exp(-tt) * q)
        return max(parts), tuple(p)


def _shortest(x, flow, norm_weight, t, strata: _Strata) -> ShortVector:
    z = _zero_stratum(flow, norm_weight, t)
    n = max(1, math.ceil(math.exp(t)))
    # every vector with q > best * e^t is already longer than the q = 0 stratum
    while True:
        dist = strata.upto(n)
        q = np.arange(1, n + 1, dtype=np.int64)
        lo, hi = _norm_bounds(dist, _component_scales(flow, t), norm_weight, t, q)
        best_hi = min(float(hi.min()), z)
        need = math.floor(best_hi * math.exp(t) * (1 + 1e-9)) + 1
        if need <= n:
            break
        n = need
    cand = q[lo <= best_hi]
    with mpmath.workprec(x.precision_bits):
        zval = _zero_stratum_exact(flow, norm_weight, t, x.precision_bits)
        best = ShortVector(zval, 0, tuple(1 if i == _unit_index(flow, norm_weight, t) else 0 for i in range(x.d)))
        for qq in cand:
            v, p = _exact_value(x, int(qq), flow, norm_weight, t)
            if v < best.value:
                best = ShortVector(v, int(qq), p)
    return best


def _unit_index(flow, norm_weight, t):
    vals = []
    for i, f in enumerate(flow):
        s = math.exp(float(f) * t)
        if norm_weight is None:
            vals.append(s)
        elif norm_weight[i] == 0:
            vals.append(0.0 if s < 1 else (1.0 if s == 1 else math.inf))
        else:
            vals.append(s ** (1.0 / float(norm_weight[i])))
    return min(range(len(vals)), key=vals.__getitem__)


def _zero_stratum_exact(flow, norm_weight, t, prec):
    with mpmath.workprec(prec):
        tt = mpmath.mpf(t)
        best = mpmath.inf
        for i, f in enumerate(flow):
            f = Fraction(f)
            s = mpmath.exp(mpmath.mpf(f.numerator) / f.denominator * tt)
            if norm_weight is None:
                v = s
            elif norm_weight[i] == 0:
                v = mpmath.mpf(0) if s < 1 else (mpmath.mpf(1) if s == 1 else mpmath.inf)
            else:
                wi = norm_weight[i]
                v = s ** (mpmath.mpf(wi.denominator) / wi.numerator)
            best = min(best, v)
        return best


def shortest_vector(fp: FlowPoint, *, norm: str = "sup", budget: int = ENUMERATION_BUDGET, _strata=None) -> ShortVector:
    """Shortest nonzero vector of ``a_{w,t} u_x Z^{d+1}``.

    ``norm="sup"`` is the sup-norm; ``norm="quasi"`` measures the first ``d``
    components with the ``w``-quasi-norm and the last with ``|.|``.
    """
    strata = _strata or _Strata(fp.x, budget)
    nw = None if norm == "sup" else fp.w
    return _shortest(fp.x, fp.w.entries, nw, float(fp.t), strata)


def delta(fp: FlowPoint, *, budget: int = ENUMERATION_BUDGET):
    """Sup-norm length of a shortest nonzero vector."""
    return shortest_vector(fp, budget=budget).value


def delta_quasi(fp: FlowPoint, *, budget: int = ENUMERATION_BUDGET):
    """Shortest length with the ``w``-quasi-norm on the flowed ``a_{w,t}`` lattice."""
    return shortest_vector(fp, norm="quasi", budget=budget).value


def delta_W(x, W: WeightSet, t: float, *, budget: int = ENUMERATION_BUDGET, _strata=None):
    """``inf_w min_v ||v||_w`` on ``a_{(1/d,...,1/d),t} u_x Z^{d+1}``.

    The quasi-norm measures the first ``d`` components; the last is taken in absolute value.
    """
    x = as_target(x)
    if isinstance(W, Weight):
        W = WeightSet((W,))
    if W.d != x.d:
        raise DimensionMismatch("x and W dimensions differ")
    strata = _strata or _Strata(x, budget)
    flow = Weight.standard(x.d).entries
    return min(_shortest(x, flow, w, float(t), strata).value for w in W)


# --------------------------------------------------------------------------
# divergence rates


@dataclass
class RateTrace:
    samples: list[tuple[float, int, float, float]]
    tail_estimate: float
    window_start: int
    config: dict = field(default_factory=dict)

    def columns(self):
        """Columnar export: t, w_index, delta, rate."""
        cols = {"t": [], "w_index": [], "delta": [], "rate": []}
        for t, k, dv, r in self.samples:
            cols["t"].append(t)
            cols["w_index"].append(k)
            cols["delta"].append(dv)
            cols["rate"].append(r)
        return cols

    def as_dict(self):
        return {
            "tail_estimate": self.tail_estimate,
            "window_start": self.window_start,
            "config": self.config,
            "columns": self.columns(),
        }


def default_t_grid(t_max: float, t_step: float = DEFAULT_T_STEP) -> list[float]:
    n = int(math.floor(t_max / t_step + 1e-9))
    return [t_step * k for k in range(1, n + 1)]


def tau_hat_estimate(
    x,
    W,
    t_grid=None,
    *,
    t_max: float = 15.0,
    t_step: float = DEFAULT_T_STEP,
    window: float = DEFAULT_TAU_WINDOW,
    norm: str = "sup",
    budget: int = ENUMERATION_BUDGET,
) -> RateTrace:
    """Sampled ``inf_w (-1/t) log delta(a_{w,t} u_x)`` and its tail minimum.

    ``norm`` is ``"sup"`` (divergence rate of the sup-norm systole) or
    ``"quasi"`` (each weight's own quasi-norm, as in the single-weight identity).
    """
    x = as_target(x)
    if isinstance(W, Weight):
        W = WeightSet((W,))
    if W.d != x.d:
        raise DimensionMismatch("x and W dimensions differ")
    grid = list(t_grid) if t_grid is not None else default_t_grid(t_max, t_step)
    if any(b <= a for a, b in zip(grid, grid[1:])) or not grid or grid[0] <= 0:
        raise DomainError("t_grid must be positive and increasing")
    if math.exp(grid[-1]) > budget:
        raise ScaleOverflow(f"e^t_max = {math.exp(grid[-1]):.3g} exceeds enumeration budget {budget}")
    strata = _Strata(x, budget)
    samples = []
    for t in grid:
        best = None
        for k, w in enumerate(W):
            sv = _shortest(x, w.entries, None if norm == "sup" else w, t, strata)
            rate = float(-mpmath.log(sv.value) / t)
            if best is None or rate < best[3]:
                best = (t, k, float(sv.value), rate)
        samples.append(best)
    start = max(0, len(samples) - max(1, math.ceil(window * len(samples))))
    tail = min(s[3] for s in samples[start:])
    cfg = {"t_max": grid[-1], "t_step": t_step, "window": window, "norm": norm, "weights": [str(w) for w in W]}
    return RateTrace(samples, tail, start, cfg)


# --------------------------------------------------------------------------
# exponent sandwich


def sandwich_bounds(tau: float, w_min: float, w_max: float) -> tuple[float, float]:
    lower = (tau + w_max) / ((1 - tau) * w_max)
    upper = (tau + w_min) / ((1 - tau) * w_min) if w_min > 0 else math.inf
    return lower, upper


@dataclass
class Verdict:
    kind: str
    status: str
    sigma: float | None = None
    tau: float | None = None
    bounds: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.status == "ok" and all(self.checks.values())

    def as_dict(self):
        return {
            "kind": self.kind,
            "status": self.status,
            "passed": self.passed,
            "sigma_hat": self.sigma,
            "tau_hat": self.tau,
            "bounds": self.bounds,
            "checks": self.checks,
            "config": self.config,
        }


def verify_sandwich(x, W, Q_max: int, t_max: float, slack: float, *, t_step: float = DEFAULT_T_STEP) -> Verdict:
    """Check ``(tau+w_max)/((1-tau)w_max) <= sigma <= (tau+w_min)/((1-tau)w_min)`` up to ``slack``."""
    x = as_target(x)
    if isinstance(W, Weight):
        W = WeightSet((W,))
    cfg = {"Q_max": Q_max, "t_max": t_max, "t_step": t_step, "slack": slack, "weights": [str(w) for w in W]}
    trace = tau_hat_estimate(x, W, t_max=t_max, t_step=t_step)
    tau = trace.tail_estimate
    if not tau < 1 - slack:
        return Verdict("sandwich", "undecidable", None, tau, config=cfg)
    try:
        sigma = sigma_hat_W_estimate(x, W, Q_max).value
    except TerminatedRational:
        return Verdict("sandwich", "undecidable", math.inf, tau, config=cfg)
    lower, upper = sandwich_bounds(tau, float(W.w_min), float(W.w_max))
    return Verdict(
        "sandwich",
        "ok",
        sigma,
        tau,
        bounds={
            "lower": lower,
            "upper": upper,
            "lower_formula": "(tau+w_max)/((1-tau)*w_max)",
            "upper_formula": "(tau+w_min)/((1-tau)*w_min)",
            "w_min": str(W.w_min),
            "w_max": str(W.w_max),
        },
        checks={"lower": lower <= sigma + slack, "upper": sigma <= upper + slack},
        config=cfg,
    )


def single_weight_equality_check(x, w: Weight, Q_max: int, t_max: float, slack: float, *, t_step: float = DEFAULT_T_STEP) -> Verdict:
    """Compare ``sigma_hat_w`` with ``(1+tau)/(1-tau)`` where tau uses the w-quasi-norm systole."""
    x = as_target(x)
    if x.is_rational:
        raise DomainError("single-weight identity needs an irrational direction (tau -> 1 for rational x)")
    cfg = {"Q_max": Q_max, "t_max": t_max, "t_step": t_step, "slack": slack, "weight": str(w)}
    trace = tau_hat_estimate(x, w, t_max=t_max, t_step=t_step, norm="quasi")
    tau = trace.tail_estimate
    sigma = sigma_hat_W_estimate(x, WeightSet((w,)), Q_max).value
    predicted = (1 + tau) / (1 - tau)
    return Verdict(
        "single_weight_equality",
        "ok",
        sigma,
        tau,
        bounds={"predicted_sigma": predicted, "formula": "(1+tau)/(1-tau)"},
        checks={"equality": abs(sigma - predicted) <= slack},
        config=cfg,
    )


def dani_direction_check(x, W, delta_param, Q_max: int, *, samples_per_witness: int = 2, budget: int = ENUMERATION_BUDGET):
    """Cross-check a singular certificate against the flow.

    For a witness ``||qx-p||_w <= delta/Q`` with ``q <= Q``, at ``e^t = Q / sqrt(delta)``
    the lattice vector has components ``<= delta**(w_i/2)`` and ``<= sqrt(delta)``, so
    the systole is at most ``delta**(w_min/2)``.  Returns ``(report, rows)``.
    """
    x = as_target(x)
    if isinstance(W, Weight):
        W = WeightSet((W,))
    report = singular_certificate(x, W, delta_param, Q_max)
    dl = float(Fraction(delta_param))
    strata = _Strata(x, budget)
    rows = []
    for wt in report.witnesses:
        w = W[wt.weight_index]
        Qs = sorted({wt.Q_lo, wt.Q_hi})[:samples_per_witness]
        for Q in Qs:
            t = math.log(Q / math.sqrt(dl))
            thresh = dl ** (float(w.w_min) / 2)
            v = float(_shortest(x, w.entries, None, t, strata).value)
            rows.append({"Q": Q, "t": t, "weight_index": wt.weight_index, "delta": v, "threshold": thresh, "ok": v <= thresh * (1 + 1e-12)})
    return report, rows


# --------------------------------------------------------------------------
# sublattices and covolumes


def _hnf_rows(rows: list[list[int]]) -> list[list[int]]:
    """Row-style Hermite normal form of an integer matrix; zero rows dropped."""
    A = [list(r) for r in rows]
    m = len(A[0]) if A else 0
    out_row = 0
    for col in range(m):
        pivot_rows = [r for r in range(out_row, len(A)) if A[r][col] != 0]
        if not pivot_rows:
            continue
        while True:
            nz = [r for r in range(out_row, len(A)) if A[r][col] != 0]
            if len(nz) <= 1:
                break
            r0 = min(nz, key=lambda r: abs(A[r][col]))
            for r in nz:
                if r != r0:
                    f = A[r][col] // A[r0][col]
                    A[r] = [a - f * b for a, b in zip(A[r], A[r0])]
        nz = [r for r in range(out_row, len(A)) if A[r][col] != 0]
        if not nz:
            continue
        r0 = nz[0]
        A[out_row], A[r0] = A[r0], A[out_row]
        if A[out_row][col] < 0:
            A[out_row] = [-a for a in A[out_row]]
        piv = A[out_row][col]
        for r in range(out_row):
            f = A[r][col] // piv
            A[r] = [a - f * b for a, b in zip(A[r], A[out_row])]
        out_row += 1
        if out_row == len(A):
            break
    return [r for r in A[:out_row] if any(r)]


@dataclass(frozen=True)
class SubmoduleBasis:
    """Rank-j submodule of Z^{n+1}, stored in Hermite normal form."""

    vectors: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        vecs = [list(map(int, v)) for v in self.vectors]
        if not vecs:
            raise DecompositionError("empty basis")
        n1 = len(vecs[0])
        if any(len(v) != n1 for v in vecs):
            raise DimensionMismatch("basis vectors have different lengths")
        h = _hnf_rows(vecs)
        if len(h) != len(vecs):
            raise DecompositionError(f"rank deficiency: {len(vecs)} vectors span rank {len(h)}")
        object.__setattr__(self, "vectors", tuple(tuple(r) for r in h))

    @property
    def rank(self) -> int:
        return len(self.vectors)

    @property
    def ambient(self) -> int:
        return len(self.vectors[0])

    def plucker(self) -> dict[tuple[int, ...], int]:
        """Integer Plücker coordinates (all j x j minors of the basis)."""
        return _minors([[Fraction(c) for c in v] for v in self.vectors], self.ambient)

    @property
    def is_primitive(self) -> bool:
        g = 0
        for v in self.plucker().values():
            g = math.gcd(g, int(v))
        return g == 1


def _det(M):
    """Exact determinant by fraction-free elimination over Fractions or mpf."""
    n = len(M)
    A = [list(r) for r in M]
    det = 1
    for c in range(n):
        piv = next((r for r in range(c, n) if A[r][c] != 0), None)
        if piv is None:
            return 0 * A[0][0] if n else 1
        if piv != c:
            A[c], A[piv] = A[piv], A[c]
            det = -det
        det = det * A[c][c]
        for r in range(c + 1, n):
            f = A[r][c] / A[c][c]
            A[r] = [a - f * b for a, b in zip(A[r], A[c])]
    return det


def _minors(vectors, ambient: int) -> dict:
    j = len(vectors)
    out = {}
    for I in combinations(range(ambient), j):
        out[I] = _det([[v[i] for i in I] for v in vectors]) if j else 1
    return out


def _apply_u(vectors, xs):
    """Image of integer vectors under u_x: coordinate n feeds x_i into coordinate i."""
    n = len(xs)
    return [[v[i] + xs[i] * v[n] for i in range(n)] + [v[n]] for v in vectors]


def _flow_exponents(w: Weight):
    return [Fraction(e) for e in w.entries] + [Fraction(-1)]


def plucker_coordinates(basis: SubmoduleBasis, x, w: Weight, t) -> dict:
    """Plücker coordinates of ``g_t^w u_x Gamma`` at the working precision."""
    x = as_target(x)
    if basis.ambient != x.d + 1 or w.d != x.d:
        raise DimensionMismatch("basis must live in Z^{d+1} for x in R^d")
    prec = x.precision_bits
    with mpmath.workprec(prec):
        xs = x.mp_coords()
        base = _minors(_apply_u([[mpmath.mpf(c) for c in v] for v in basis.vectors], xs), basis.ambient)
        ex = _flow_exponents(w)
        tt = mpmath.mpf(t)
        return {I: val * mpmath.exp(sum(ex[i] for i in I) * tt) for I, val in base.items()}


def rescale_plucker(coords: dict, w: Weight, t, prec: int) -> dict:
    """Apply ``g_t^w`` to already-flowed Plücker coordinates."""
    ex = _flow_exponents(w)
    with mpmath.workprec(prec):
        tt = mpmath.mpf(t)
        return {I: val * mpmath.exp(sum(ex[i] for i in I) * tt) for I, val in coords.items()}


def _norm(coords: dict, prec: int):
    with mpmath.workprec(prec):
        return mpmath.sqrt(mpmath.fsum(v * v for v in coords.values()))


def submodule_covolume(basis: SubmoduleBasis, x, w: Weight, t):
    """Covolume of ``g_t^w u_x Gamma``: Euclidean norm of the flowed wedge."""
    x = as_target(x)
    return _norm(plucker_coordinates(basis, x, w, t), x.precision_bits)


def gram_covolume_squared(basis: SubmoduleBasis, x) -> Fraction:
    """Exact squared covolume of ``u_x Gamma`` (t = 0) for rational x, via the Gram determinant."""
    x = as_target(x)
    if not x.is_rational:
        raise DomainError("exact Gram check needs rational coordinates")
    img = _apply_u([[Fraction(c) for c in v] for v in basis.vectors], list(x.coords))
    G = [[sum(a * b for a, b in zip(u, v)) for v in img] for u in img]
    return _det(G)


def plucker_covolume_squared_exact(basis: SubmoduleBasis, x) -> Fraction:
    """Exact sum of squared minors of ``u_x Gamma`` (t = 0) for rational x."""
    x = as_target(x)
    if not x.is_rational:
        raise DomainError("exact Plücker check needs rational coordinates")
    img = _apply_u([[Fraction(c) for c in v] for v in basis.vectors], list(x.coords))
    return sum(v * v for v in _minors(img, basis.ambient).values())


@dataclass
class Decomposition:
    v0: list[list[int]]
    q: int
    p: tuple[int, ...]


def decompose(basis: SubmoduleBasis) -> Decomposition:
    """Split ``Gamma`` as ``v0 ^ (q e_n - (p, 0))`` with ``v0`` in the last-coordinate-zero subspace.

    ``v0`` has degree ``j - 1`` when ``q != 0``; when Gamma already lies in
    that subspace, ``q = 0`` and ``v0`` is the whole basis.
    """
    vecs = [list(v) for v in basis.vectors]
    n = basis.ambient - 1
    while True:
        nz = [k for k, v in enumerate(vecs) if v[n] != 0]
        if len(nz) <= 1:
            break
        k0 = min(nz, key=lambda k: abs(vecs[k][n]))
        for k in nz:
            if k != k0:
                f = vecs[k][n] // vecs[k0][n]
                vecs[k] = [a - f * b for a, b in zip(vecs[k], vecs[k0])]
    nz = [k for k, v in enumerate(vecs) if v[n] != 0]
    if not nz:
        return Decomposition(vecs, 0, tuple([0] * n))
    top = vecs.pop(nz[0])
    if top[n] < 0:
        top = [-a for a in top]
    q = top[n]
    p = tuple(-a for a in top[:n])
    if any(v[n] != 0 for v in vecs):
        raise DecompositionError(f"could not clear last coordinates: {vecs}")
    return Decomposition(vecs, q, p)


def covolume_decomposition_check(basis: SubmoduleBasis, x, w: Weight, t, C: float) -> Verdict:
    """Check ``cov(g u_x Gamma)`` against ``max(||g(v0^(qx-p,0))||, |q| ||g(v0^e_n)||)`` up to factor C."""
    x = as_target(x)
    prec = x.precision_bits
    dec = decompose(basis)
    n = x.d
    ex = _flow_exponents(w)
    with mpmath.workprec(prec):
        tt = mpmath.mpf(t)
        xs = x.mp_coords()
        v0 = [[mpmath.mpf(c) for c in v] for v in dec.v0]

        def flowed_norm(vectors):
            mins = _minors(vectors, n + 1)
            return mpmath.sqrt(mpmath.fsum((val * mpmath.exp(sum(ex[i] for i in I) * tt)) ** 2 for I, val in mins.items()))

        if dec.q == 0:
            M = flowed_norm(v0)
            parts = {"A": float(M), "B": 0.0}
        else:
            resid = [dec.q * xs[i] - dec.p[i] for i in range(n)] + [mpmath.mpf(0)]
            en = [mpmath.mpf(0)] * n + [mpmath.mpf(1)]
            A = flowed_norm(v0 + [resid])
            B = abs(dec.q) * flowed_norm(v0 + [en])
            M = max(A, B)
            parts = {"A": float(A), "B": float(B)}
        cov = submodule_covolume(basis, x, w, t)
        ratio = cov / M
    ok = (1 / C) <= float(ratio) <= C
    return Verdict(
        "covolume_decomposition",
        "ok",
        bounds={"covolume": float(cov), "max_expression": float(M), "ratio": float(ratio), "C": C, **parts, "q": dec.q, "p": list(dec.p)},
        checks={"within_factor": ok},
        config={"t": float(t), "weight": str(w), "basis": [list(v) for v in basis.vectors]},
    )


def certify_decomposition_constant(corpus) -> float:
    """Largest ``max(ratio, 1/ratio)`` over ``(basis, x, w, t)`` instances."""
    worst = 1.0
    for basis, x, w, t in corpus:
        r = covolume_decomposition_check(basis, x, w, t, C=math.inf).bounds["ratio"]
        worst = max(worst, r, 1 / r)
    return worst


def default_decomposition_constant(n: int) -> int:
    """``(n+1)!`` for sublattices of Z^{n+1}."""
    return factorial(n + 1)
