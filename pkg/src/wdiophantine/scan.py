"""Vectorised float prefilter for denominator scans.

The float pass never decides anything.  It only produces, for each ``q``, a
guaranteed bracket ``[lo, hi]`` of ``log ||q x - p||_w``; candidates selected from
these brackets are then re-checked exactly.

Accuracy: each coordinate is split as ``x = x_hi + x_lo`` with ``x_hi`` on the
``2**-26`` grid, so ``q * x_hi`` is exact in double precision for
``q < 2**27`` and the nearest-integer distance of ``q x`` carries an absolute
error far below ``DIST_EPS``.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from .core import TargetVector, Weight
from .errors import ScaleOverflow

MAX_SCAN_Q = 1 << 27
DIST_EPS = 2.0**-46
LOG_SLACK = 1e-9
CHUNK = 1 << 18


def _split(frac: Fraction) -> tuple[float, float]:
    hi = Fraction(math.floor(frac * 2**26), 2**26)
    return float(hi), float(frac - hi)


class DistanceScanner:
    """Nearest-integer distances ``||q x_i||`` for blocks of denominators."""

    def __init__(self, x: TargetVector):
        self.x = x
        fracs = [f - math.floor(f) for f in x.fraction_midpoints()]
        self._parts = [_split(f) for f in fracs]

    def distances(self, q: np.ndarray) -> np.ndarray:
        """Array of shape (d, len(q)) with float distances to the nearest integer."""
        if len(q) and q[-1] >= MAX_SCAN_Q:
            raise ScaleOverflow(f"denominator {int(q[-1])} exceeds scan budget {MAX_SCAN_Q}")
        qf = q.astype(np.float64)
        out = np.empty((len(self._parts), len(q)))
        for i, (hi, lo) in enumerate(self._parts):
            t = qf * hi
            t -= np.floor(t)
            t += qf * lo
            t -= np.rint(t)
            np.abs(t, out=out[i])
        return out


def log_err_bounds(dist: np.ndarray, w: Weight) -> tuple[np.ndarray, np.ndarray]:
    """Guaranteed brackets of ``log ||q x - p||_w`` from float distances.

    Zero-weight coordinates of a nearest-integer residual are below 1, so they
    contribute nothing.
    """
    n = dist.shape[1]
    lo = np.full(n, -np.inf)
    hi = np.full(n, -np.inf)
    with np.errstate(divide="ignore"):
        for i, wi in enumerate(w.entries):
            if wi == 0:
                continue
            inv = 1.0 / float(wi)
            d = dist[i]
            lo = np.maximum(lo, inv * np.log(np.maximum(d - DIST_EPS, 0.0)))
            hi = np.maximum(hi, inv * np.log(d + DIST_EPS))
    lo = lo - LOG_SLACK * (1.0 + np.abs(lo))
    lo[np.isnan(lo)] = -np.inf
    hi = hi + LOG_SLACK * (1.0 + np.abs(hi))
    return lo, hi


def record_candidates(scanner: DistanceScanner, w: Weight, q_max: int, start: int = 1):
    """Yield blocks of denominators that may improve on every smaller denominator.

    A denominator is dropped only when its error is provably not below the error
    of some smaller denominator, so the true record set is always contained.
    """
    running_hi = np.inf
    for a in range(start, q_max + 1, CHUNK):
        b = min(a + CHUNK - 1, q_max)
        q = np.arange(a, b + 1, dtype=np.int64)
        lo, hi = log_err_bounds(scanner.distances(q), w)
        prefix = np.minimum.accumulate(np.concatenate(([running_hi], hi[:-1])))
        keep = lo < prefix
        running_hi = min(running_hi, float(hi.min()))
        yield q[keep]


def first_below(scanner: DistanceScanner, w: Weight, q_max: int, log_threshold: float):
    """Yield denominators (ascending) whose error may be below ``exp(log_threshold)``."""
    for a in range(1, q_max + 1, CHUNK):
        b = min(a + CHUNK - 1, q_max)
        q = np.arange(a, b + 1, dtype=np.int64)
        lo, _ = log_err_bounds(scanner.distances(q), w)
        for v in q[lo < log_threshold + LOG_SLACK * (1 + abs(log_threshold))]:
            yield int(v)
