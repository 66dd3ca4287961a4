"""Finite-rank representation of the random operator compressed to an interval.

Compressing the random integral operator to L2([a, b]) leaves a weighted sum
of rank-one terms, one per process point. Its nonzero spectrum equals that of
the symmetric matrix S = D^{1/2} G D^{1/2}, where G holds the pairwise
restricted inner products of the shifted Gaussian atoms and D their weights.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .gaussians import GaussianBump, TargetFunction, density, norm_sq, normal_cdf, shift_coefficients
from .pointproc import PointConfiguration
from .windows import Window

DEFAULT_TAIL_TOL = 1e-30


@dataclass(frozen=True)
class RestrictedOperator:
    """Matrix form of the operator compressed to L2([interval.lo, interval.hi])."""

    interval: Window
    variance: float
    positions: np.ndarray
    weights: np.ndarray
    gram: np.ndarray
    weighted: np.ndarray

    @property
    def rank_bound(self) -> int:
        return self.positions.size


def atom_norm_sq(variance: float, positions, interval: Window) -> np.ndarray:
    """Squared restricted norms of the projected atoms at the given shifts.

    Equals p_{2v}(0) * [Phi((b-θ)/sqrt(v/2)) - Phi((a-θ)/sqrt(v/2))].
    """
    positions = np.asarray(positions, dtype=float)
    sd = math.sqrt(variance / 2.0)
    tail = normal_cdf((interval.hi - positions) / sd) - normal_cdf((interval.lo - positions) / sd)
    return density(2.0 * variance, 0.0) * tail


def build_restricted(
    config: PointConfiguration,
    variance: float,
    interval: Window,
    tail_tol: float = DEFAULT_TAIL_TOL,
) -> RestrictedOperator:
    """Assemble the Gram and weighted matrices from a point configuration.

    Points whose projected atom has squared norm below
    tail_tol * p_{2v}(0) * |interval| are dropped; they shift eigenvalues by
    less than that additive amount, far below every test tolerance.
    """
    if not (variance > 0.0) or not math.isfinite(variance):
        raise ValueError(f"variance must be positive and finite, got {variance}")
    if not (0.0 < tail_tol < 1.0):
        raise ValueError(f"tail_tol must be in (0, 1), got {tail_tol}")

    pts = config.points
    wts = config.weights
    if pts.size and interval.length > 0.0:
        norms = atom_norm_sq(variance, pts, interval)
        keep = norms >= tail_tol * density(2.0 * variance, 0.0) * interval.length
        pts, wts = pts[keep], wts[keep]
    else:
        pts = pts[:0]
        wts = wts[:0]

    m = pts.size
    if m == 0:
        gram = np.zeros((0, 0))
        weighted = np.zeros((0, 0))
    else:
        # Pairwise restricted inner products in closed form: the product of two
        # atoms at s, t integrates to p_{2v}(s-t) times the mass that the
        # Gaussian with variance v/2 at the midpoint leaves inside [a, b].
        diff = pts[:, None] - pts[None, :]
        mid = 0.5 * (pts[:, None] + pts[None, :])
        sd = math.sqrt(variance / 2.0)
        inside = normal_cdf((interval.hi - mid) / sd) - normal_cdf((interval.lo - mid) / sd)
        gram = density(2.0 * variance, diff) * inside
        root_w = np.sqrt(wts)
        weighted = gram * np.outer(root_w, root_w)

    return RestrictedOperator(
        interval=interval,
        variance=variance,
        positions=pts,
        weights=wts,
        gram=gram,
        weighted=weighted,
    )


def atom_norms(op: RestrictedOperator) -> np.ndarray:
    """Squared norms of the retained projected atoms (the Gram diagonal)."""
    return np.diag(op.gram).copy()


def coefficient_vector(op: RestrictedOperator, f: TargetFunction) -> np.ndarray:
    """Inner products of f with each retained atom, over the interval."""
    return shift_coefficients(f, op.variance, op.positions, op.interval)


def quadratic_form(op: RestrictedOperator, f: TargetFunction) -> float:
    """<A_Q f, f> over the interval: the weighted sum of squared coefficients."""
    c = coefficient_vector(op, f)
    return float(np.dot(op.weights, c * c))


def apply(op: RestrictedOperator, f: TargetFunction) -> TargetFunction:
    """Image of f: the Gaussian mixture with coefficients w_i <f, atom_i>."""
    c = coefficient_vector(op, f)
    atoms = tuple(
        GaussianBump(float(theta), op.variance, float(w * ci))
        for theta, w, ci in zip(op.positions, op.weights, c)
    )
    return TargetFunction(atoms)


def boundedness_certificate(config: PointConfiguration, variance: float, interval: Window) -> float:
    """Sum over all points of the peak of their atom on the interval.

    Finiteness of this sum certifies that the compression is a bounded
    operator; the peak sits at the point clamped into [a, b].
    """
    if not (variance > 0.0) or not math.isfinite(variance):
        raise ValueError(f"variance must be positive and finite, got {variance}")
    pts = config.points
    gap = pts - np.clip(pts, interval.lo, interval.hi)
    return float(np.sum(density(variance, gap)))


def rayleigh_quotient(op: RestrictedOperator, f: TargetFunction) -> float:
    """quadratic_form(f) / ||f||^2 on the interval; lower bound for the top eigenvalue."""
    denom = norm_sq(f, op.interval)
    if denom <= 0.0:
        raise ValueError("rayleigh quotient requires a target with positive norm")
    return quadratic_form(op, f) / denom
