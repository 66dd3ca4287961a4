"""Spectral functionals of the compressed operator.

Eigenvalues of the weighted Gram matrix give everything downstream: operator
norm (top eigenvalue), nuclear norm (sum of the positive ones, which for this
positive-semidefinite family equals the trace), approximation widths
(d_n is the (n+1)-th eigenvalue), the tail bound on d_{N_x}, and the affine
fit that extracts the decay constant from sqrt(-variance * ln d_n).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .gaussians import density
from .operators import RestrictedOperator, atom_norm_sq
from .pointproc import PointConfiguration, count_in
from .windows import Window

WIDTH_FIT_FLOOR = 1e-12   # times the top eigenvalue: below is eigensolver noise
WIDTH_FIT_CAP = 1e-2      # times the top eigenvalue: above is pre-asymptotic


@dataclass(frozen=True)
class SpectralSummary:
    """Descending eigenvalues of the weighted matrix plus derived norms."""

    eigenvalues: np.ndarray
    operator_norm: float
    nuclear_norm: float
    trace: float

    def __post_init__(self) -> None:
        ev = np.asarray(self.eigenvalues, dtype=float)
        if ev.size and not np.all(np.diff(ev) <= 0.0):
            raise ValueError("eigenvalues must be sorted descending")
        object.__setattr__(self, "eigenvalues", ev)

    @property
    def rank(self) -> int:
        """Number of eigenvalues above the noise floor relative to the top one."""
        if self.eigenvalues.size == 0 or self.operator_norm <= 0.0:
            return 0
        return int(np.sum(self.eigenvalues > WIDTH_FIT_FLOOR * self.operator_norm))


@dataclass(frozen=True)
class DecayFit:
    """Affine fit y_n = slope*n + intercept over the usable width range."""

    slope: float
    intercept: float
    r_squared: float
    n_range: tuple


def eigen_sym(matrix: np.ndarray) -> tuple:
    """Eigen-decomposition of a symmetric matrix, eigenvalues descending.

    Returns (eigenvalues, eigenvectors) with columns of the second factor
    orthonormal and ordered to match.
    """
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"matrix must be square, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix entries must be finite")
    if m.size:
        scale = np.max(np.abs(m))
        if np.max(np.abs(m - m.T)) > 1e-12 * max(scale, 1e-300):
            raise ValueError("matrix must be symmetric to 1e-12 relative")
    if m.size == 0:
        return np.zeros(0), np.zeros((0, 0))
    values, vectors = np.linalg.eigh(m)
    return values[::-1].copy(), vectors[:, ::-1].copy()


def spectrum(op: RestrictedOperator) -> SpectralSummary:
    """Spectral summary of the weighted matrix of a restricted operator."""
    if op.rank_bound == 0:
        return SpectralSummary(np.zeros(0), 0.0, 0.0, 0.0)
    values, _ = eigen_sym(op.weighted)
    return SpectralSummary(
        eigenvalues=values,
        operator_norm=float(values[0]),
        nuclear_norm=float(np.sum(np.maximum(values, 0.0))),
        trace=float(np.trace(op.weighted)),
    )


def widths(summary: SpectralSummary, n_max: int) -> np.ndarray:
    """Approximation widths d_0..d_n_max; d_n is the (n+1)-th eigenvalue.

    The n-th width of the image of the unit ball under a compact positive
    operator is its (n+1)-th eigenvalue; entries beyond the rank are zero.
    """
    if n_max < 0:
        raise ValueError(f"n_max must be nonnegative, got {n_max}")
    out = np.zeros(n_max + 1)
    have = min(summary.eigenvalues.size, n_max + 1)
    out[:have] = np.maximum(summary.eigenvalues[:have], 0.0)
    return out


def width_tail_bound(
    config: PointConfiguration,
    variance: float,
    interval: Window,
    x: float,
    tail_tol: float = 1e-30,
) -> tuple:
    """Count N_x of points in [-x, x) and the tail sum bounding d_{N_x}.

    The bound sums w*||atom||^2 over retained points outside the counted
    range, so rank(central part) <= N_x makes d_{N_x} <= bound exact.
    """
    if not (x > 0.0):
        raise ValueError(f"x must be positive, got {x}")
    n_x = count_in(config, Window(-x, x))
    pts = config.points
    if pts.size == 0 or interval.length <= 0.0:
        return n_x, 0.0
    norms = atom_norm_sq(variance, pts, interval)
    keep = norms >= tail_tol * density(2.0 * variance, 0.0) * interval.length
    outside = ~((pts >= -x) & (pts < x))
    bound = float(np.sum((config.weights * norms)[keep & outside]))
    return n_x, bound


def decay_fit(width_seq, variance: float) -> DecayFit:
    """Fit sqrt(-variance * ln d_n) against n over the usable width range.

    Usable means d_n within [1e-12, 1e-2] times the top width; a squared-
    exponential decay exp(-(slope*n - b)^2 / variance) then shows up as an
    affine trend with that slope.
    """
    if not (variance > 0.0) or not math.isfinite(variance):
        raise ValueError(f"variance must be positive and finite, got {variance}")
    d = np.asarray(width_seq, dtype=float)
    if d.size == 0 or d[0] <= 0.0:
        raise ValueError("width sequence must start with a positive top width")
    top = d[0]
    usable = (d >= WIDTH_FIT_FLOOR * top) & (d <= WIDTH_FIT_CAP * top)
    ns = np.nonzero(usable)[0]
    if ns.size < 3:
        raise ValueError(f"need at least 3 usable widths, got {ns.size}")
    if np.any(d[ns] >= 1.0):
        raise ValueError("usable widths must be below 1 for the log transform")
    y = np.sqrt(-variance * np.log(d[ns]))
    slope, intercept = np.polyfit(ns, y, 1)
    residual = y - (slope * ns + intercept)
    total = y - np.mean(y)
    ss_tot = float(np.dot(total, total))
    ss_res = float(np.dot(residual, residual))
    r_squared = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return DecayFit(
        slope=float(slope),
        intercept=float(intercept),
        r_squared=float(min(max(r_squared, 0.0), 1.0)),
        n_range=(int(ns[0]), int(ns[-1])),
    )
