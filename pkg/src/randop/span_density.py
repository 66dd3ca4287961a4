"""Distance from a target function to the span of projected Gaussian atoms.

The squared least-squares distance from f to the span of atoms e_1..e_m in
L2([a, b]) is ||f||^2 - c^T G^+ c with c_i = <f, e_i> and G the Gram matrix.
Shifted-Gaussian Gram matrices are catastrophically ill-conditioned, so G^+
keeps only eigendirections above a relative floor; dropped directions bias
the distance upward, the conservative side for a density claim.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .gaussians import TargetFunction, norm_sq
from .operators import RestrictedOperator, build_restricted, coefficient_vector
from .pointproc import PointConfiguration
from .spectral import eigen_sym
from .windows import Window

PINV_FLOOR = 1e-12  # eigenvalues below this fraction of the top one are discarded

ORDERINGS = ("by-distance-to-interval-center", "by-index")


@dataclass(frozen=True)
class DensityCurve:
    """Span distances for growing atom counts, against a fixed target."""

    counts: np.ndarray
    distances: np.ndarray
    target_norm: float

    def __post_init__(self) -> None:
        counts = np.asarray(self.counts, dtype=int)
        distances = np.asarray(self.distances, dtype=float)
        if counts.shape != distances.shape:
            raise ValueError("counts and distances must have matching length")
        if counts.size and not np.all(np.diff(counts) > 0):
            raise ValueError("counts must be strictly increasing")
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "distances", distances)


def projected_energy(gram: np.ndarray, coeffs: np.ndarray) -> float:
    """c^T G^+ c via the eigen-pseudo-inverse with a relative floor."""
    if gram.shape[0] == 0:
        return 0.0
    values, vectors = eigen_sym(gram)
    top = values[0]
    if not (top > 0.0):
        return 0.0
    keep = values >= PINV_FLOOR * top
    proj = vectors[:, keep].T @ coeffs
    return float(np.sum(proj * proj / values[keep]))


def span_distance(op: RestrictedOperator, f: TargetFunction) -> float:
    """Least-squares distance from f to the span of the retained atoms."""
    total = norm_sq(f, op.interval)
    if op.rank_bound == 0:
        return math.sqrt(total)
    energy = projected_energy(op.gram, coefficient_vector(op, f))
    return math.sqrt(max(0.0, total - energy))


def _ordered_indices(positions: np.ndarray, interval: Window, ordering: str) -> np.ndarray:
    if ordering == "by-index":
        return np.arange(positions.size)
    if ordering == "by-distance-to-interval-center":
        center = 0.5 * (interval.lo + interval.hi)
        # stable sort keeps the by-index order among ties
        return np.argsort(np.abs(positions - center), kind="stable")
    raise ValueError(f"unknown ordering {ordering!r}; expected one of {ORDERINGS}")


def _count_grid(total: int, resolution: int = 12) -> np.ndarray:
    """Strictly increasing, roughly logarithmic atom counts from 1 to total."""
    if total <= 0:
        return np.zeros(0, dtype=int)
    raw = np.geomspace(1.0, float(total), num=min(resolution, total))
    return np.unique(np.round(raw).astype(int))


def _prefix_energies(gram: np.ndarray, coeffs: np.ndarray, tol: float = PINV_FLOOR) -> np.ndarray:
    """Cumulative projected energy of the coefficient functional after each prefix.

    Orthonormalizes the atoms one at a time in the Gram geometry (modified
    Gram-Schmidt with a second pass); an atom whose residual against the
    current span falls below tol times its own norm is skipped, as in the
    pseudo-inverse floor. Each accepted vector adds a nonnegative squared
    term, so the cumulative energies are nondecreasing by construction.
    """
    m = gram.shape[0]
    energies = np.zeros(m)
    basis = []      # orthonormal vectors in atom coordinates
    images = []     # gram @ q for each basis vector, to keep steps O(m)
    running = 0.0
    for i in range(m):
        b = np.zeros(m)
        b[i] = 1.0
        v = gram[:, i].copy()
        for _ in range(2):
            for q, gq in zip(basis, images):
                overlap = float(gq @ b)
                b -= overlap * q
                v -= overlap * gq
        norm2 = float(b @ v)
        if norm2 > tol * gram[i, i] and norm2 > 0.0:
            scale = math.sqrt(norm2)
            b /= scale
            v /= scale
            basis.append(b)
            images.append(v)
            running += float(b @ coeffs) ** 2
        energies[i] = running
    return energies


def density_curve(
    config: PointConfiguration,
    variance: float,
    interval: Window,
    f: TargetFunction,
    ordering: str = "by-distance-to-interval-center",
) -> DensityCurve:
    """Span distances using the first k atoms under the ordering.

    Atoms near the interval carry almost all projection mass, so the default
    ordering grows the family outward from the interval center. Distances come
    from incremental orthonormalization, which makes them nonincreasing in k
    exactly (projections onto nested spans can only improve).
    """
    op = build_restricted(config, variance, interval)
    order = _ordered_indices(op.positions, interval, ordering)
    target_norm = math.sqrt(norm_sq(f, interval))
    ks = _count_grid(op.rank_bound)
    coeffs = coefficient_vector(op, f)
    total = norm_sq(f, interval)
    gram = op.gram[np.ix_(order, order)]
    energies = _prefix_energies(gram, coeffs[order])
    distances = np.sqrt(np.maximum(0.0, total - energies[ks - 1])) if ks.size else np.zeros(0)
    return DensityCurve(counts=ks, distances=distances, target_norm=target_norm)
