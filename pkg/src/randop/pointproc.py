"""Stationary point processes on finite windows and their count statistics.

Counting is half-open everywhere: a point θ lies in [lo, hi) iff lo <= θ < hi.
The one deliberate exception is `reciprocal_sum`, which uses the closed range
[1, x] so that integer lattice points at the right endpoint contribute (the
harmonic-number fixture requires θ = x to count).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .windows import Window

_MAX_SEED = 2**64


@dataclass(frozen=True)
class ProcessSpec:
    """Tagged description of a stationary point process on the line.

    kinds:
      poisson  — homogeneous Poisson, parameter intensity > 0
      renewal  — Gamma(shape, mean) inter-arrival renewal process
      lattice  — grid of spacing > 0 with a uniform random shift
    """

    kind: str
    intensity: float = 0.0
    shape: float = 0.0
    mean: float = 0.0
    spacing: float = 0.0

    def __post_init__(self) -> None:
        if self.kind == "poisson":
            _require_positive("intensity", self.intensity)
        elif self.kind == "renewal":
            _require_positive("shape", self.shape)
            _require_positive("mean", self.mean)
        elif self.kind == "lattice":
            _require_positive("spacing", self.spacing)
        else:
            raise ValueError(f"unknown process kind {self.kind!r}")

    @classmethod
    def poisson(cls, intensity: float) -> "ProcessSpec":
        return cls("poisson", intensity=float(intensity))

    @classmethod
    def renewal(cls, shape: float, mean: float) -> "ProcessSpec":
        return cls("renewal", shape=float(shape), mean=float(mean))

    @classmethod
    def lattice(cls, spacing: float) -> "ProcessSpec":
        return cls("lattice", spacing=float(spacing))

    @property
    def rate(self) -> float:
        """Expected number of points per unit length."""
        if self.kind == "poisson":
            return self.intensity
        if self.kind == "renewal":
            return 1.0 / self.mean
        return 1.0 / self.spacing


def _require_positive(name: str, value: float) -> None:
    if not (value > 0.0) or not math.isfinite(value):
        raise ValueError(f"{name} must be positive and finite, got {value}")


@dataclass(frozen=True)
class PointConfiguration:
    """A sorted realization of a point process inside a window.

    Weights default to 1 and may be zero; coincident points are allowed (the
    operator built from them is rank-deficient but valid).
    """

    window: Window
    points: np.ndarray
    weights: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 1:
            raise ValueError("points must be one-dimensional")
        if pts.size and not np.all(np.diff(pts) >= 0.0):
            raise ValueError("points must be sorted nondecreasing")
        if pts.size and not (pts[0] >= self.window.lo and pts[-1] < self.window.hi):
            raise ValueError("points must lie inside the half-open window")
        wts = self.weights
        wts = np.ones_like(pts) if wts is None else np.asarray(wts, dtype=float)
        if wts.shape != pts.shape:
            raise ValueError("weights must match points in length")
        if wts.size and not np.all(wts >= 0.0):
            raise ValueError("weights must be nonnegative")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", wts)

    def __len__(self) -> int:
        return self.points.size


@dataclass(frozen=True)
class CountSequence:
    """Counts over consecutive unit intervals [base+i, base+i+1)."""

    base: int
    counts: np.ndarray

    def __post_init__(self) -> None:
        counts = np.asarray(self.counts, dtype=int)
        if counts.size and not np.all(counts >= 0):
            raise ValueError("counts must be nonnegative")
        object.__setattr__(self, "counts", counts)

    def __len__(self) -> int:
        return self.counts.size


def _rng(seed: int) -> np.random.Generator:
    if not isinstance(seed, (int, np.integer)):
        raise ValueError(f"seed must be an integer, got {type(seed).__name__}")
    if not (0 <= int(seed) < _MAX_SEED):
        raise ValueError(f"seed must fit in 64 bits, got {seed}")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed))))


def _sample_poisson(intensity: float, window: Window, rng: np.random.Generator) -> np.ndarray:
    count = rng.poisson(intensity * window.length)
    return np.sort(rng.uniform(window.lo, window.hi, size=count))


def _sample_lattice(spacing: float, window: Window, rng: np.random.Generator) -> np.ndarray:
    shift = rng.uniform(0.0, spacing)
    first = math.ceil((window.lo - shift) / spacing)
    last = math.ceil((window.hi - shift) / spacing) - 1
    pts = shift + spacing * np.arange(first, last + 1, dtype=float)
    return pts[(pts >= window.lo) & (pts < window.hi)]


def _sample_renewal(shape: float, mean: float, window: Window, rng: np.random.Generator) -> np.ndarray:
    # Burn-in of 10 mean gaps approximates the stationary (equilibrium) start;
    # the residual bias decays exponentially in the burn-in length.
    scale = mean / shape
    start = window.lo - 10.0 * mean
    expected = (window.hi - start) / mean
    block = max(64, int(1.5 * expected) + 8 * int(math.sqrt(expected) + 1.0))
    chunks = []
    last = start
    while last < window.hi:
        arrivals = last + np.cumsum(rng.gamma(shape, scale, size=block))
        chunks.append(arrivals)
        last = arrivals[-1]
    pts = np.concatenate(chunks)
    return pts[(pts >= window.lo) & (pts < window.hi)]


def sample(spec: ProcessSpec, window: Window, seed: int) -> PointConfiguration:
    """Draw one realization inside the window, deterministically in the seed."""
    rng = _rng(seed)
    if spec.kind == "poisson":
        pts = _sample_poisson(spec.intensity, window, rng)
    elif spec.kind == "lattice":
        pts = _sample_lattice(spec.spacing, window, rng)
    else:
        pts = _sample_renewal(spec.shape, spec.mean, window, rng)
    return PointConfiguration(window=window, points=pts)


def count_in(config: PointConfiguration, interval: Window) -> int:
    """Number of points in [interval.lo, interval.hi), by binary search."""
    if not config.window.contains(interval):
        raise ValueError(f"interval {interval} is not inside window {config.window}")
    lo = np.searchsorted(config.points, interval.lo, side="left")
    hi = np.searchsorted(config.points, interval.hi, side="left")
    return int(hi - lo)


def unit_counts(config: PointConfiguration, first: int, last: int) -> CountSequence:
    """Counts over the unit intervals [first, first+1), ..., [last, last+1)."""
    if last < first:
        raise ValueError(f"need first <= last, got [{first}, {last}]")
    if not config.window.contains(Window(float(first), float(last + 1))):
        raise ValueError(f"range [{first}, {last + 1}] is not inside window {config.window}")
    edges = np.arange(first, last + 2, dtype=float)
    idx = np.searchsorted(config.points, edges, side="left")
    return CountSequence(base=int(first), counts=np.diff(idx))


def ergodic_average(counts: CountSequence, n: int) -> float:
    """Mean of the first n unit counts."""
    if not (1 <= n <= len(counts)):
        raise ValueError(f"n must be in [1, {len(counts)}], got {n}")
    return float(np.sum(counts.counts[:n])) / float(n)


def max_unit_count(counts: CountSequence, n: int) -> int:
    """Maximum of the first n unit counts."""
    if not (1 <= n <= len(counts)):
        raise ValueError(f"n must be in [1, {len(counts)}], got {n}")
    return int(np.max(counts.counts[:n]))


def reciprocal_sum(config: PointConfiguration, x: float) -> float:
    """Sum of 1/θ over points θ in the closed range [1, x]."""
    if not (x >= 1.0):
        raise ValueError(f"x must be at least 1, got {x}")
    if not config.window.contains(Window(1.0, float(x))):
        raise ValueError(f"window {config.window} does not cover [1, {x}]")
    lo = np.searchsorted(config.points, 1.0, side="left")
    hi = np.searchsorted(config.points, float(x), side="right")
    return math.fsum(1.0 / config.points[lo:hi])
