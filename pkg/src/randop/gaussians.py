"""Gaussian and indicator atoms with closed-form inner products.

Every L2 inner product needed to assemble Gram matrices — on the full line
or restricted to an interval — reduces to normal densities and CDFs via the
Gaussian product identity

    p_a(u - s) p_b(u - t) = p_{a+b}(s - t) * p_v(u - m),

with v = a*b/(a+b) and m = (b*s + a*t)/(a+b), so no quadrature is used
anywhere in the package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np
from scipy.special import erfc as _erfc

from .windows import Window

SQRT2 = math.sqrt(2.0)

# Exponents below this underflow to exactly 0 by policy; ratios of tail
# quantities are never formed from these values.
MIN_EXPONENT = -700.0


def density(variance, x):
    """Centred normal density with the given variance, at x (scalar or array)."""
    if not (variance > 0.0) or not math.isfinite(variance):
        raise ValueError(f"variance must be positive and finite, got {variance}")
    norm = 1.0 / math.sqrt(2.0 * math.pi * variance)
    if np.ndim(x) == 0:
        expo = -(x * x) / (2.0 * variance)
        return 0.0 if expo < MIN_EXPONENT else norm * math.exp(expo)
    x = np.asarray(x, dtype=float)
    expo = -(x * x) / (2.0 * variance)
    return np.where(expo < MIN_EXPONENT, 0.0, norm * np.exp(np.maximum(expo, MIN_EXPONENT)))


def normal_cdf(x):
    """Standard normal CDF, accurate to ~1 ulp of erfc.

    Built from the tail 0.5*erfc(|x|/sqrt(2)) on one side and its reflection
    on the other, so Phi(-x) and 1 - Phi(x) share the same computed tail.
    """
    if np.ndim(x) == 0:
        tail = 0.5 * math.erfc(abs(x) / SQRT2)
        return 1.0 - tail if x >= 0.0 else tail
    x = np.asarray(x, dtype=float)
    tail = 0.5 * _erfc(np.abs(x) / SQRT2)
    return np.where(x >= 0.0, 1.0 - tail, tail)


@dataclass(frozen=True)
class GaussianBump:
    """coefficient * p_variance(. - center)."""

    center: float
    variance: float
    coefficient: float = 1.0

    def __post_init__(self) -> None:
        if not (self.variance > 0.0) or not math.isfinite(self.variance):
            raise ValueError(f"bump variance must be positive and finite, got {self.variance}")
        if not (math.isfinite(self.center) and math.isfinite(self.coefficient)):
            raise ValueError("bump center and coefficient must be finite")

    def __call__(self, x):
        return self.coefficient * density(self.variance, np.asarray(x, dtype=float) - self.center)


@dataclass(frozen=True)
class IndicatorAtom:
    """coefficient * 1_{[lo, hi)}."""

    lo: float
    hi: float
    coefficient: float = 1.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.lo) and math.isfinite(self.hi) and math.isfinite(self.coefficient)):
            raise ValueError("indicator parameters must be finite")
        if self.lo > self.hi:
            raise ValueError(f"indicator requires lo <= hi, got [{self.lo}, {self.hi}]")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return self.coefficient * ((x >= self.lo) & (x < self.hi)).astype(float)


Atom = Union[GaussianBump, IndicatorAtom]


@dataclass(frozen=True)
class TargetFunction:
    """A finite mixture of Gaussian bumps and interval indicators."""

    atoms: tuple

    def __post_init__(self) -> None:
        object.__setattr__(self, "atoms", tuple(self.atoms))
        for atom in self.atoms:
            if not isinstance(atom, (GaussianBump, IndicatorAtom)):
                raise TypeError(f"unsupported atom type {type(atom).__name__}")

    @classmethod
    def bump(cls, center: float, variance: float, coefficient: float = 1.0) -> "TargetFunction":
        return cls((GaussianBump(center, variance, coefficient),))

    @classmethod
    def indicator(cls, lo: float, hi: float, coefficient: float = 1.0) -> "TargetFunction":
        return cls((IndicatorAtom(lo, hi, coefficient),))

    def __add__(self, other: "TargetFunction") -> "TargetFunction":
        return TargetFunction(self.atoms + other.atoms)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        total = np.zeros_like(x)
        for atom in self.atoms:
            total = total + atom(x)
        return total


def _overlap(lo1: float, hi1: float, lo2: float, hi2: float) -> float:
    return max(0.0, min(hi1, hi2) - max(lo1, lo2))


def bump_pair_restricted(var1: float, c1, var2: float, c2, lo: float, hi: float):
    """Integral over [lo, hi] of p_var1(u - c1) p_var2(u - c2); c1, c2 may be arrays."""
    vsum = var1 + var2
    front = density(vsum, np.asarray(c1) - np.asarray(c2))
    v = var1 * var2 / vsum
    m = (var2 * np.asarray(c1) + var1 * np.asarray(c2)) / vsum
    sd = math.sqrt(v)
    return front * (normal_cdf((hi - m) / sd) - normal_cdf((lo - m) / sd))


def bump_mass(variance: float, center, lo: float, hi: float):
    """Integral over [lo, hi] of p_variance(u - center); center may be an array."""
    if hi <= lo:
        return np.zeros(np.shape(center)) if np.ndim(center) else 0.0
    sd = math.sqrt(variance)
    c = np.asarray(center)
    return normal_cdf((hi - c) / sd) - normal_cdf((lo - c) / sd)


def _inner_pair(a1: Atom, a2: Atom, lo: float, hi: float) -> float:
    """<a1, a2> on [lo, hi]; lo/hi may be -inf/+inf for the full line."""
    bounded = math.isfinite(lo) and math.isfinite(hi)
    if isinstance(a1, GaussianBump) and isinstance(a2, GaussianBump):
        if bounded:
            value = bump_pair_restricted(a1.variance, a1.center, a2.variance, a2.center, lo, hi)
        else:
            value = density(a1.variance + a2.variance, a1.center - a2.center)
        return a1.coefficient * a2.coefficient * float(value)
    if isinstance(a1, IndicatorAtom) and isinstance(a2, IndicatorAtom):
        left = max(a1.lo, a2.lo)
        right = min(a1.hi, a2.hi)
        if bounded:
            left, right = max(left, lo), min(right, hi)
        return a1.coefficient * a2.coefficient * max(0.0, right - left)
    bump, ind = (a1, a2) if isinstance(a1, GaussianBump) else (a2, a1)
    left, right = ind.lo, ind.hi
    if bounded:
        left, right = max(left, lo), min(right, hi)
    if right <= left:
        return 0.0
    return bump.coefficient * ind.coefficient * float(bump_mass(bump.variance, bump.center, left, right))


def inner_full(a1: Atom, a2: Atom) -> float:
    """Full-line L2 inner product of two atoms, in closed form.

    For two bumps this is the convolution identity
    <p_a(.-s), p_b(.-t)> = p_{a+b}(s - t).
    """
    return _inner_pair(a1, a2, -math.inf, math.inf)


def inner_restricted(a1: Atom, a2: Atom, interval: Window) -> float:
    """L2([a, b]) inner product of two atoms, in closed form."""
    return _inner_pair(a1, a2, interval.lo, interval.hi)


def norm_sq(f: TargetFunction, interval: Window | None = None) -> float:
    """Squared L2 norm of an atom mixture, over an interval or the full line.

    Clamped at zero: exact cancellation can land a hair below zero in floats.
    """
    lo, hi = (interval.lo, interval.hi) if interval is not None else (-math.inf, math.inf)
    atoms = f.atoms
    total = 0.0
    for i, a in enumerate(atoms):
        total += _inner_pair(a, a, lo, hi)
        for b in atoms[i + 1:]:
            total += 2.0 * _inner_pair(a, b, lo, hi)
    return max(total, 0.0)


def shift_coefficients(f: TargetFunction, variance: float, positions, interval: Window | None = None) -> np.ndarray:
    """Vector of <f, p_variance(. - theta)> for an array of shifts theta.

    Restricted to the interval when given, full-line otherwise.
    """
    positions = np.asarray(positions, dtype=float)
    out = np.zeros_like(positions)
    if interval is not None:
        lo, hi = interval.lo, interval.hi
    for atom in f.atoms:
        if isinstance(atom, GaussianBump):
            if interval is None:
                term = density(variance + atom.variance, positions - atom.center)
            else:
                term = bump_pair_restricted(variance, positions, atom.variance, atom.center, lo, hi)
            out = out + atom.coefficient * term
        else:
            left, right = atom.lo, atom.hi
            if interval is not None:
                left, right = max(left, lo), min(right, hi)
            if right > left:
                out = out + atom.coefficient * bump_mass(variance, positions, left, right)
    return out
