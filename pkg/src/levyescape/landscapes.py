"""Synthetic objective functions with exact gradients and basin descriptions.

Each landscape exposes its dimension, analytic value/gradient, a minimizer,
and the local strong-convexity / smoothness constants (mu, ell) of the basin
around that minimizer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .stable import ParameterError

__all__ = [
    "Landscape",
    "QuadraticBasin",
    "DoubleWell1D",
    "IntervalRegion",
    "BasinSpec",
    "in_inner_basin",
]


class Landscape:
    """Interface: an objective with analytic gradient and basin constants."""

    dim: int
    mu: float
    ell: float

    def value(self, theta):
        raise NotImplementedError

    def gradient(self, theta):
        raise NotImplementedError

    def minimizer(self):
        raise NotImplementedError

    def eval(self, theta):
        """Return (value, gradient) at ``theta``."""
        theta = self._check(theta)
        return self.value(theta), self.gradient(theta)

    def _check(self, theta):
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        if theta.shape[-1] != self.dim:
            raise ValueError(f"expected {self.dim} coordinates, got {theta.shape[-1]}")
        return theta


@dataclass
class QuadraticBasin(Landscape):
    """F(y) = f_star + 1/2 (y - center)^T H (y - center), basin = level set at ``height``.

    The basin is {y : F(y) <= height}; the derived constant
    h_f_star = 2 (height - f_star) appears in the escaping-set thresholds.
    """

    H: np.ndarray
    center: np.ndarray
    f_star: float = 0.0
    height: float = 1.0

    def __post_init__(self):
        self.H = np.atleast_2d(np.asarray(self.H, dtype=float))
        self.center = np.atleast_1d(np.asarray(self.center, dtype=float))
        if self.H.shape[0] != self.H.shape[1] or self.H.shape[0] != self.center.size:
            raise ValueError("H must be square and match the center dimension")
        if not np.allclose(self.H, self.H.T, atol=1e-12):
            raise ValueError("H must be symmetric")
        eigvals = np.linalg.eigvalsh(self.H)
        if eigvals[0] <= 0:
            raise ValueError("H must be positive definite")
        if not self.height > self.f_star:
            raise ValueError("basin height must exceed the minimum value")
        self.dim = self.center.size
        self.mu = float(eigvals[0])
        self.ell = float(eigvals[-1])

    @property
    def h_f_star(self):
        return 2.0 * (self.height - self.f_star)

    def value(self, theta):
        d = np.asarray(theta, dtype=float) - self.center
        q = np.einsum("...i,ij,...j->...", d, self.H, d)
        out = self.f_star + 0.5 * q
        return float(out) if out.ndim == 0 else out

    def gradient(self, theta):
        d = np.asarray(theta, dtype=float) - self.center
        return d @ self.H  # H is symmetric; batched rows supported

    def minimizer(self):
        return self.center.copy()

    def contains(self, theta):
        return self.value(np.atleast_1d(theta)) <= self.height

    def boundary_distance(self, theta):
        """Euclidean distance from ``theta`` to the basin boundary.

        Exact along the ray through the center after whitening by H^(1/2):
        the boundary point on the ray is center + r_max * d / ||d||_H-scaled,
        and for points on a common ray the Euclidean gap is (1 - s) ||d||
        with s = sqrt(quadratic form ratio).  For points off-center this is
        the ray distance, a lower bound within the ellipsoid used as the
        inner-basin margin.
        """
        d = np.atleast_1d(np.asarray(theta, dtype=float)) - self.center
        q = float(d @ self.H @ d)
        if q == 0.0:
            # distance from the center along the flattest direction
            return math.sqrt(self.h_f_star / self.ell)
        s = math.sqrt(self.h_f_star / q)
        return abs(s - 1.0) * float(np.linalg.norm(d))


@dataclass
class DoubleWell1D(Landscape):
    """f(x) = min(x^2, a (x - 1)^2): two basins with minima at 0 and 1.

    The branches cross at x_c = sqrt(a) / (sqrt(a) + 1).  At the crossover
    the gradient takes the right (x = 1) branch.
    """

    a: float

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError(f"asymmetry parameter a must be positive, got {self.a}")
        self.dim = 1
        # constants of the right (x = 1) basin
        self.mu = 2.0 * self.a
        self.ell = 2.0 * self.a

    def crossover(self):
        r = math.sqrt(self.a)
        return r / (r + 1.0)

    def _right_branch(self, x):
        # tie at the crossover goes to the right branch
        return self.a * (x - 1.0) ** 2 <= x ** 2

    def value(self, theta):
        x = np.asarray(theta, dtype=float)
        out = np.minimum(x ** 2, self.a * (x - 1.0) ** 2)
        return float(out.reshape(-1)[0]) if out.size == 1 else out

    def gradient(self, theta):
        x = np.asarray(theta, dtype=float)
        g = np.where(self._right_branch(x), 2.0 * self.a * (x - 1.0), 2.0 * x)
        return np.atleast_1d(g if x.ndim else float(g))

    def minimizer(self):
        return np.array([1.0])

    def right_basin_interval(self):
        """Level-cut basin of x = 1: (x_c, 2 - x_c), symmetric about 1."""
        x_c = self.crossover()
        return x_c, 2.0 - x_c


@dataclass
class IntervalRegion:
    """An open interval (lo, hi) serving as a 1D basin region."""

    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError("interval must have lo < hi")

    @property
    def dim(self):
        return 1

    def contains(self, theta):
        x = float(np.atleast_1d(theta)[0])
        return self.lo < x < self.hi

    def boundary_distance(self, theta):
        x = float(np.atleast_1d(theta)[0])
        return min(abs(x - self.lo), abs(x - self.hi))


@dataclass
class BasinSpec:
    """A basin region plus the inner-margin parameters (eps, gamma).

    The inner region keeps a safety margin eps^gamma from the boundary; the
    escape time is the first step the trajectory leaves that inner region.
    """

    region: object  # anything with contains() and boundary_distance()
    eps: float
    gamma: float = 1.0

    def __post_init__(self):
        if not (0.0 < self.eps < 1.0):
            raise ParameterError(f"eps must lie in (0, 1), got {self.eps}")
        if not self.gamma > 0:
            raise ParameterError(f"gamma must be positive, got {self.gamma}")

    @property
    def margin(self):
        return self.eps ** self.gamma

    def in_inner(self, theta, margin_factor=1.0):
        return (
            self.region.contains(theta)
            and self.region.boundary_distance(theta) >= margin_factor * self.margin
        )


def in_inner_basin(spec, theta):
    """True iff ``theta`` lies in the basin with boundary margin eps^gamma."""
    return spec.in_inner(theta)
