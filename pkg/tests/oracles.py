"""Independent numerical oracles used by the test suite.

Everything here is computed by a different method than the library uses:
characteristic-function inversion instead of sampling, polar/spherical grid
quadrature instead of sphere sampling, hit-or-miss Monte Carlo instead of
closed-form volumes.
"""

import math

import numpy as np
from scipy.integrate import quad


def sas_tail_mass(u, alpha):
    """P(|X| > u) for X ~ SaS(1), by Gil-Pelaez inversion of exp(-|w|^alpha)."""
    val, _ = quad(lambda w: math.sin(w * u) / w * math.exp(-(w ** alpha)), 0.0,
                  np.inf, limit=400)
    return 2.0 * (0.5 - val / math.pi)


def radon_measure_grid_2d(a, c, alpha, n_theta=4000):
    """m(W) for W = {y^T A y >= c} in d = 2 by angular grid quadrature.

    The radial integral is closed-form, so this reduces to a trapezoid rule
    over the angle; independent of the sphere-sampling path.
    """
    a = np.asarray(a, dtype=float)
    theta = np.linspace(0.0, 2.0 * math.pi, n_theta, endpoint=False)
    u = np.stack([np.cos(theta), np.sin(theta)], axis=1)
    f = (np.einsum("ni,ij,nj->n", u, a, u) / c) ** (alpha / 2.0)
    return float(np.mean(f)) * 2.0 * math.pi / alpha


def radon_measure_grid_3d(a, c, alpha, n_theta=400, n_phi=800):
    """Same as the 2D oracle but over a latitude/longitude grid on S^2."""
    a = np.asarray(a, dtype=float)
    # midpoint rule in cos(polar) x azimuth gives uniform area weights
    mu = (np.arange(n_theta) + 0.5) / n_theta * 2.0 - 1.0
    phi = (np.arange(n_phi) + 0.5) / n_phi * 2.0 * math.pi
    st = np.sqrt(1.0 - mu ** 2)
    x = st[:, None] * np.cos(phi)[None, :]
    y = st[:, None] * np.sin(phi)[None, :]
    z = np.broadcast_to(mu[:, None], x.shape)
    u = np.stack([x.ravel(), y.ravel(), z.ravel()], axis=1)
    f = (np.einsum("ni,ij,nj->n", u, a, u) / c) ** (alpha / 2.0)
    return float(np.mean(f)) * 4.0 * math.pi / alpha


def ellipsoid_volume_mc(a, c, n=10_000_000, seed=0):
    """Hit-or-miss volume of {y^T A y < c} inside its bounding box."""
    a = np.asarray(a, dtype=float)
    d = a.shape[0]
    eigvals, eigvecs = np.linalg.eigh(a)
    half = math.sqrt(c) / np.sqrt(eigvals.min())
    rng = np.random.default_rng(seed)
    hits = 0
    block = 1_000_000
    done = 0
    while done < n:
        nb = min(block, n - done)
        pts = rng.uniform(-half, half, size=(nb, d))
        hits += int(np.sum(np.einsum("ni,ij,nj->n", pts, a, pts) < c))
        done += nb
    return hits / n * (2.0 * half) ** d


def finite_difference_gradient(f, x, h=1e-5):
    """Central finite differences of a scalar function."""
    x = np.asarray(x, dtype=float)
    g = np.zeros_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2.0 * h)
    return g
