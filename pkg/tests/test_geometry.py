import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from levyescape import geometry

from oracles import ellipsoid_volume_mc, radon_measure_grid_2d, radon_measure_grid_3d


def random_spd(d, seed):
    rng = np.random.default_rng(seed)
    q, _ = np.linalg.qr(rng.standard_normal((d, d)))
    eigs = rng.uniform(0.2, 8.0, size=d)
    return q @ np.diag(eigs) @ q.T


def test_isotropic_sets_coincide():
    spec = geometry.Spectrum(lambdas=np.array([2.0, 2.0]),
                             sigmas=np.array([1.0, 1.0]),
                             batch_size=1, h_f_star=2.0)
    w_sgd, w_adam = geometry.build_escape_sets(spec)
    assert np.allclose(w_sgd.A, w_adam.A)
    assert np.allclose(w_sgd.A, 2.0 * np.eye(2))
    assert w_sgd.c == pytest.approx(2.0)
    assert not w_sgd.membership(np.array([0.5, 0.5]))
    assert w_sgd.membership(np.array([1.0, 0.1]))


def test_escape_set_entrywise_products():
    spec = geometry.Spectrum(lambdas=np.array([4.0, 1.0]),
                             sigmas=np.array([2.0, 0.5]),
                             batch_size=1, h_f_star=1.0)
    w_sgd, _ = geometry.build_escape_sets(spec)
    assert np.allclose(w_sgd.A, np.diag([16.0, 0.25]))


def test_degenerate_covariance_empty_set():
    spec = geometry.Spectrum(lambdas=np.array([4.0, 1.0]),
                             sigmas=np.zeros(2), batch_size=1, h_f_star=1.0)
    w_sgd, _ = geometry.build_escape_sets(spec)
    assert not w_sgd.membership(np.array([1e9, 1e9]))
    with pytest.raises(Exception):
        geometry.radon_measure(w_sgd, 1.5)


def test_radon_measure_1d_closed_form():
    # W = {|y| >= 2}: m = (2/alpha) 2^(-alpha); at alpha = 1 this is 1
    w = geometry.QuadraticEscapeSet(A=np.array([[1.0]]), c=4.0)
    assert geometry.radon_measure(w, 1.0) == pytest.approx(1.0)
    assert geometry.radon_measure(w, 1.5) == pytest.approx((2 / 1.5) * 2 ** -1.5)


def test_radon_measure_threshold_scaling_closed_form():
    w1 = geometry.QuadraticEscapeSet(A=np.array([[3.0]]), c=1.0)
    w4 = geometry.QuadraticEscapeSet(A=np.array([[3.0]]), c=4.0)
    for alpha in (0.8, 1.3, 2.0):
        assert geometry.radon_measure(w4, alpha) == pytest.approx(
            2.0 ** -alpha * geometry.radon_measure(w1, alpha), rel=1e-12
        )


def test_radon_measure_matches_grid_oracle_2d():
    a = np.diag([4.0, 1.0])
    w = geometry.QuadraticEscapeSet(A=a, c=1.0)
    sampled = geometry.radon_measure(w, 1.5, n_dirs=400_000, seed=2)
    oracle = radon_measure_grid_2d(a, 1.0, 1.5)
    assert abs(sampled - oracle) / oracle < 0.01


def test_radon_measure_matches_grid_oracle_random_spd():
    for i, d in enumerate([2, 2, 2, 3, 3]):
        a = random_spd(d, 100 + i)
        w = geometry.QuadraticEscapeSet(A=a, c=1.7)
        sampled = geometry.radon_measure(w, 1.5, n_dirs=400_000, seed=3 + i)
        if d == 2:
            oracle = radon_measure_grid_2d(a, 1.7, 1.5)
        else:
            oracle = radon_measure_grid_3d(a, 1.7, 1.5)
        assert abs(sampled - oracle) / oracle < 0.01


def test_homogeneity_sampled_path_3_sigma():
    a = random_spd(3, 7)
    for k in (0.3, 2.0, 9.0):
        w1 = geometry.QuadraticEscapeSet(A=a, c=1.0)
        wk = geometry.QuadraticEscapeSet(A=a, c=k)
        m1, e1 = geometry.radon_measure(w1, 1.5, n_dirs=200_000, seed=11,
                                        with_stderr=True)
        mk, ek = geometry.radon_measure(wk, 1.5, n_dirs=200_000, seed=11,
                                        with_stderr=True)
        expect = k ** -0.75 * m1
        tol = 3.0 * math.hypot(ek, k ** -0.75 * e1)
        assert abs(mk - expect) <= max(tol, 1e-12)


def test_rotation_invariance():
    a = np.diag([5.0, 1.0, 0.5])
    rng = np.random.default_rng(13)
    q, _ = np.linalg.qr(rng.standard_normal((3, 3)))
    w = geometry.QuadraticEscapeSet(A=a, c=1.0)
    wr = geometry.QuadraticEscapeSet(A=q @ a @ q.T, c=1.0)
    m, e = geometry.radon_measure(w, 1.5, n_dirs=300_000, seed=5, with_stderr=True)
    mr, er = geometry.radon_measure(wr, 1.5, n_dirs=300_000, seed=6, with_stderr=True)
    assert abs(m - mr) <= 4.0 * math.hypot(e, er)


def test_ellipsoid_volumes():
    assert geometry.ellipsoid_volume(np.eye(2), 1.0) == pytest.approx(math.pi)
    assert geometry.ellipsoid_volume(np.diag([4.0, 1.0]), 1.0) == pytest.approx(
        math.pi / 2
    )
    a = np.diag([1.0, 4.0, 9.0])
    vol = geometry.ellipsoid_volume(a, 1.0)
    assert vol == pytest.approx(4 * math.pi / 3 / 6, rel=1e-12)
    mc = ellipsoid_volume_mc(a, 1.0, n=10_000_000, seed=1)
    assert abs(vol - mc) / vol < 0.005


def test_volume_echo_disagrees_by_design():
    lambdas = np.array([4.0, 1.0])
    echo = geometry.legacy_volume_echo(lambdas, 1, 1.0)
    standard = geometry.ellipsoid_volume(np.diag(lambdas), 1.0)
    assert echo != pytest.approx(standard)


def test_compare_measures_identity_ratio_one():
    spec = geometry.Spectrum(lambdas=np.ones(2), sigmas=np.ones(2),
                             batch_size=1, h_f_star=1.0)
    rep = geometry.compare_measures(spec, 1.5, n_dirs=100_000)
    assert rep["ratio_sgd_over_adam"] == pytest.approx(1.0, rel=1e-9)


def test_compare_measures_sigma_scaling():
    base = geometry.Spectrum(lambdas=np.array([3.0, 1.0]),
                             sigmas=np.array([2.0, 0.5]),
                             batch_size=1, h_f_star=1.0)
    scaled = geometry.Spectrum(lambdas=np.array([3.0, 1.0]),
                               sigmas=np.array([4.0, 1.0]),
                               batch_size=1, h_f_star=1.0)
    alpha = 1.5
    r0 = geometry.compare_measures(base, alpha, n_dirs=100_000, seed=4)
    r1 = geometry.compare_measures(scaled, alpha, n_dirs=100_000, seed=4)
    assert r1["m_sgd"] == pytest.approx(2.0 ** alpha * r0["m_sgd"], rel=1e-9)
    assert r1["m_adam"] == pytest.approx(r0["m_adam"], rel=1e-9)


def test_spectrum_validation():
    with pytest.raises(Exception):
        geometry.Spectrum(lambdas=np.array([1.0, 2.0]), sigmas=np.ones(2))
    with pytest.raises(Exception):
        geometry.Spectrum(lambdas=np.array([2.0, 1.0]), sigmas=np.ones(3))
    with pytest.raises(Exception):
        geometry.QuadraticEscapeSet(A=np.array([[1.0, 2.0], [2.0, 1.0]]), c=1.0)
    with pytest.raises(Exception):
        geometry.ellipsoid_volume(np.zeros((2, 2)), 1.0)


def test_shared_rotation_keeps_alignment():
    spec = geometry.Spectrum(lambdas=np.array([4.0, 1.0]),
                             sigmas=np.array([2.0, 0.5]),
                             batch_size=1, h_f_star=1.0, rotation_seed=3)
    w_sgd, w_adam = geometry.build_escape_sets(spec)
    # same eigenvectors: the product of the two A matrices commutes
    assert np.allclose(w_sgd.A @ w_adam.A, w_adam.A @ w_sgd.A, atol=1e-9)
    assert np.linalg.eigvalsh(w_sgd.A) == pytest.approx([0.25, 16.0], rel=1e-9)
