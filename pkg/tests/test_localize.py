import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import qp_project_peak, random_unimodal
from peakloc.completion import dominant_svd
from peakloc.fields import GridSpec, ProfileSpec, SeparableField, discretize
from peakloc.localize import (LocalizationBox, axis_supports, eta, eta_floor, feasible_peaks,
                              localize_axis, pamcur_stage, theorem2_region_bound,
                              theorem2_thresholds, zeta_prime)
from peakloc.sampling import NoiseModel


def sharp_exponential_vector():
    l = np.arange(1, 402)
    u = np.exp(-np.abs(0.1 * l - 20.1))
    return u / np.linalg.norm(u)


def test_eta_values():
    assert eta(1.0, 1.0, 0.0) == 1.0
    assert eta(2.0, 2.0, 2.0) == pytest.approx(0.0, abs=1e-15)
    assert eta(0.9, 1.0, 0.5) == pytest.approx(0.1 + math.sqrt(0.57), rel=1e-14)
    assert eta(0.9, 1.0, 0.5) == pytest.approx(0.8550, abs=1e-4)
    with pytest.raises(ValueError):
        eta(1.0, 2.0, 1.5)
    with pytest.raises(ValueError):
        eta(1.0, 0.0, 0.5)
    # above sigma0 the bound is still defined
    assert 0 < eta(1.2, 1.0, 0.5) < 1


def test_eta_floor_values():
    assert eta_floor(3.0, 0.0) == 1.0
    assert eta_floor(3.0, 3.0) == 0.0
    with pytest.raises(ValueError):
        eta_floor(1.0, 2.0)


@given(st.floats(0, 1), st.floats(0, 1), st.floats(1e-6, 1e3))
def test_eta_dominates_floor(a, b, sigma0):
    sigma = max(a, b) * sigma0
    zeta = min(a, b) * sigma0
    if sigma <= 0:
        return
    assert eta(sigma, sigma0, zeta) >= eta_floor(sigma, zeta) - 1e-12


@pytest.mark.parametrize("seed", range(200))
def test_inner_products_exceed_eta(seed):
    rng = np.random.default_rng(seed)
    n_r, n_c = rng.integers(2, 20, size=2)
    u0, _ = random_unimodal(rng, n_r)
    v0, _ = random_unimodal(rng, n_c)
    u0 /= np.linalg.norm(u0)
    v0 /= np.linalg.norm(v0)
    sigma0 = rng.uniform(0.5, 5)
    Z = rng.standard_normal((n_r, n_c))
    Z *= rng.uniform(0, 1.0) * sigma0 / np.linalg.norm(Z)
    zeta = np.linalg.norm(Z)
    u, sigma, v = dominant_svd(sigma0 * np.outer(u0, v0) + Z, seed=seed)
    if zeta > sigma:
        return
    assert (u0 @ u) * (v0 @ v) >= eta(sigma, sigma0, zeta) - 1e-9


def test_axis_examples():
    assert localize_axis(np.eye(6)[3], 1.0) == (4, 4)
    assert localize_axis(np.full(7, 1 / math.sqrt(7)), 1.0) == (1, 7)
    assert localize_axis(np.full(7, -1.0), 0.5) == (1, 7)
    with pytest.raises(ValueError):
        localize_axis(np.ones(3), 1.5)


def test_axis_five_point_example():
    u = np.array([0.1, 0.2, 0.9, 0.2, 0.1])
    w = u / np.linalg.norm(u)
    oracle = [math.sqrt(np.sum(qp_project_peak(w, l)[0] ** 2)) for l in range(1, 6)]
    assert np.allclose(axis_supports(u), oracle, atol=1e-12)
    assert np.allclose(oracle, [0.76316, 0.85485, 1.0, 0.85485, 0.76316], atol=1e-5)
    assert localize_axis(u, 0.99) == (3, 3)
    assert localize_axis(u, 0.85) == (2, 4)
    assert localize_axis(u, 0.7) == (1, 5)
    assert localize_axis(-u, 0.85) == (2, 4)


def test_no_feasible_index_returns_full_axis():
    u = np.array([1.0, 0.0, 1.0])
    assert feasible_peaks(u, 0.999).size == 0
    assert localize_axis(u, 0.999) == (1, 3)


@given(st.integers(0, 2 ** 32 - 1), st.floats(0, 1), st.floats(0, 1))
def test_raising_rho_never_widens(seed, r1, r2):
    u = np.random.default_rng(seed).standard_normal(9)
    lo, hi = min(r1, r2), max(r1, r2)
    sup = axis_supports(u)
    if feasible_peaks(u, hi, sup).size == 0:
        return
    a = localize_axis(u, lo, sup)
    b = localize_axis(u, hi, sup)
    assert a[0] <= b[0] <= b[1] <= a[1]


@pytest.mark.parametrize("seed", range(100))
def test_exact_zeta_contains_true_peak(seed):
    rng = np.random.default_rng(1000 + seed)
    n = int(rng.integers(5, 25))
    u0, pr = random_unimodal(rng, n)
    v0, pc = random_unimodal(rng, n)
    H = np.outer(u0, v0)
    H_hat = H + rng.uniform(0, 0.3) * np.linalg.norm(H) * rng.standard_normal(H.shape) / n
    u, sigma, v = dominant_svd(H_hat)
    zeta = np.linalg.norm(H - H_hat)
    if zeta > sigma:
        return
    rho = eta_floor(sigma, zeta)
    lo, hi = localize_axis(u, rho)
    assert lo <= pr <= hi
    lo, hi = localize_axis(v, rho)
    assert lo <= pc <= hi


def test_box_validation_and_area():
    b = LocalizationBox(2, 4, 3, 3)
    assert b.area == 3 and b.contains(3, 3) and not b.contains(1, 3)
    assert LocalizationBox.full(5, 6).area == 30
    with pytest.raises(ValueError):
        LocalizationBox(3, 2, 1, 1)


def test_stage_full_budget_contains_argmax():
    f = SeparableField(ProfileSpec("laplacian", a=8), ProfileSpec("gaussian", a=20), 1.0, (0.13, -0.21))
    H = discretize(f, GridSpec.uniform(30, 30, (-0.5, 0.5), (-0.5, 0.5)))
    st_ = pamcur_stage(H, 900, seed=1)
    r, c = np.unravel_index(np.argmax(H), H.shape)
    assert not st_.low_snr and st_.box.contains(r + 1, c + 1)
    assert st_.samples_used == 900


def test_stage_low_snr_gives_full_box():
    H = np.ones((10, 12))
    st_ = pamcur_stage(H, 60, zeta_mode="user", zeta=1e6, seed=0)
    assert st_.low_snr and st_.rho == 0.0
    assert st_.box == LocalizationBox.full(10, 12)


def test_stage_modes_and_determinism():
    H = np.outer(np.hanning(20) + 0.1, np.hanning(20) + 0.1)
    a = pamcur_stage(H, 200, NoiseModel("gaussian", 0.01), seed=5)
    b = pamcur_stage(H, 200, NoiseModel("gaussian", 0.01), seed=5)
    assert a.box == b.box and a.rho == b.rho
    f = pamcur_stage(H, 200, NoiseModel("gaussian", 0.01), seed=5, zeta_mode="formula")
    assert f.zeta_used > a.zeta_used
    with pytest.raises(ValueError):
        pamcur_stage(H, 200, zeta_mode="user")
    with pytest.raises(ValueError):
        pamcur_stage(H, 200, zeta_mode="oracle")


def test_zeta_prime_values():
    assert zeta_prime(0.0, 2.0) == 1.0
    assert zeta_prime(0.3, 1.0) == pytest.approx(4 * math.sqrt(0.91) - 3, rel=1e-14)
    assert zeta_prime(0.3, 1.0) == pytest.approx(0.8158, abs=1e-4)
    assert 4 * eta_floor(4.0, math.sqrt(7.0)) - 3 == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(ValueError):
        zeta_prime(math.sqrt(7.0), 4.0)


def test_sharp_exponential_thresholds():
    assert theorem2_thresholds(sharp_exponential_vector(), 0.3 * math.sqrt(2)) == (176, 226)


def _scan(u0, zp):
    thr = zp / math.sqrt(2)
    n = len(u0)
    lbl = max([j for j in range(1, n + 1) if np.abs(u0[:j]).sum() <= thr], default=0)
    lbr = min([j for j in range(1, n + 1) if np.abs(u0[j - 1:]).sum() <= thr], default=n + 1)
    return lbl, lbr


@pytest.mark.parametrize("seed", range(30))
def test_thresholds_match_direct_scan(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 15))
    u0, _ = random_unimodal(rng, n)
    u0 /= np.linalg.norm(u0)
    zp = float(rng.uniform(0.01, 2.0))
    assert theorem2_thresholds(u0, zp) == _scan(u0, zp)


def test_thresholds_edge_cases():
    u0 = np.array([0.6, 0.8])
    assert theorem2_thresholds(u0, 2.0) == (2, 1)
    assert theorem2_thresholds(np.eye(5)[2], 0.1) == (2, 4)
    with pytest.raises(ValueError):
        theorem2_thresholds(u0, 0.0)


def test_region_bound_values():
    zp = 0.6
    assert theorem2_region_bound(zp / 2, zp / 2, 37, zp) == pytest.approx(37 ** 2)
    full = theorem2_region_bound(0.4, 0.2, 50, 0.5)
    assert theorem2_region_bound(0.2, 0.1, 50, 0.5) == pytest.approx(full / 16)


def test_region_bound_on_sharp_exponential_vector():
    u0 = sharp_exponential_vector()
    n = u0.size
    zp = 0.3 * math.sqrt(2)
    rho = np.abs(u0).sum() / math.sqrt(n)
    bound = theorem2_region_bound(rho, rho, n, zp)
    assert bound == pytest.approx(16 * rho ** 4 * n ** 2 / zp ** 4)
    # simulated box on the rank-1 field built from this vector
    H = np.outer(u0, u0)
    st_ = pamcur_stage(H, n * n // 4, seed=0)
    measured = (st_.box.lR_r - st_.box.lL_r) * (st_.box.lR_c - st_.box.lL_c)
    assert bound >= measured
