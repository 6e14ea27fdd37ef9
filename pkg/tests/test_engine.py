import json
import warnings
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from balldisc.densities import constant_density, random_trig_density
from balldisc.engine import (CertificateError, DegenerateWeightsError, SignedWeightsError, avg_sq_x,
                             avg_sq_xr, counting_term, discrepancy_at, integral_term, lower_bound_scale,
                             make_kernel, montgomery_certificate, proof_bandwidth_lp, proof_bandwidth_morrey,
                             spectral_value)
from balldisc.spectral import FrequencyBudgetError, enumerate_lattice
from balldisc.torus import BallWindow, WeightedPointSet, grid_points


def _cloud(rng, N, d, signed=False):
    w = rng.normal(size=N) if signed else rng.random(N) + 0.5
    return WeightedPointSet(rng.random((N, d)) - 0.5, w)


# ------------------------------------------------------------ pointwise D_N

def test_integral_term_against_quadrature(rng):
    f = random_trig_density(1, 5, rng)
    ball = BallWindow(1, 0.17, (0.05,))
    for x in (-0.4, 0.0, 0.31):
        lo = -x + 0.05 - 0.17
        ref = integrate.quad(lambda t: float(f(t)), lo, lo + 0.34, epsabs=1e-14)[0]
        assert integral_term(f, ball, x) == pytest.approx(ref, abs=1e-13)


def test_integral_term_d2_against_quadrature(rng):
    f = random_trig_density(2, 2, rng)
    ball = BallWindow(2, 0.2)
    x = np.array([0.1, -0.3])
    ref = integrate.dblquad(lambda v, u: float(f(np.array([u - x[0], v - x[1]]))), -0.2, 0.2,
                            lambda u: -math.sqrt(0.04 - u * u), lambda u: math.sqrt(0.04 - u * u),
                            epsabs=1e-12)[0]
    assert integral_term(f, ball, x) == pytest.approx(ref, abs=1e-10)


def test_counting_term_by_hand():
    ps = WeightedPointSet([[0.0], [0.3], [-0.45]], [1.0, 2.0, 3.0])
    ball = BallWindow(1, 0.1)
    # x = 0.4: shifted points 0.4, 0.7 -> -0.3, -0.05 -> only the third is inside
    assert counting_term(ps, ball, 0.4) == pytest.approx(3.0 / 3)
    assert counting_term(ps, ball, 0.0) == pytest.approx(1.0 / 3)


def test_single_point_closed_form():
    ps = WeightedPointSet([[0.123]])
    one = constant_density(1.0, 1)
    r = 0.2
    exact = 2 * r * (1 - 2 * r)
    for method in ("spectral", "pair", "direct"):
        rep = avg_sq_x(ps, one, r, tolerance=1e-7, method=method)
        lo, hi = rep.interval
        assert lo - 1e-12 <= exact <= hi + 1e-12, method


def test_grid_has_zero_discrepancy_at_commensurate_radius():
    rep = avg_sq_x(grid_points(8, 1), constant_density(1.0, 1), 0.25, method="pair")
    assert rep.value == pytest.approx(0.0, abs=1e-15)
    x = np.linspace(-0.5, 0.5, 101) + 1e-3
    assert np.allclose(discrepancy_at(grid_points(8, 1), constant_density(1.0, 1), 0.25, x), 0, atol=1e-14)


def test_discrepancy_at_validation(rng):
    ps = _cloud(rng, 4, 2)
    with pytest.raises(ValueError):
        discrepancy_at(ps, constant_density(1.0, 1), 0.1, [0.0])
    from balldisc.densities import single_mode
    with pytest.raises(ValueError):
        discrepancy_at(ps, single_mode([1, 0]), 0.1, [0.0, 0.0])


# --------------------------------------------------------------- L2 averages

@pytest.mark.parametrize("d", [1, 2])
def test_three_methods_agree(d, rng):
    ps = _cloud(rng, 12, d)
    f = random_trig_density(d, 2, rng)
    r = 0.18
    pair = avg_sq_x(ps, f, r, method="pair").value
    spec = avg_sq_x(ps, f, r, tolerance=1e-7 if d == 1 else 1e-4, method="spectral")
    direct = avg_sq_x(ps, f, r, method="direct", nodes=8192 if d == 1 else 16384).value
    assert spec.value <= pair + 1e-12 and pair <= spec.value + spec.tail_bound + 1e-12
    # d=2 quadrature is second order across chord crossings
    assert direct == pytest.approx(pair, rel=1e-9 if d == 1 else 1e-5)


def test_spectral_and_pair_agree_in_d3(rng):
    ps = _cloud(rng, 10, 3)
    f = random_trig_density(3, 1, rng)
    pair = avg_sq_x(ps, f, 0.2, method="pair").value
    spec = avg_sq_x(ps, f, 0.2, tolerance=1e-3)
    assert spec.value <= pair + 1e-12 <= spec.value + spec.tail_bound + 2e-12


def test_signed_weights_and_grid_fast_path(rng):
    ps = _cloud(rng, 9, 2, signed=True)
    f = constant_density(0.0, 2)
    a = avg_sq_xr(ps, f, 0.1, 0.3, method="pair").value
    b = avg_sq_xr(ps, f, 0.1, 0.3, tolerance=1e-4)
    assert b.value <= a + 1e-12 <= b.value + b.tail_bound + 2e-12
    g = grid_points(5, 2)
    one = constant_density(1.0, 2)
    fast = avg_sq_x(g, one, 0.21, method="pair").value
    slow = avg_sq_x(WeightedPointSet(g.points), one, 0.21, method="pair").value
    assert fast == pytest.approx(slow, rel=1e-12)


@pytest.mark.parametrize("d, rel", [(1, 1e-10), (2, 1e-6)])
def test_radius_average_is_integral_of_fixed_radius(d, rel, rng):
    # d=1: piecewise polynomial in r between breakpoints, quad is near exact;
    # d=2: (r - s/2)^(3/2) cusps at tangencies limit quad itself
    ps = _cloud(rng, 6, d)
    f = random_trig_density(d, 1, rng)
    a, b = 0.1, 0.3
    # kinks sit at half the distance to every periodic image, not only the nearest
    shifts = np.stack(np.meshgrid(*([[-1, 0, 1]] * d), indexing="ij"), -1).reshape(-1, d)
    breaks = sorted({float(np.linalg.norm(p - q + k)) / 2 for p in ps.points for q in ps.points
                     for k in shifts})
    breaks = [t for t in breaks if a < t < b]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        ref = integrate.quad(lambda r: avg_sq_x(ps, f, r, method="pair").value, a, b,
                             points=breaks or None, limit=400, epsabs=1e-13)[0]
    assert avg_sq_xr(ps, f, a, b, method="pair").value == pytest.approx(ref, rel=rel)


def test_spectral_value_on_explicit_frequencies(rng):
    ps = _cloud(rng, 7, 1)
    f = random_trig_density(1, 2, rng)
    fs = enumerate_lattice(1, 20000)
    m = np.concatenate([[[0]], fs.frequencies])
    part = spectral_value(ps, f, BallWindow(1, 0.2), m)
    exact = avg_sq_x(ps, f, 0.2, method="pair").value
    assert part <= exact + 1e-12 and part == pytest.approx(exact, abs=1e-4)


def test_budget_error_and_report_json(rng):
    ps = _cloud(rng, 5, 3)
    with pytest.raises(FrequencyBudgetError):
        avg_sq_x(ps, constant_density(1.0, 3), 0.2, tolerance=1e-14, budget=10**5)
    rep = avg_sq_x(_cloud(rng, 5, 1), constant_density(1.0, 1), 0.2, tolerance=1e-6)
    row = json.loads(rep.to_json())
    assert row["method"] == "spectral" and row["config_hash"] == rep.config_hash()
    assert row["tail_bound"] <= 1e-6 and row["value"] == rep.value
    assert rep.interval == (rep.value, rep.value + rep.tail_bound)


@settings(max_examples=200, deadline=None)
@given(st.complex_numbers(max_magnitude=1e6, allow_nan=False, allow_infinity=False),
       st.complex_numbers(max_magnitude=1e6, allow_nan=False, allow_infinity=False))
def test_elementary_splitting_inequality(a, b):
    assert abs(a - b) ** 2 >= 0.5 * abs(a) ** 2 - abs(b) ** 2 - 1e-9 * (abs(a) ** 2 + abs(b) ** 2)


# ------------------------------------------------------------------- kernels

@pytest.mark.parametrize("d", [1, 2])
def test_fejer_closed_form_matches_cosine_sum(d, rng):
    K = make_kernel("fejer_tensor", 6, d)
    x = rng.random((40, d)) - 0.5
    x[0] = 0
    direct = np.cos(2 * np.pi * x @ K.modes.T.astype(float)) @ K.profile
    assert np.allclose(K(x), direct, atol=4e-14)
    assert K.K0 == pytest.approx(6.0**d) and K.k0 == pytest.approx(1.0)
    assert K(np.zeros(d)) == pytest.approx(K.K0)


@pytest.mark.parametrize("d", [1, 2, 3])
def test_smooth_bump_kernel(d, rng):
    K = make_kernel("smooth_bump", 6, d, order=2)
    x = rng.random((40, d)) - 0.5
    vals = K(x)
    direct = np.cos(2 * np.pi * x @ K.modes.T.astype(float)) @ K.profile
    assert np.all(vals >= 0)
    assert np.allclose(vals, direct, atol=1e-12)
    assert K.fourier(np.zeros(d, int)) == pytest.approx(1.0)
    assert np.all((K.profile > 0) & (K.profile <= 1))
    assert K(np.zeros(d)) == pytest.approx(K.K0)
    assert K.decay == 4 + d + 1
    with pytest.raises(ValueError):
        make_kernel("gauss", 4, d)


@pytest.mark.parametrize("family", ["fejer_tensor", "smooth_bump"])
@pytest.mark.parametrize("d", [1, 2])
def test_certificate_holds_and_forms_agree(family, d, rng):
    ps = _cloud(rng, 40, d)
    res = montgomery_certificate(ps, make_kernel(family, 8, d))
    assert res.agree and res.holds and res.rel_diff < 1e-9
    assert res.pair >= res.bound


def test_certificate_refusals(rng):
    K = make_kernel("fejer_tensor", 4, 1)
    with pytest.raises(SignedWeightsError):
        montgomery_certificate(_cloud(rng, 5, 1, signed=True), K)
    with pytest.raises(DegenerateWeightsError):
        montgomery_certificate(WeightedPointSet(rng.random((5, 1)), np.zeros(5)), K)
    with pytest.raises(ValueError):
        montgomery_certificate(_cloud(rng, 5, 2), K)
    assert issubclass(CertificateError, AssertionError)


# -------------------------------------------------------------- normalization

def test_lower_bound_scale_exponents():
    p, d = 1.5, 2
    q = p / (p - 1)
    base = lower_bound_scale(d, 100, 1.0, 1.0, p=p)
    assert lower_bound_scale(d, 200, 1.0, 1.0, p=p) / base == pytest.approx(2 ** (-1 - q / (2 * d)))
    assert lower_bound_scale(d, 100, 2.0, 1.0, p=p) / base == pytest.approx(2 ** (2 + q / d))
    assert lower_bound_scale(d, 100, 1.0, 2.0, p=p) / base == pytest.approx(2 ** (-q / d))
    m = lower_bound_scale(1, 100, 1.0, 1.0, lam=0.5)
    assert m == pytest.approx(100.0**-3)
    for kw in ({}, {"p": 1.0}, {"p": 2.5}, {"lam": 1.5}, {"p": 2, "lam": 1}):
        with pytest.raises(ValueError):
            lower_bound_scale(1, 10, 1.0, 1.0, **kw)


def test_proof_bandwidths():
    assert proof_bandwidth_lp(16, 1, 2.0, 1.0, 1.0) == pytest.approx(64.0)
    assert proof_bandwidth_morrey(8, 1.0, 1.0, 1.0) == pytest.approx(16.0)


# ------------------------------------------------------------ worked examples

def test_pointwise_examples():
    ps = WeightedPointSet([[0.0]])
    one = constant_density(1.0, 1)
    assert discrepancy_at(ps, one, 0.25, 0.0) == pytest.approx(0.5)
    assert discrepancy_at(ps, one, 0.25, 0.4) == pytest.approx(-0.5)


def test_grid_discrepancy_has_zero_mean(rng):
    x = rng.random((1000, 2)) - 0.5
    D = discrepancy_at(grid_points(6, 2), constant_density(1.0, 2), 0.17, x)
    assert abs(D.mean()) < 4 * D.std() / math.sqrt(len(D))


def test_opposite_weights_isolate_one_frequency():
    from balldisc.densities import single_mode
    from balldisc.spectral import radial_weight

    ps = WeightedPointSet([[0.0], [0.0]], [1.0, -1.0])
    for k in (1, 5, 12):
        # E vanishes identically, so only m = -k contributes |f_hat(k)|^2 w(k)
        f = single_mode([k])
        rep = avg_sq_xr(ps, f, 0.1, 0.4, method="pair")
        assert rep.value == pytest.approx(radial_weight(1, 0.1, 0.4, k), rel=1e-12)


def test_fejer_profile_and_small_certificates():
    K = make_kernel("fejer_tensor", 4, 1)
    assert K.fourier(np.array([[2], [4], [0]])).tolist() == [0.5, 0.0, 1.0]
    one = montgomery_certificate(WeightedPointSet([[0.0]]), K)
    assert one.pair == pytest.approx(4.0) and one.bound == pytest.approx(4.0)
    g = montgomery_certificate(grid_points(8, 2), make_kernel("fejer_tensor", 5, 2))
    assert g.spectral == pytest.approx(1.0) and g.bound == pytest.approx(25 / 64)


def test_smooth_bump_sampled_minimum(rng):
    K = make_kernel("smooth_bump", 8, 2)
    assert K(rng.random((10_000, 2)) - 0.5).min() >= -1e-10
