import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from balldisc.densities import (BumpProfile, DensityField, certified_nonneg, constant_density, dvp_density,
                                holder_constant, holder_density, imbedding_constant, lp_norm, morrey_estimate,
                                morrey_norm, periodized_bump, random_trig_density, scale_density, single_mode,
                                trig_density)


def test_evaluation_matches_direct_sum(rng):
    f = random_trig_density(2, 3, rng)
    x = rng.random((50, 2)) - 0.5
    direct = np.array([sum(c * np.exp(2j * np.pi * m @ p) for m, c in zip(f.modes, f.coeffs)) for p in x])
    assert np.max(np.abs(direct.imag)) < 1e-12
    assert np.allclose(f(x), direct.real, atol=1e-12)


def test_grid_values_match_pointwise(rng):
    f = random_trig_density(1, 7, rng)
    G = 32
    assert np.allclose(f.grid_values(G), f(np.arange(G) / G), atol=1e-12)
    with pytest.raises(ValueError):
        f.grid_values(14)


def test_realness_and_validation():
    assert constant_density(2.0, 3).real
    assert not single_mode([1]).real
    with pytest.raises(ValueError):
        trig_density([[1], [1]], [1.0, 2.0])
    with pytest.raises(ValueError):
        DensityField(1, [[1]], [1.0], real=True)
    f = trig_density([[0], [2], [-2]], [1.0, 0.5, 0.5])
    assert f.real and f.mean == 1.0
    assert f.coeff_at(np.array([[2], [3], [-2]])).tolist() == [0.5, 0, 0.5]


def test_csv_roundtrip(tmp_path, rng):
    f = random_trig_density(2, 2, rng)
    f.to_csv(tmp_path / "f.csv")
    g = DensityField.from_csv(tmp_path / "f.csv")
    assert g.dim == 2 and g.real and g.recipe == "custom"
    assert np.array_equal(g.modes, f.modes) and np.array_equal(g.coeffs, f.coeffs)


# ---------------------------------------------------------------------- norms

def test_lp_norms_against_closed_forms():
    f = trig_density([[0], [1], [-1]], [1.0, 0.5, 0.5])  # 1 + cos(2 pi x) >= 0
    assert lp_norm(f, 2) == pytest.approx(math.sqrt(1.5), rel=1e-15)
    assert lp_norm(f, 1) == pytest.approx(1.0, rel=1e-12)
    assert lp_norm(f, math.inf) == pytest.approx(2.0, rel=1e-12)
    ref = integrate.quad(lambda x: (1 + math.cos(2 * math.pi * x)) ** 1.5, 0, 1, epsabs=1e-14)[0] ** (1 / 1.5)
    val, err = lp_norm(f, 1.5, return_error=True)
    assert val == pytest.approx(ref, rel=1e-6) and err < 1e-6


def test_lp_norm_of_sign_changing_function():
    f = trig_density([[1], [-1]], [0.5, 0.5])  # cos(2 pi x)
    assert lp_norm(f, 1) == pytest.approx(2 / math.pi, rel=1e-6)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_lp_norms_ordered(seed):
    f = random_trig_density(1, 4, np.random.default_rng(seed), positive=False)
    n1, n15, n2 = lp_norm(f, 1), lp_norm(f, 1.5), lp_norm(f, 2)
    assert n1 <= n15 * (1 + 1e-6) and n15 <= n2 * (1 + 1e-6)


# ----------------------------------------------------------------- builders

def test_bump_plateau_and_support():
    prof = BumpProfile()
    xi = np.linspace(0, 2.5, 2501)
    v = prof(xi)
    assert np.all(v[xi <= 1] == 1) and np.all(v[xi >= 2] == 0)
    assert np.all(np.diff(v) <= 0)
    for kind in ("cubic", "smooth"):
        assert BumpProfile(kind)(1.5) == pytest.approx(0.5)
    F = periodized_bump(4, 2)
    inner = np.sum(F.modes**2, axis=1) <= 16
    assert np.all(F.coeffs[inner] == 1)
    assert np.all(np.sum(F.modes**2, axis=1) < 64)


def test_scale_density_dilates(rng):
    F = random_trig_density(2, 2, rng)
    f = scale_density(F, 3)
    x = rng.random((20, 2))
    assert np.allclose(f(x), F(3 * x), atol=1e-12)
    assert f.l2_sq() == pytest.approx(F.l2_sq())
    with pytest.raises(ValueError):
        scale_density(F, 1.5)


@pytest.mark.parametrize("d", [1, 2])
def test_dvp_plateau(d):
    f = dvp_density(3, d)
    box = np.all(np.abs(f.modes) <= 3, axis=1)
    assert np.allclose(f.coeffs[box], 1) and np.all(f.coeffs.real[~box] < 1)
    assert np.max(np.abs(f.modes)) == 5
    # tensor dvp equals 2 F_{2n-1} - F_{n-1} per axis, at x = 0 that is 2(2n) - n = 3n
    assert f(np.zeros(d)) == pytest.approx((3 * 3) ** d)


@pytest.mark.parametrize("beta", [0.25, 0.5, 1.0])
def test_holder_constant_is_valid(beta, rng):
    f = holder_density(beta, 1, octaves=(2, 8))
    C = f.params["holder_constant"]
    x, y = rng.random(4000) - 0.5, rng.random(4000) - 0.5
    dist = np.abs((x - y + 0.5) % 1 - 0.5)
    assert np.all(np.abs(f(x) - f(y)) <= C * dist**beta * (1 + 1e-12))
    assert holder_constant(f, beta) == C


@pytest.mark.parametrize("beta", [0.25, 1.0])
@pytest.mark.parametrize("d", [1, 2])
def test_lacunary_holder_is_nonnegative_with_tight_lift(beta, d):
    f = holder_density(beta, d)
    assert certified_nonneg(f)
    g = holder_density(beta, 1)
    low = d * g.grid_values(1 << 16).min()  # f(x, y) = g(x) + g(y)
    assert f.mean == pytest.approx(d * g.mean)
    assert low >= 0
    # lift exceeds the true minimum only by the curvature margin
    assert low < 1e-2 * f.mean


def test_cusp_coefficients_against_quadrature():
    f = holder_density(0.5, 1, shape="cusp", bandwidth=64)
    for m in (0, 1, 5, 17):
        ref = integrate.quad(lambda x: abs(math.sin(math.pi * x)) ** 0.5 * math.cos(2 * math.pi * m * x),
                             0, 1, limit=400, epsabs=1e-13)[0]
        assert f.coeff_at(np.array([m])).real == pytest.approx(ref, abs=1e-10)


def test_random_positive_density_is_nonnegative(rng):
    f = random_trig_density(2, 3, rng)
    assert certified_nonneg(f)
    assert f.grid_values(64).min() >= -1e-12
    assert not certified_nonneg(trig_density([[1], [-1]], [0.5, 0.5]))


# ------------------------------------------------------------------- Morrey

def test_morrey_of_constant():
    one = constant_density(1.0, 1)
    r_max = 0.5 * (1 - 2.0**-24)
    assert morrey_norm(one, 1.0) == pytest.approx(2.0, rel=1e-12)
    assert morrey_norm(one, 0.5) == pytest.approx(2 * math.sqrt(r_max), rel=1e-12)
    assert morrey_norm(constant_density(1.0, 2), 2.0) == pytest.approx(math.pi, rel=1e-12)


def test_morrey_of_spike_grows_as_lambda_rises():
    f = dvp_density(16, 1)
    est = morrey_estimate(f, 1.0)
    assert abs(est.center[0]) < 1e-12 or abs(est.center[0] - 1) < 1e-12
    assert morrey_norm(f, 0.5) < morrey_norm(f, 1.0)


def test_morrey_sampled_route_for_signed_f():
    f = trig_density([[1], [-1]], [0.5, 0.5])
    est = morrey_estimate(f, 1.0)
    assert not est.exact_ball_integrals
    # |cos| over the ball of radius r about 0, divided by r, peaks at r -> 0 with value 2
    assert est.value == pytest.approx(2.0, rel=1e-3)
    with pytest.raises(ValueError):
        morrey_estimate(f, 1.5)


@pytest.mark.parametrize("d", [1, 2])
def test_imbedding_inequality(d, rng):
    for _ in range(5):
        f = random_trig_density(d, 4, rng)
        assert morrey_norm(f, d / 2) <= imbedding_constant(d) * lp_norm(f, 2) * (1 + 1e-12)
