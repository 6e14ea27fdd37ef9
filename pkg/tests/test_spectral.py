import math

import numpy as np
import pytest
from scipy import integrate, special

from balldisc.spectral import (BallWeights, FrequencyBudgetError, RadialWeights, SpectralWeightTable,
                               ball_fourier, ball_fourier_bound, ball_fourier_lattice, ball_volume,
                               enumerate_lattice, exp_sum, lattice_energy, lens_volume, lens_volume_radial,
                               radial_weight, radial_weight_d1_closed, remainder, tail_estimate,
                               weight_sum_ball)
from balldisc.torus import WeightedPointSet, grid_points


# ------------------------------------------------------------ ball transform

@pytest.mark.parametrize("d", [1, 2, 3])
def test_transform_at_origin_is_volume(d):
    assert ball_fourier(d, 0.2, 0.0) == pytest.approx(ball_volume(d, 0.2), rel=1e-15)


@pytest.mark.parametrize("rho", [0.5, 1.0, 3.7, 12.0])
def test_transform_by_radial_quadrature(rho):
    r = 0.3
    # d=2: int_{|y|<r} cos(2 pi rho y_1) dy = int_0^r 2 pi s J_0(2 pi rho s) ds
    d2 = integrate.quad(lambda s: 2 * np.pi * s * special.j0(2 * np.pi * rho * s), 0, r, epsabs=1e-14)[0]
    assert ball_fourier(2, r, rho) == pytest.approx(d2, abs=1e-13)
    # d=3: int_0^r 4 pi s^2 sin(2 pi rho s)/(2 pi rho s) ds
    d3 = integrate.quad(lambda s: 4 * np.pi * s * s * np.sinc(2 * rho * s), 0, r, epsabs=1e-14)[0]
    assert ball_fourier(3, r, rho) == pytest.approx(d3, abs=1e-13)
    d1 = integrate.quad(lambda s: np.cos(2 * np.pi * rho * s), -r, r, epsabs=1e-14)[0]
    assert ball_fourier(1, r, rho) == pytest.approx(d1, abs=1e-13)


def test_lattice_transform_is_radial():
    m = np.array([[3, 4], [5, 0], [0, -5]])
    v = ball_fourier_lattice(2, 0.1, m)
    assert np.allclose(v, v[0], rtol=1e-14)


@pytest.mark.parametrize("d", [1, 2, 3])
@pytest.mark.parametrize("r", [0.05, 0.2, 0.45])
def test_envelope_dominates_on_tails(d, r):
    rho = np.linspace(0.01, 300, 60001)
    vals = np.abs(ball_fourier(d, r, rho))
    # sup over |m| >= rho: reverse cumulative max
    sup = np.maximum.accumulate(vals[::-1])[::-1]
    assert np.all(sup <= ball_fourier_bound(d, r, rho) * (1 + 1e-12))


def test_input_validation():
    with pytest.raises(ValueError):
        ball_fourier(4, 0.1, 1.0)
    with pytest.raises(ValueError):
        ball_fourier(1, 0.5, 1.0)
    with pytest.raises(ValueError):
        RadialWeights(1, 0.3, 0.2)


# ------------------------------------------------------------ radial weights

@pytest.mark.parametrize("d", [1, 2, 3])
@pytest.mark.parametrize("rho", [0.0, 0.7, 1.0, 9.0, 57.3, 400.0])
def test_radial_weight_against_scipy_quad(d, rho):
    a, b = 0.1, 0.4
    ref = integrate.quad(lambda r: ball_fourier(d, r, rho) ** 2, a, b, limit=400, epsabs=1e-16, epsrel=1e-12)[0]
    assert radial_weight(d, a, b, rho) == pytest.approx(ref, rel=1e-9, abs=1e-18)


@pytest.mark.parametrize("d", [1, 2, 3])
def test_radial_weight_two_routes_agree(d):
    rho = np.concatenate([[0.0], np.geomspace(0.01, 3000, 200)])
    fast = radial_weight(d, 0.05, 0.45, rho)
    quad = radial_weight(d, 0.05, 0.45, rho, method="quadrature")
    assert np.allclose(fast, quad, rtol=1e-11, atol=1e-22)


def test_radial_weight_d1_closed_form():
    m = np.arange(1, 200)
    assert np.allclose(radial_weight(1, 0.1, 0.4, m), radial_weight_d1_closed(0.1, 0.4, m), rtol=1e-12)
    # frozen: (b - a)/(2 pi^2) - (sin(1.6 pi) - sin(0.4 pi))/(8 pi^3) at m = 1
    frozen = 0.3 / (2 * math.pi**2) - (math.sin(1.6 * math.pi) - math.sin(0.4 * math.pi)) / (8 * math.pi**3)
    assert radial_weight(1, 0.1, 0.4, 1.0) == pytest.approx(frozen, rel=1e-14)


@pytest.mark.parametrize("d", [1, 2, 3])
def test_radial_bound_dominates(d):
    w = RadialWeights(d, 0.1, 0.4)
    rho = np.linspace(0.5, 200, 4000)
    vals = w.weight(rho)
    sup = np.maximum.accumulate(vals[::-1])[::-1]
    assert np.all(sup <= w.bound(rho) * (1 + 1e-12))


# -------------------------------------------------------------- lens volumes

def test_lens_volume_closed_forms():
    r = 0.2
    assert lens_volume(1, r, 0.1) == pytest.approx(0.3)
    assert lens_volume(2, r, 0.0) == pytest.approx(np.pi * r * r)
    assert lens_volume(3, r, 0.0) == pytest.approx(4 / 3 * np.pi * r**3)
    for d in (1, 2, 3):
        assert lens_volume(d, r, 2 * r) == pytest.approx(0.0, abs=1e-15)
        assert lens_volume(d, r, 0.5) == 0.0


@pytest.mark.parametrize("d", [2, 3])
def test_lens_volume_monte_carlo(d, rng):
    r, s = 0.25, 0.18
    pts = (rng.random((400_000, d)) * 2 - 1) * r
    e = np.zeros(d)
    e[0] = s
    inside = (np.sum(pts**2, axis=1) < r * r) & (np.sum((pts - e) ** 2, axis=1) < r * r)
    est = inside.mean() * (2 * r) ** d
    err = 4 * np.sqrt(inside.mean() * (1 - inside.mean()) / len(pts)) * (2 * r) ** d
    assert abs(lens_volume(d, r, s) - est) < err


@pytest.mark.parametrize("d", [1, 2, 3])
def test_radial_lens_is_integral_of_lens(d):
    a, b = 0.1, 0.4
    for s in (0.0, 0.15, 0.3, 0.79):
        ref = integrate.quad(lambda r: float(lens_volume(d, r, s)), a, b, points=[s / 2], epsabs=1e-15)[0]
        assert float(lens_volume_radial(d, a, b, s)) == pytest.approx(ref, rel=1e-11, abs=1e-15)


@pytest.mark.parametrize("w", [BallWeights(1, 0.3), BallWeights(2, 0.2), RadialWeights(2, 0.1, 0.4),
                               BallWeights(3, 0.15), RadialWeights(3, 0.1, 0.3)])
def test_autocorrelation_is_fourier_synthesis_of_weights(w):
    # A(t) = sum_m w(m) e(m.t); the lattice sum is truncated at |m| <= M
    d = w.dim
    M = {1: 4000, 2: 160, 3: 40}[d]
    fs = enumerate_lattice(d, M)
    m = fs.frequencies.astype(float)
    wm = w.weight(np.sqrt(fs.norms_sq))
    t = np.array([[0.0] * d, [0.13] + [0.05] * (d - 1), [0.41] + [-0.2] * (d - 1)])
    synth = w.weight(0.0) + np.cos(2 * np.pi * t @ m.T) @ wm
    tail = remainder(w, M)
    assert np.all(np.abs(w.autocorrelation(t) - synth) <= tail + 1e-12)


# ------------------------------------------------------------- lattice sums

def test_enumerate_lattice_counts_and_order():
    fs = enumerate_lattice(2, 5)
    assert len(fs) == 80  # 81 points with |m|^2 <= 25, minus the origin
    assert np.all(np.diff(fs.norms_sq) >= 0)
    assert sorted(map(tuple, fs.shell(0).tolist())) == [(-1, 0), (0, -1), (0, 1), (1, 0)]
    with pytest.raises(FrequencyBudgetError):
        enumerate_lattice(3, 1000, budget=10**6)


@pytest.mark.parametrize("w", [BallWeights(1, 0.2), BallWeights(2, 0.15), RadialWeights(2, 0.1, 0.4),
                               BallWeights(3, 0.2)])
def test_parseval_closure_and_tail_estimate(w):
    M = {1: 5000, 2: 200, 3: 30}[w.dim]
    R = remainder(w, M)
    assert 0 < R < w.total()
    assert weight_sum_ball(w, M) + R == pytest.approx(w.total(), rel=1e-14)
    assert R <= tail_estimate(w, M) * 4


@pytest.mark.parametrize("d", [1, 2, 3])
def test_lattice_energy_matches_direct_sum(d, rng):
    ps = WeightedPointSet(rng.random((9, d)), rng.normal(size=9))
    w = BallWeights(d, 0.2)
    M = {1: 300, 2: 30, 3: 9}[d]
    es = lattice_energy(ps, w, M, block=64)
    fs = enumerate_lattice(d, M)
    E = exp_sum(ps, fs.frequencies)
    direct = w.weight(0.0) * abs(exp_sum(ps, np.zeros((1, d), int))[0]) ** 2 + np.sum(
        w.weight(np.sqrt(fs.norms_sq)) * np.abs(E) ** 2)
    assert es.energy == pytest.approx(direct, rel=1e-12)
    assert es.count == len(fs) + 1


def test_grid_exponential_sum_fast_path():
    g = grid_points(4, 2)
    m = np.array([[0, 0], [4, -8], [1, 0], [2, 2]])
    slow = exp_sum(WeightedPointSet(g.points), m)
    assert np.allclose(exp_sum(g, m), slow, atol=1e-14)
    assert np.allclose(exp_sum(g, m), [1, 1, 0, 0], atol=1e-14)
    w = BallWeights(2, 0.2)
    assert lattice_energy(g, w, 40).energy == pytest.approx(
        lattice_energy(WeightedPointSet(g.points), w, 40).energy, rel=1e-12)


def test_large_phase_reduction():
    # m.z with m ~ 1e7 must still produce unit-modulus, accurate phases
    ps = WeightedPointSet([[0.1234567]])
    m = np.array([10_000_001])
    ref = np.exp(2j * np.pi * ((10_000_001 * 1234567) % 10_000_000) / 10_000_000)
    assert abs(complex(exp_sum(ps, m)) - ref) < 1e-8


def test_weight_table_csv(tmp_path):
    w = BallWeights(2, 0.2)
    tab = SpectralWeightTable.build(w, 10)
    tab.to_csv(tmp_path / "w.csv")
    sq, val, flag = SpectralWeightTable.read_csv(tmp_path / "w.csv")
    assert flag[-1] == 1 and np.all(flag[:-1] == 0)
    assert val[-1] == pytest.approx(remainder(w, 10))
    assert sq[-1] == 101 and sq[0] == 0
    assert 3 not in sq  # 3 is not a sum of two squares
