"""Fourier side of the ball discrepancy.

Ball transforms, their squared moduli averaged over a radius range, lattice
enumeration, exponential sums, and the weighted lattice energies

    sum_{|m| <= M} w(m) |E(m)|^2,   E(m) = N^-1 sum_j alpha_j exp(2 pi i m.z_j),

that turn L2 discrepancies into lattice sums.  Two weight families share one
interface: :class:`BallWeights` (w = |chi_hat_{B_r}|^2) and
:class:`RadialWeights` (w = int_a^b |chi_hat_{B_r}|^2 dr).

Besides the truncated sums, each family knows its autocorrelation
A(t) = sum_m w(m) exp(2 pi i m.t) in closed form (the volume of B_r meeting its
translate, periodized).  That gives exact totals and exact remainders.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .bessel import SQRT_X_J1_BOUND, j1, j1_over_x, sphere_kernel3
from .torus import UNIT_BALL_VOLUME, _check_dim, wrap


class FrequencyBudgetError(RuntimeError):
    """Requested cutoff would enumerate more frequencies than allowed."""


DEFAULT_BUDGET = {1: 200_000_000, 2: 40_000_000, 3: 40_000_000}

_GL_CACHE = {}


def gauss_legendre(n):
    if n not in _GL_CACHE:
        _GL_CACHE[n] = np.polynomial.legendre.leggauss(n)
    return _GL_CACHE[n]


def _check_radius(r):
    if not 0.0 < r < 0.5:
        raise ValueError(f"radius must lie in (0, 1/2), got {r}")


def _check_interval(a, b):
    if not 0.0 < a < b < 0.5:
        raise ValueError(f"need 0 < a < b < 1/2, got a={a}, b={b}")


def ball_volume(d, r):
    return UNIT_BALL_VOLUME[d] * r**d


def ball_fourier(d, r, rho):
    """chi_hat_{B_r} as a function of rho = |m| (radial, real, even).

    d=1: sin(2 pi r rho)/(pi rho); d=2: r J_1(2 pi r rho)/rho;
    d=3: (sin t - t cos t)/(2 pi^2 rho^3) with t = 2 pi r rho.
    The value at rho=0 is the volume of the ball.
    """
    _check_dim(d)
    _check_radius(r)
    rho = np.abs(np.asarray(rho, dtype=float))
    if d == 1:
        out = 2.0 * r * np.sinc(2.0 * r * rho)
    elif d == 2:
        out = 2.0 * np.pi * r * r * j1_over_x(2.0 * np.pi * r * rho)
    else:
        out = 4.0 * np.pi * r**3 * sphere_kernel3(2.0 * np.pi * r * rho)
    return out if np.ndim(out) else float(out)


def ball_fourier_lattice(d, r, m):
    """chi_hat_{B_r}(m) for lattice vectors m of shape (..., d)."""
    m = np.asarray(m, dtype=float)
    if d == 1 and (m.ndim == 0 or m.shape[-1] != 1):
        m = m[..., None]
    if m.shape[-1] != d:
        raise ValueError("last axis of m must have length d")
    return ball_fourier(d, r, np.sqrt(np.sum(m * m, axis=-1)))


def ball_fourier_bound(d, r, rho):
    """Upper bound for |chi_hat_{B_r}(m)| valid for every |m| >= rho.

    Decreasing in rho.  d=2 uses sqrt(x)|J_1(x)| <= SQRT_X_J1_BOUND.
    """
    rho = np.asarray(rho, dtype=float)
    vol = ball_volume(d, r)
    with np.errstate(divide="ignore"):
        if d == 1:
            env = 1.0 / (np.pi * rho)
        elif d == 2:
            env = SQRT_X_J1_BOUND * np.sqrt(r / (2.0 * np.pi)) * rho**-1.5
        else:
            env = (1.0 + 2.0 * np.pi * r * rho) / (2.0 * np.pi**2 * rho**3)
    return np.minimum(env, vol)


# ---------------------------------------------------------------- radial weights
#
# With x = 2 pi r rho,
#   int_a^b |chi_hat_{B_r}(rho)|^2 dr = rho^-d (2 pi rho)^-(d+1) [G_d(2 pi b rho) - G_d(2 pi a rho)],
#   G_d(X) = int_0^X x^d J_{d/2}(x)^2 dx.

def _g1(X):
    X = np.asarray(X, dtype=float)
    y = 2.0 * X
    out = (X - 0.5 * np.sin(y)) / np.pi
    small = y < 1.0
    if np.any(small):
        ys = y[small]
        acc = np.zeros_like(ys)
        for n in range(12, 0, -1):
            acc = acc * ys * ys + (-1) ** (n + 1) / math.factorial(2 * n + 1)
        out[small] = 0.5 * acc * ys**3 / np.pi
    return out


def _g3_integrand(x):
    return (x**3 * sphere_kernel3(x)) ** 2


def _g3(X):
    X = np.asarray(X, dtype=float)
    s2, c2 = np.sin(2 * X), np.cos(2 * X)
    F = X**3 / 6 + X / 2 + 0.75 * X * c2 + s2 * (X * X / 4 - 0.625)
    out = 2.0 / np.pi * F
    small = X < 2.0
    if np.any(small):
        xs = X[small]
        t, w = gauss_legendre(32)
        nodes = 0.5 * xs[:, None] * (t + 1.0)
        out[small] = 2.0 / np.pi * 0.5 * xs * (_g3_integrand(nodes) @ w)
    return out


class _G2Table:
    """Cumulative int_0^n x^2 J_1(x)^2 dx on unit panels, grown on demand."""

    nodes = 16

    def __init__(self):
        self.cum = np.zeros(1)

    def _panel(self, lo, hi):
        t, w = gauss_legendre(self.nodes)
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        half = 0.5 * (hi - lo)
        x = lo[:, None] + half[:, None] * (t + 1.0)
        return half * ((x * j1(x)) ** 2 @ w)

    def ensure(self, n):
        have = len(self.cum) - 1
        if n <= have:
            return
        n = max(n, 2 * have, 1024)
        lo = np.arange(have, n, dtype=float)
        panels = self._panel(lo, lo + 1.0)
        self.cum = np.concatenate([self.cum, self.cum[-1] + np.cumsum(panels)])

    def __call__(self, X):
        X = np.asarray(X, dtype=float)
        flat = X.ravel()
        base = np.floor(flat).astype(np.int64)
        self.ensure(int(base.max()) + 1 if flat.size else 1)
        out = self.cum[base] + self._panel(base.astype(float), flat)
        return out.reshape(X.shape)


_G2 = _G2Table()


def radial_antiderivative(d, X):
    """G_d(X) = int_0^X x^d J_{d/2}(x)^2 dx."""
    if d == 1:
        return _g1(X)
    if d == 2:
        return _G2(X)
    return _g3(X)


def _radial_weight_exact(d, a, b, rho):
    rho = np.abs(np.asarray(rho, dtype=float))
    out = np.empty_like(rho)
    zero = rho == 0
    vd = UNIT_BALL_VOLUME[d]
    out[zero] = vd * vd * (b ** (2 * d + 1) - a ** (2 * d + 1)) / (2 * d + 1)
    rz = rho[~zero]
    if rz.size:
        k = 2.0 * np.pi * rz
        diff = radial_antiderivative(d, k * b) - radial_antiderivative(d, k * a)
        out[~zero] = diff / (rz**d * k ** (d + 1))
    return out


def _ball_fourier_rvec(d, r, rho):
    t = 2.0 * np.pi * r * rho
    if d == 1:
        return 2.0 * r * np.sinc(2.0 * r * rho)
    if d == 2:
        return 2.0 * np.pi * r * r * j1_over_x(t)
    return 4.0 * np.pi * r**3 * sphere_kernel3(t)


def _radial_weight_quadrature(d, a, b, rho, nodes=64):
    """Composite Gauss-Legendre in r, 64 nodes per panel.

    One panel covers at most two periods of |chi_hat|^2 in r, so the rule
    stays converged as |m| grows.
    """
    t, w = gauss_legendre(nodes)
    rho = np.abs(np.atleast_1d(np.asarray(rho, dtype=float)))
    out = np.empty_like(rho)
    for i, q in enumerate(rho):
        panels = 1 + int(math.ceil(q * (b - a)))
        edges = np.linspace(a, b, panels + 1)
        half = 0.5 * np.diff(edges)
        rr = (edges[:-1, None] + half[:, None] * (t + 1.0)).ravel()
        vals = _ball_fourier_rvec(d, rr, q) ** 2
        out[i] = float(np.sum((vals.reshape(panels, nodes) @ w) * half))
    return out


def radial_weight(d, a, b, rho, method="antiderivative"):
    """w(m) = int_a^b |chi_hat_{B_r}(m)|^2 dr as a function of rho = |m|.

    ``method="antiderivative"`` uses the reduction to G_d (closed forms for
    d=1,3, a cumulative table for d=2).  ``method="quadrature"`` integrates in
    r directly and serves as the independent cross-check.
    """
    _check_dim(d)
    _check_interval(a, b)
    scalar = np.ndim(rho) == 0
    if method == "antiderivative":
        out = _radial_weight_exact(d, a, b, np.atleast_1d(rho))
    elif method == "quadrature":
        out = _radial_weight_quadrature(d, a, b, rho)
    else:
        raise ValueError(f"unknown method {method!r}")
    return float(out[0]) if scalar else out


def radial_weight_d1_closed(a, b, m):
    """Elementary closed form for d=1; the oracle for the other two routes."""
    m = np.abs(np.asarray(m, dtype=float))

    def prim(r):
        return r / 2.0 - np.sin(4.0 * np.pi * r * m) / (8.0 * np.pi * m)

    return (prim(b) - prim(a)) / (np.pi**2 * m**2)


# ------------------------------------------------------------ autocorrelation

def lens_volume(d, r, s):
    """|B_r intersect (B_r + s e)| in R^d for centre distance s >= 0."""
    s = np.asarray(s, dtype=float)
    inside = s < 2.0 * r
    sc = np.where(inside, s, 2.0 * r)
    if d == 1:
        v = 2.0 * r - sc
    elif d == 2:
        q = np.clip(sc / (2.0 * r), -1.0, 1.0)
        v = 2.0 * r * r * np.arccos(q) - 0.5 * sc * np.sqrt(np.maximum(4.0 * r * r - sc * sc, 0.0))
    else:
        v = np.pi * (4.0 * r + sc) * (2.0 * r - sc) ** 2 / 12.0
    return np.where(inside, v, 0.0)


def _lens_radial_primitive2(r, c):
    """Antiderivative in r of the d=2 lens volume at centre distance 2c."""
    u = np.sqrt(np.maximum(r * r - c * c, 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        q = np.where(r > 0, np.clip(c / np.where(r > 0, r, 1.0), 0.0, 1.0), 0.0)
        log_term = np.where(c > 0, c**3 * np.log(np.maximum(r + u, 1e-300)), 0.0)
    return (2.0 / 3.0) * r**3 * np.arccos(q) - (4.0 / 3.0) * c * r * u + (2.0 / 3.0) * log_term


def lens_volume_radial(d, a, b, s):
    """int_a^b |B_r intersect (B_r + s e)| dr, in closed form."""
    s = np.asarray(s, dtype=float)
    lo = np.maximum(a, 0.5 * s)
    active = lo < b
    lo = np.where(active, lo, b)
    if d == 1:
        out = (b * b - s * b) - (lo * lo - s * lo)
    elif d == 2:
        c = 0.5 * s
        out = _lens_radial_primitive2(b, c) - _lens_radial_primitive2(lo, c)
    else:
        def prim(r):
            return np.pi * (4 * r**4 - 4 * r**3 * s + s**3 * r) / 12.0
        out = prim(b) - prim(lo)
    return np.where(active, out, 0.0)


_IMAGES = {d: np.array(np.meshgrid(*([[-1, 0, 1]] * d), indexing="ij")).reshape(d, -1).T.astype(float)
           for d in (1, 2, 3)}


def periodize(d, kernel, t):
    """sum over images k in {-1,0,1}^d of kernel(|wrap(t) + k|).

    Enough images because the kernels vanish beyond distance 2r < 1.
    """
    t = wrap(np.asarray(t, dtype=float))
    if d == 1 and (t.ndim == 0 or t.shape[-1] != 1):
        t = t[..., None]
    acc = 0.0
    for k in _IMAGES[d]:
        u = t + k
        acc = acc + kernel(np.sqrt(np.sum(u * u, axis=-1)))
    return acc


# ---------------------------------------------------------------- weight families

@dataclass(frozen=True)
class BallWeights:
    """w(m) = |chi_hat_{B_r}(m)|^2."""

    dim: int
    radius: float
    mode: str = field(default="fixed", init=False)

    def __post_init__(self):
        _check_dim(self.dim)
        _check_radius(self.radius)

    def weight(self, rho):
        return ball_fourier(self.dim, self.radius, rho) ** 2

    def total(self):
        """sum over all of Z^d of w(m), i.e. |B_r| by Parseval."""
        return ball_volume(self.dim, self.radius)

    def bound(self, rho):
        """sup_{|m| >= rho} w(m)."""
        return ball_fourier_bound(self.dim, self.radius, rho) ** 2

    def autocorrelation(self, t):
        return periodize(self.dim, lambda s: lens_volume(self.dim, self.radius, s), t)

    def describe(self):
        return {"mode": "fixed", "d": self.dim, "r": self.radius}


@dataclass(frozen=True)
class RadialWeights:
    """w(m) = int_a^b |chi_hat_{B_r}(m)|^2 dr."""

    dim: int
    a: float
    b: float
    mode: str = field(default="radial", init=False)

    def __post_init__(self):
        _check_dim(self.dim)
        _check_interval(self.a, self.b)

    def weight(self, rho):
        return radial_weight(self.dim, self.a, self.b, rho)

    def total(self):
        d = self.dim
        return UNIT_BALL_VOLUME[d] * (self.b ** (d + 1) - self.a ** (d + 1)) / (d + 1)

    def bound(self, rho):
        d, a, b = self.dim, self.a, self.b
        rho = np.asarray(rho, dtype=float)
        with np.errstate(divide="ignore"):
            if d == 1:
                env = (b - a) / (np.pi**2 * rho**2)
            elif d == 2:
                env = SQRT_X_J1_BOUND**2 * (b * b - a * a) / (4.0 * np.pi * rho**3)
            else:
                k = 2.0 * np.pi * rho
                env = ((1 + k * b) ** 3 - (1 + k * a) ** 3) / (3.0 * k) / (4.0 * np.pi**4 * rho**6)
        cap = UNIT_BALL_VOLUME[d] ** 2 * (b ** (2 * d + 1) - a ** (2 * d + 1)) / (2 * d + 1)
        return np.minimum(env, cap)

    def autocorrelation(self, t):
        return periodize(self.dim, lambda s: lens_volume_radial(self.dim, self.a, self.b, s), t)

    def describe(self):
        return {"mode": "radial", "d": self.dim, "a": self.a, "b": self.b}


def as_weights(window):
    """Accept BallWeights/RadialWeights or a torus.BallWindow."""
    if isinstance(window, (BallWeights, RadialWeights)):
        return window
    if hasattr(window, "radius") and hasattr(window, "dim"):
        return BallWeights(window.dim, window.radius)
    raise TypeError(f"cannot interpret {window!r} as a spectral weight family")


# ------------------------------------------------------------ lattice enumeration

@dataclass(frozen=True)
class FrequencySet:
    """All m in Z^d with 0 < |m| <= cutoff, sorted by |m|^2 and grouped in shells."""

    dim: int
    cutoff: float
    frequencies: np.ndarray
    shell_sq: np.ndarray
    shell_start: np.ndarray

    def __len__(self):
        return len(self.frequencies)

    def shell(self, i):
        return self.frequencies[self.shell_start[i]:self.shell_start[i + 1]]

    @property
    def norms_sq(self):
        return np.sum(self.frequencies * self.frequencies, axis=1)


def lattice_count_estimate(d, M):
    return UNIT_BALL_VOLUME[d] * (M + 0.5 * math.sqrt(d)) ** d


def enumerate_lattice(d, M_max, budget=None):
    _check_dim(d)
    if M_max < 1:
        raise ValueError("M_max must be >= 1")
    budget = DEFAULT_BUDGET[d] if budget is None else budget
    if lattice_count_estimate(d, M_max) > budget:
        raise FrequencyBudgetError(
            f"cutoff {M_max} in d={d} needs ~{lattice_count_estimate(d, M_max):.3g} frequencies, "
            f"budget {budget}")
    Mi = int(math.floor(M_max))
    axis = np.arange(-Mi, Mi + 1)
    mesh = np.meshgrid(*([axis] * d), indexing="ij")
    m = np.stack([g.ravel() for g in mesh], axis=-1)
    sq = np.sum(m * m, axis=1)
    keep = (sq > 0) & (sq <= M_max * M_max)
    m, sq = m[keep], sq[keep]
    order = np.lexsort(tuple(m.T[::-1]) + (sq,))
    m, sq = m[order], sq[order]
    shells, start = np.unique(sq, return_index=True)
    start = np.append(start, len(sq))
    return FrequencySet(d, float(M_max), m, shells, start)


# --------------------------------------------------------------- exponential sums

def _phase(t):
    """exp(2 pi i t) after reducing t mod 1 (keeps large phases accurate)."""
    return np.exp(2j * np.pi * (t - np.round(t)))


def exp_sum(ps, m, chunk=1 << 16):
    """E(m) = N^-1 sum_j alpha_j exp(2 pi i m.z_j) for lattice points m (..., d)."""
    m = np.asarray(m)
    d = ps.dim
    if d == 1 and (m.ndim == 0 or m.shape[-1] != 1):
        m = m[..., None]
    if m.shape[-1] != d:
        raise ValueError("frequency dimension does not match the point set")
    flat = m.reshape(-1, d).astype(float)
    out = np.empty(len(flat), dtype=complex)
    if ps.grid_H is not None:
        H = ps.grid_H
        out[:] = np.where(np.all(np.mod(flat, H) == 0, axis=1), 1.0, 0.0)
        return out.reshape(m.shape[:-1])
    z, a = ps.points, ps.weights
    for s in range(0, len(flat), chunk):
        t = flat[s:s + chunk] @ z.T
        out[s:s + chunk] = _phase(t) @ a
    return (out / ps.N).reshape(m.shape[:-1])


@dataclass
class EnergySum:
    """Truncated weighted energy on the ball |m| <= M, m = 0 included."""

    energy: float
    weight_sum: float
    count: int
    cutoff: float


def _fsum(parts):
    return math.fsum(float(p) for p in parts)


def _weights_by_sq(weights, max_sq):
    sq = np.arange(max_sq + 1, dtype=float)
    return weights.weight(np.sqrt(sq))


def lattice_energy(ps, window, M, block=2048):
    """sum_{|m| <= M} w(m)|E(m)|^2 together with sum_{|m| <= M} w(m).

    Uses real weights: E(-m) = conj E(m), so only a half space is evaluated.
    Accumulation goes through per-block partials and math.fsum, which makes the
    result independent of how blocks are scheduled.
    """
    w = as_weights(window)
    d = ps.dim
    if w.dim != d:
        raise ValueError("window dimension does not match the point set")
    Mi = int(math.floor(M))
    M2 = M * M
    if lattice_count_estimate(d, M) > DEFAULT_BUDGET[d]:
        raise FrequencyBudgetError(f"cutoff {M} too large in d={d}")
    if ps.grid_H is not None:
        return _grid_energy(ps.grid_H, w, M)
    z = ps.points
    alpha = ps.weights / ps.N
    e_parts, w_parts = [], []
    count = 0
    if d == 1:
        z1 = z[:, 0]
        w0 = w.weight(0.0)
        e0 = abs(alpha.sum()) ** 2
        e_parts.append(w0 * e0)
        w_parts.append(w0)
        count += 1
        B = min(block, max(Mi, 1))
        Q = _phase(np.outer(z1, np.arange(B)))
        for m0 in range(1, Mi + 1, B):
            cnt = min(B, Mi + 1 - m0)
            base = alpha * _phase(m0 * z1)
            E = base @ Q[:, :cnt]
            wm = w.weight(np.arange(m0, m0 + cnt, dtype=float))
            e_parts.append(2.0 * np.sum(wm * (E.real**2 + E.imag**2)))
            w_parts.append(2.0 * np.sum(wm))
            count += 2 * cnt
        return EnergySum(_fsum(e_parts), _fsum(w_parts), count, float(M))

    wtab = _weights_by_sq(w, int(math.floor(M2)))
    cols = np.arange(-Mi, Mi + 1)
    P_last = _phase(np.outer(z[:, -1], cols))
    if d == 2:
        rows_per = max(1, (1 << 21) // len(cols))
        for r0 in range(0, Mi + 1, rows_per):
            rows = np.arange(r0, min(Mi + 1, r0 + rows_per))
            A = alpha[:, None] * _phase(np.outer(z[:, 0], rows))
            E = A.T @ P_last
            sq = rows[:, None] ** 2 + cols[None, :] ** 2
            mask = sq <= M2
            mult = np.where(rows == 0, 1.0, 2.0)[:, None] * mask
            ww = wtab[np.where(mask, sq, 0)] * mult
            e_parts.append(np.sum(ww * (E.real**2 + E.imag**2)))
            w_parts.append(np.sum(ww))
            count += int(mult.sum())
        return EnergySum(_fsum(e_parts), _fsum(w_parts), count, float(M))

    P_mid = _phase(np.outer(z[:, 1], cols))
    for m1 in range(0, Mi + 1):
        rem = M2 - m1 * m1
        if rem < 0:
            break
        a1 = alpha * _phase(m1 * z[:, 0])
        lim = int(math.floor(math.sqrt(rem)))
        sl = slice(Mi - lim, Mi + lim + 1)
        E = (a1[:, None] * P_mid[:, sl]).T @ P_last[:, sl]
        c = cols[sl]
        sq = m1 * m1 + c[:, None] ** 2 + c[None, :] ** 2
        mask = sq <= M2
        mult = (1.0 if m1 == 0 else 2.0) * mask
        ww = wtab[np.where(mask, sq, 0)] * mult
        e_parts.append(np.sum(ww * (E.real**2 + E.imag**2)))
        w_parts.append(np.sum(ww))
        count += int(mult.sum())
    return EnergySum(_fsum(e_parts), _fsum(w_parts), count, float(M))


def _grid_energy(H, w, M):
    """Grid exponential sum is 1 on H Z^d and 0 elsewhere."""
    d = w.dim
    K = int(math.floor(M / H))
    axis = np.arange(-K, K + 1)
    mesh = np.meshgrid(*([axis] * d), indexing="ij")
    sq = sum(g.ravel() ** 2 for g in mesh) * (H * H)
    sq = sq[sq <= M * M]
    vals = w.weight(np.sqrt(sq.astype(float)))
    s = _fsum(np.sort(vals))
    return EnergySum(s, weight_sum_ball(w, M), len(sq), float(M))


def weight_sum_ball(window, M):
    """sum_{|m| <= M} w(m), shell by shell."""
    w = as_weights(window)
    d = w.dim
    Mi = int(math.floor(M))
    if d == 1:
        parts = [w.weight(0.0)]
        for m0 in range(1, Mi + 1, 1 << 20):
            m = np.arange(m0, min(Mi + 1, m0 + (1 << 20)), dtype=float)
            parts.append(2.0 * np.sum(w.weight(m)))
        return _fsum(parts)
    counts = _shell_counts(d, M)
    sq = np.nonzero(counts)[0]
    return _fsum(counts[sq] * w.weight(np.sqrt(sq.astype(float))))


def _shell_counts(d, M):
    """counts[n] = #{m in Z^d : |m|^2 = n}, for n <= M^2."""
    Mi = int(math.floor(M))
    top = int(math.floor(M * M))
    counts = np.zeros(top + 1, dtype=np.int64)
    k = np.arange(-Mi, Mi + 1)
    k2 = k * k
    if d == 1:
        np.add.at(counts, k2, 1)
        return counts
    for m1 in range(-Mi, Mi + 1):
        if d == 2:
            sq = m1 * m1 + k2
        else:
            sq = (m1 * m1 + k2[:, None] + k2[None, :]).ravel()
        sq = sq[sq <= top]
        counts += np.bincount(sq, minlength=top + 1)
    return counts


def remainder(window, M):
    """Exact tail sum_{|m| > M} w(m) = total - partial sum (Parseval closure)."""
    w = as_weights(window)
    return max(w.total() - weight_sum_ball(w, M), 0.0)


def tail_estimate(window, M):
    """Envelope estimate of sum_{|m|>M} w(m), about |S^(d-1)| bound(M) M^d.

    Only used to pick a cutoff; reported tails are exact remainders.
    """
    w = as_weights(window)
    d = w.dim
    sphere = {1: 2.0, 2: 2 * np.pi, 3: 4 * np.pi}[d]
    return float(sphere * w.bound(M) * M**d)


# -------------------------------------------------------------- weight tables

@dataclass
class SpectralWeightTable:
    """Per-shell weights plus one trailing row carrying the exact remainder.

    ``tail_bound_flag`` is 0 on computed shells; the final row has flag 1, key
    floor(M)^2 + 1 and holds sum_{|m| > M} w(m) in its weight column.
    """

    window: object
    cutoff: float
    m_sq: np.ndarray
    weight: np.ndarray
    tail: float

    @classmethod
    def build(cls, window, M):
        w = as_weights(window)
        counts = _shell_counts(w.dim, M) if w.dim > 1 else None
        if counts is None:
            sq = np.arange(int(math.floor(M)) + 1) ** 2
        else:
            sq = np.nonzero(counts)[0]
        vals = w.weight(np.sqrt(sq.astype(float)))
        return cls(w, float(M), sq.astype(np.int64), np.asarray(vals), remainder(w, M))

    @property
    def mode(self):
        return self.window.mode

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["m_sq", "weight", "tail_bound_flag"])
            for s, v in zip(self.m_sq, self.weight):
                wr.writerow([int(s), repr(float(v)), 0])
            wr.writerow([int(math.floor(self.cutoff)) ** 2 + 1, repr(float(self.tail)), 1])

    @staticmethod
    def read_csv(path):
        with open(path) as fh:
            rows = list(csv.DictReader(fh))
        sq = np.array([int(r["m_sq"]) for r in rows])
        val = np.array([float(r["weight"]) for r in rows])
        flag = np.array([int(r["tail_bound_flag"]) for r in rows])
        return sq, val, flag
