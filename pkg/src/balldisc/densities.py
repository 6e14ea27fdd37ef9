"""Densities as finite Fourier series, their norms, and the test constructions.

A :class:`DensityField` stores integer modes and complex coefficients.  All
spatial work (evaluation, Lp norms, Morrey norms) goes through the truncated
series, so Parseval identities hold exactly.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .spectral import ball_fourier
from .torus import UNIT_BALL_VOLUME, _check_dim

_REAL_TOL = 1e-12


def _keys(modes, span):
    """Injective integer key for modes with |m_i| <= span."""
    base = 2 * span + 1
    k = np.zeros(len(modes), dtype=np.int64)
    for i in range(modes.shape[1] - 1, -1, -1):
        k = k * base + (modes[:, i] + span)
    return k


@dataclass(frozen=True, eq=False)
class DensityField:
    """f(x) = sum_m coeffs[m] exp(2 pi i m.x) over a finite set of modes."""

    dim: int
    modes: np.ndarray
    coeffs: np.ndarray
    recipe: str = "custom"
    params: dict = field(default_factory=dict)
    declared_norms: dict = field(default_factory=dict, compare=False)
    real: bool = None

    def __post_init__(self):
        _check_dim(self.dim)
        m = np.asarray(self.modes, dtype=np.int64).reshape(-1, self.dim)
        c = np.asarray(self.coeffs, dtype=complex).reshape(-1)
        if len(m) != len(c):
            raise ValueError("modes and coeffs differ in length")
        span = int(np.max(np.abs(m))) if len(m) else 0
        keys = _keys(m, span)
        order = np.argsort(keys, kind="stable")
        keys, m, c = keys[order], m[order], c[order]
        if len(keys) and np.any(np.diff(keys) == 0):
            raise ValueError("duplicate modes")
        for name, val in (("modes", m), ("coeffs", c), ("_keys", keys)):
            val.setflags(write=False)
            object.__setattr__(self, name, val)
        object.__setattr__(self, "_span", span)
        sym = self._is_symmetric()
        if self.real is None:
            object.__setattr__(self, "real", sym)
        elif self.real and not sym:
            raise ValueError("declared real but f_hat(-m) != conj f_hat(m)")

    def _is_symmetric(self):
        if not len(self.coeffs):
            return True
        mirror = self.coeff_at(-self.modes)
        scale = max(1.0, float(np.max(np.abs(self.coeffs))))
        return bool(np.all(np.abs(mirror - np.conj(self.coeffs)) <= _REAL_TOL * scale))

    # ------------------------------------------------------------ lookup
    def coeff_at(self, m):
        """f_hat at lattice points m (..., d); zero off the support."""
        m = np.asarray(m, dtype=np.int64)
        if self.dim == 1 and (m.ndim == 0 or m.shape[-1] != 1):
            m = m[..., None]
        flat = m.reshape(-1, self.dim)
        out = np.zeros(len(flat), dtype=complex)
        if len(self.coeffs):
            inside = np.all(np.abs(flat) <= self._span, axis=1)
            k = _keys(flat[inside], self._span)
            pos = np.searchsorted(self._keys, k)
            pos = np.minimum(pos, len(self._keys) - 1)
            hit = self._keys[pos] == k
            vals = np.where(hit, self.coeffs[pos], 0.0)
            out[inside] = vals
        return out.reshape(m.shape[:-1])

    @property
    def mean(self):
        v = complex(self.coeff_at(np.zeros(self.dim, dtype=np.int64)))
        return v.real if self.real else v

    @property
    def bandwidth(self):
        """max |m| over the support (Euclidean)."""
        if not len(self.modes):
            return 0.0
        return float(np.sqrt(np.max(np.sum(self.modes**2, axis=1))))

    @property
    def bandwidth_inf(self):
        return int(np.max(np.abs(self.modes))) if len(self.modes) else 0

    def l2_sq(self):
        return float(np.sum(np.abs(self.coeffs) ** 2))

    def __mul__(self, t):
        return DensityField(self.dim, self.modes, self.coeffs * t, "custom",
                            {"scaled_from": self.recipe, "factor": t})

    __rmul__ = __mul__

    # -------------------------------------------------------- evaluation
    def __call__(self, x, chunk=4096):
        x = np.asarray(x, dtype=float)
        if self.dim == 1 and (x.ndim == 0 or x.shape[-1] != 1):
            x = x[..., None]
        flat = x.reshape(-1, self.dim)
        out = np.empty(len(flat), dtype=complex)
        mf = self.modes.astype(float)
        for s in range(0, len(flat), chunk):
            t = flat[s:s + chunk] @ mf.T
            out[s:s + chunk] = np.exp(2j * np.pi * (t - np.round(t))) @ self.coeffs
        out = out.reshape(x.shape[:-1])
        return out.real if self.real else out

    def grid_values(self, G):
        """Values at the points k/G, k in {0..G-1}^d, through one inverse FFT."""
        if 2 * self.bandwidth_inf >= G:
            raise ValueError(f"grid {G} aliases modes up to {self.bandwidth_inf}")
        arr = np.zeros((G,) * self.dim, dtype=complex)
        idx = tuple(np.mod(self.modes, G).T)
        arr[idx] = self.coeffs
        vals = np.fft.ifftn(arr) * G**self.dim
        return vals.real if self.real else vals

    # --------------------------------------------------------------- I/O
    def to_csv(self, path):
        """Rows ``m_1 .. m_d, re, im``; recipe and parameters in ``<path>.json``."""
        path = Path(path)
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow([f"m_{i + 1}" for i in range(self.dim)] + ["re", "im"])
            for m, c in zip(self.modes, self.coeffs):
                wr.writerow([int(v) for v in m] + [repr(float(c.real)), repr(float(c.imag))])
        side = {"dim": self.dim, "recipe": self.recipe, "params": _jsonable(self.params),
                "declared_norms": _jsonable(self.declared_norms)}
        Path(str(path) + ".json").write_text(json.dumps(side, indent=2, sort_keys=True))

    @classmethod
    def from_csv(cls, path):
        path = Path(path)
        with open(path) as fh:
            rows = list(csv.reader(fh))
        head, body = rows[0], rows[1:]
        d = len(head) - 2
        modes = np.array([[int(v) for v in r[:d]] for r in body], dtype=np.int64).reshape(-1, d)
        coeffs = np.array([float(r[d]) + 1j * float(r[d + 1]) for r in body])
        side_path = Path(str(path) + ".json")
        side = json.loads(side_path.read_text()) if side_path.exists() else {}
        return cls(d, modes, coeffs, side.get("recipe", "custom"), side.get("params", {}),
                   dict(side.get("declared_norms", {})))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return obj


# ------------------------------------------------------------------ builders

def constant_density(c=1.0, d=1):
    return DensityField(d, np.zeros((1, d), dtype=np.int64), [c], "constant", {"c": c})


def single_mode(k, amplitude=1.0, d=None):
    """f(x) = amplitude * exp(2 pi i k.x); complex unless k = 0."""
    k = np.atleast_1d(np.asarray(k, dtype=np.int64))
    d = len(k) if d is None else d
    if len(k) != d:
        raise ValueError("mode has the wrong dimension")
    return DensityField(d, k[None, :], [amplitude], "single_mode",
                        {"k": k.tolist(), "amplitude": amplitude})


def trig_density(modes, coeffs, d=None, recipe="custom", **params):
    modes = np.asarray(modes, dtype=np.int64)
    if modes.ndim == 1:
        modes = modes[:, None]
    d = modes.shape[1] if d is None else d
    return DensityField(d, modes, coeffs, recipe, params)


def random_trig_density(d, bandwidth, rng, positive=True, scale=1.0):
    """Real trig polynomial with |m_i| <= bandwidth and random coefficients.

    With ``positive`` the mean is raised to sum |f_hat(m)| over m != 0, which
    makes f >= 0 pointwise.
    """
    axis = np.arange(-bandwidth, bandwidth + 1)
    mesh = np.meshgrid(*([axis] * d), indexing="ij")
    modes = np.stack([g.ravel() for g in mesh], axis=-1)
    keys = _keys(modes, bandwidth)
    mirror = _keys(-modes, bandwidth)
    half = keys > mirror
    c = np.zeros(len(modes), dtype=complex)
    nh = int(half.sum())
    vals = scale * (rng.normal(size=nh) + 1j * rng.normal(size=nh)) / np.sqrt(2 * len(modes))
    c[half] = vals
    lookup = dict(zip(keys[half].tolist(), vals))
    neg = keys < mirror
    c[neg] = np.conj([lookup[k] for k in mirror[neg].tolist()])
    zero = keys == mirror
    c[zero] = np.sum(np.abs(c)) if positive else scale * rng.normal()
    return DensityField(d, modes, c, "custom", {"bandwidth": bandwidth, "positive": positive}, real=True)


@dataclass(frozen=True)
class BumpProfile:
    """Radial Fourier profile: 1 on |xi| <= 1, 0 on |xi| >= 2, monotone between."""

    transition: str = "quintic"

    def _step(self, t):
        if self.transition == "quintic":
            return t**3 * (10 - 15 * t + 6 * t * t)
        if self.transition == "cubic":
            return t * t * (3 - 2 * t)
        if self.transition == "smooth":
            with np.errstate(divide="ignore", over="ignore"):
                a = np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)
                b = np.where(t < 1, np.exp(-1.0 / np.where(t < 1, 1.0 - t, 1.0)), 0.0)
            return a / (a + b)
        raise ValueError(f"unknown transition {self.transition!r}")

    def __call__(self, xi):
        xi = np.abs(np.asarray(xi, dtype=float))
        t = np.clip(xi - 1.0, 0.0, 1.0)
        out = 1.0 - self._step(t)
        out = np.where(xi <= 1.0, 1.0, out)
        return np.where(xi >= 2.0, 0.0, out)


def _ball_modes(d, R):
    """Lattice points with |m| < R."""
    K = int(math.ceil(R))
    axis = np.arange(-K, K + 1)
    mesh = np.meshgrid(*([axis] * d), indexing="ij")
    m = np.stack([g.ravel() for g in mesh], axis=-1)
    return m[np.sum(m * m, axis=1) < R * R]


def periodized_bump(M, d=1, profile=None):
    """F(x) = sum_m phi_hat(m/M) exp(2 pi i m.x); plateau 1 on |m| <= M."""
    if M < 1:
        raise ValueError("bandwidth M must be >= 1")
    profile = BumpProfile() if profile is None else profile
    m = _ball_modes(d, 2.0 * M)
    c = profile(np.sqrt(np.sum(m * m, axis=1)) / M)
    keep = c > 0
    return DensityField(d, m[keep], c[keep], "periodized_bump",
                        {"M": M, "transition": profile.transition}, real=True)


def scale_density(F, H):
    """f(x) = F(Hx): modes dilated by the integer H."""
    if int(H) != H or H < 1:
        raise ValueError("H must be a positive integer")
    H = int(H)
    params = {"H": H, "base": F.recipe, "base_params": dict(F.params)}
    return DensityField(F.dim, F.modes * H, F.coeffs, "scaled", params, real=F.real)


def dvp_density(n, d=1):
    """Tensor de la Vallee Poussin kernel: 1 on |m_j| <= n, linear to 0 at 2n."""
    if n < 1:
        raise ValueError("degree n must be >= 1")
    axis = np.arange(-(2 * n - 1), 2 * n)
    prof = np.minimum(1.0, (2 * n - np.abs(axis)) / n)
    mesh = np.meshgrid(*([axis] * d), indexing="ij")
    modes = np.stack([g.ravel() for g in mesh], axis=-1)
    pm = np.meshgrid(*([prof] * d), indexing="ij")
    c = np.prod(np.stack([g.ravel() for g in pm], axis=-1), axis=1)
    return DensityField(d, modes, c, "dvp", {"n": n}, real=True)


def holder_constant(f, beta):
    """Certified C with |f(x) - f(y)| <= C |x - y|^beta on the torus.

    Uses |e^{i t} - 1| <= min(2, |t|) <= 2^(1-beta) |t|^beta termwise.
    """
    norms = np.sqrt(np.sum(f.modes.astype(float) ** 2, axis=1))
    return float(2.0 ** (1 - beta) * (2 * np.pi) ** beta * np.sum(np.abs(f.coeffs) * norms**beta))


def _cusp_coeffs(beta, K):
    """Fourier coefficients of |sin(pi x)|^beta for |m| <= K.

    c_0 = Gamma(beta+1) / (2^beta Gamma(1+beta/2)^2) and the ratio
    c_{m+1}/c_m = (m - beta/2)/(m + 1 + beta/2), which never overflows.
    """
    c = np.empty(K + 1)
    c[0] = math.gamma(beta + 1) / (2**beta * math.gamma(1 + beta / 2) ** 2)
    for m in range(K):
        c[m + 1] = c[m] * (m - beta / 2) / (m + 1 + beta / 2)
    return c


def holder_density(beta, d=1, shape="lacunary", octaves=(2, 12), bandwidth=1024):
    """A band-limited beta-Holder test function, summed over coordinates.

    ``shape="lacunary"``: W(t) = sum_{k=k0}^{k1} 2^(-beta k) cos(2 pi 2^k t),
    lifted by its minimum so that min f is zero up to a certified margin (the
    grid minimum plus half the curvature bound times the squared half-step).
    Truncation keeps the Holder order with a constant independent of k1.

    ``shape="cusp"``: |sin(pi t)|^beta truncated at ``bandwidth``.

    The certified Holder constant of the truncated object is stored in
    ``params["holder_constant"]``.
    """
    if not 0.0 < beta <= 1.0:
        raise ValueError(f"beta must lie in (0, 1], got {beta}")
    _check_dim(d)
    if shape == "lacunary":
        k0, k1 = octaves
        ks = np.arange(k0, k1 + 1)
        freq = 2**ks
        amp = 2.0 ** (-beta * ks)
        # lift by the minimum, not by sum(amp): the smallest offset keeping f >= 0
        G = _pow2_at_least(16 * int(freq[-1]))
        t = np.arange(G) / G
        W = np.cos(2 * np.pi * np.outer(t, freq)) @ amp
        curv = 4 * np.pi**2 * float(np.sum(freq**2 * amp))
        lift = -float(W.min()) + 0.5 * curv * (0.5 / G) ** 2
        one_m = np.concatenate([[0], freq, -freq])
        one_c = np.concatenate([[lift], amp / 2, amp / 2])
        params = {"beta": beta, "shape": shape, "octaves": [int(k0), int(k1)],
                  "certified_nonneg": True}
    elif shape == "cusp":
        c = _cusp_coeffs(beta, bandwidth)
        one_m = np.concatenate([np.arange(0, bandwidth + 1), -np.arange(1, bandwidth + 1)])
        one_c = np.concatenate([c, c[1:]])
        params = {"beta": beta, "shape": shape, "bandwidth": int(bandwidth)}
    else:
        raise ValueError(f"unknown shape {shape!r}")
    modes, coeffs = [], []
    for axis in range(d):
        m = np.zeros((len(one_m), d), dtype=np.int64)
        m[:, axis] = one_m
        modes.append(m)
        coeffs.append(one_c.astype(complex))
    modes = np.concatenate(modes)
    coeffs = np.concatenate(coeffs)
    # the d copies of the constant mode collide; merge them
    zero = np.all(modes == 0, axis=1)
    const = coeffs[zero].sum()
    modes = np.concatenate([np.zeros((1, d), dtype=np.int64), modes[~zero]])
    coeffs = np.concatenate([[const], coeffs[~zero]])
    f = DensityField(d, modes, coeffs, "holder_sample", params, real=True)
    f.params["holder_constant"] = holder_constant(f, beta)
    return f


# --------------------------------------------------------------------- norms

_LP_FLOOR = {1: 1 << 13, 2: 1 << 9, 3: 1 << 5}


def _pow2_at_least(n):
    return 1 << max(0, int(math.ceil(math.log2(max(n, 1)))))


def lp_norm(f, p, return_error=False):
    """||f||_p.  Exact by Parseval for p = 2; otherwise a tensor grid.

    The grid has at least 4x the bandwidth per axis and a floor per dimension,
    since |f|^p has kinks at sign changes and the rule is only second order
    there.  The error estimate is the change under one refinement (G -> 2G).
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    if not len(f.coeffs):
        return (0.0, 0.0) if return_error else 0.0
    if p == 2:
        val, err = math.sqrt(f.l2_sq()), 0.0
    else:
        G = max(_LP_FLOOR[f.dim], _pow2_at_least(4 * f.bandwidth_inf + 1))
        if (2 * G) ** f.dim > _SAMPLE_LIMIT:
            raise ValueError(f"Lp quadrature needs a {2 * G}^{f.dim} grid; too large")

        def on(G_):
            a = np.abs(f.grid_values(G_))
            return float(np.max(a)) if math.isinf(p) else float(np.mean(a**p) ** (1.0 / p))

        coarse, val = on(G), on(2 * G)
        err = abs(val - coarse)
    f.declared_norms[f"L{p}"] = val
    return (val, err) if return_error else val


@dataclass
class MorreyEstimate:
    """Lower estimate of sup_{z,r} r^-lam int_{B(z,r)} |f| on a center x radius grid."""

    value: float
    center: tuple
    radius: float
    grid: int
    radii: int
    exact_ball_integrals: bool


def morrey_radii(n_small=40, n_large=24, q=0.8):
    """Geometric toward 0 plus 0.5(1 - 2^-i) toward 1/2; sorted and unique."""
    small = 0.5 * q ** np.arange(1, n_small + 1)
    large = 0.5 * (1.0 - 2.0 ** -np.arange(1, n_large + 1))
    return np.unique(np.concatenate([small, large]))


_GRID_CAP = {1: 1 << 16, 2: 1 << 10, 3: 1 << 6}
_SAMPLE_LIMIT = 1 << 24


def certified_nonneg(f):
    """True when f >= 0 is known for sure.

    Either the builder certified it, or f_hat(0) >= sum_{m != 0} |f_hat(m)|.
    """
    if not f.real or not len(f.coeffs):
        return f.real
    if f.params.get("certified_nonneg"):
        return True
    zero = np.all(f.modes == 0, axis=1)
    rest = float(np.sum(np.abs(f.coeffs[~zero])))
    # equality is the common case (offset chosen as sum |f_hat|); allow rounding
    return bool(f.coeff_at(np.zeros(f.dim, dtype=np.int64)).real >= rest * (1 - 1e-12))


def _folded(modes, coeffs, G, d):
    """Coefficient array whose inverse FFT gives exact values on (1/G)Z^d."""
    C = np.zeros((G,) * d, dtype=complex)
    np.add.at(C, tuple(np.mod(modes, G).T), coeffs)
    return C


def morrey_estimate(f, lam, grid=None, radii=None):
    """Maximize r^-lam int_{B(z,r)} |f| over grid centres z and a radius list.

    For certifiably nonnegative f the ball integrals are exact at every centre
    (the coefficients times chi_hat are folded onto the centre grid).  Otherwise
    |f| is sampled on a grid of at least 4x the bandwidth and its discrete
    Fourier coefficients stand in for the true ones.
    """
    d = f.dim
    if not 0.0 < lam <= d:
        raise ValueError(f"lambda must lie in (0, {d}], got {lam}")
    radii = morrey_radii() if radii is None else np.asarray(radii, dtype=float)
    if len(radii) < 1 or np.any(radii <= 0) or np.any(radii >= 0.5):
        raise ValueError("radii must lie in (0, 1/2)")
    need = _pow2_at_least(4 * f.bandwidth_inf + 1)
    exact = certified_nonneg(f)
    if exact:
        G = grid or max(32, min(need, _GRID_CAP[d]))
        modes, coeffs = f.modes, f.coeffs
        rho_m = np.sqrt(np.sum(modes.astype(float) ** 2, axis=1))
    else:
        G = grid or max(32, need)
        if G < need:
            raise ValueError(f"grid {G} is coarser than 4x the bandwidth")
        if G**d > _SAMPLE_LIMIT:
            raise ValueError(f"sampling |f| needs a {G}^{d} grid; too large")
        C = np.fft.fftn(np.abs(f.grid_values(G))) / G**d
        freq = np.fft.fftfreq(G, 1.0 / G)
        mesh = np.meshgrid(*([freq] * d), indexing="ij")
        rho = np.sqrt(sum(g * g for g in mesh))
    best, arg = -np.inf, (None, None)
    for r in radii:
        r = float(r)
        if exact:
            conv = np.fft.ifftn(_folded(modes, coeffs * ball_fourier(d, r, rho_m), G, d)).real * G**d
        else:
            conv = np.fft.ifftn(C * ball_fourier(d, r, rho)).real * G**d
        k = int(np.argmax(conv))
        v = float(conv.flat[k]) * r**-lam
        if v > best:
            idx = np.unravel_index(k, conv.shape)
            best, arg = v, (tuple(float(i) / G for i in idx), r)
    return MorreyEstimate(best, arg[0], arg[1], G, len(radii), exact)


def morrey_norm(f, lam, grid=None, radii=None):
    """||f||_{1,lam} estimated from below; see :func:`morrey_estimate`."""
    est = morrey_estimate(f, lam, grid, radii)
    f.declared_norms[f"morrey_{lam}"] = est.value
    return est.value


def imbedding_constant(d):
    """c_d with ||f||_{1,d/2} <= c_d ||f||_2, namely sqrt(|B_1|)."""
    return math.sqrt(UNIT_BALL_VOLUME[d])
