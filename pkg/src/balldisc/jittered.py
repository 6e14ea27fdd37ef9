"""Jittered sampling: one uniform point per cube cell, weights f(z_j).

J(N, f, r) is the expectation of int |D_N(x, r)|^2 dx.  Two routes:

* :func:`jitter_closed_form` -- the variance identity
  J = N^-1 |B_r| ||f||_2^2 - sum_j ||chi_B * (f chi_{E_j})||_2^2,
  with each cell term written as a lattice sum.  The transform of a cube
  cell is a product of sincs, so the only error is the frequency cutoff.
* :func:`jitter_mc` -- sample the points, evaluate the exact L2 average
  per replicate, and average.

Cell-transform algebra: with centres c_j and side 1/H,
  chi_{E_j}^(n) = exp(-2 pi i n.c_j) sigma(n),  sigma(n) = prod_i sin(pi n_i/H)/(pi n_i),
so  sum_j |g_j^(m)|^2 = N sum_{rho mod H} |sum_{k = rho} u_k sigma(k - m)|^2
with u_k = f_hat(k) exp(2 pi i k.(-1/2 + 1/(2H)) 1).
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .densities import holder_density
from .engine import _pair_energy, _support_terms
from .spectral import BallWeights, RadialWeights
from .torus import BallWindow, PartitionCells, WeightedPointSet, jitter_generator


@dataclass
class JitterEstimate:
    """Closed-form and/or Monte Carlo values of J.

    The closed form is computed on a finite frequency box and then overstates J
    by at most ``tail_bound``: the true value lies in
    [closed_form - tail_bound, closed_form].
    """

    N: int
    window: dict
    closed_form: float = math.nan
    tail_bound: float = math.nan
    cutoff: int | None = None
    mc_value: float = math.nan
    mc_stderr: float = math.nan
    replicates: int = 0
    cell_terms: np.ndarray | None = None
    diagonal: float = math.nan
    extra: dict = field(default_factory=dict)

    def agrees(self, k=4.0):
        """|closed_form - mc_value| <= k stderr + the closed-form tail (+ rounding)."""
        slack = self.tail_bound + 1e-12 * max(abs(self.closed_form), abs(self.diagonal), 1e-300)
        return abs(self.closed_form - self.mc_value) <= k * self.mc_stderr + slack


def _window(cells, B):
    if isinstance(B, (BallWeights, RadialWeights)):
        w = B
    elif isinstance(B, BallWindow):
        w = BallWeights(B.dim, B.radius)
    elif isinstance(B, tuple):
        w = RadialWeights(cells.dim, *B)
    else:
        w = BallWeights(cells.dim, float(B))
    if w.dim != cells.dim:
        raise ValueError("window and cells differ in dimension")
    return w


def _sigma1(n, H):
    n = np.asarray(n, dtype=float)
    out = np.full(n.shape, 1.0 / H)
    nz = n != 0
    out[nz] = np.sin(np.pi * n[nz] / H) / (np.pi * n[nz])
    return out


def _box(d, M):
    axis = np.arange(-M, M + 1)
    mesh = np.meshgrid(*([axis] * d), indexing="ij")
    return np.stack([g.ravel() for g in mesh], axis=-1)


def _class_sums(f, H, m):
    """S[rho, m] for every residue class rho of supp f, shape (classes, len(m))."""
    k = f.modes
    shift = -0.5 + 0.5 / H
    u = f.coeffs * np.exp(2j * np.pi * shift * (np.sum(k, axis=1) % (2 * H)))
    cls = np.mod(k, H)
    _, label = np.unique(cls, axis=0, return_inverse=True)
    label = label.ravel()
    n_cls = int(label.max()) + 1
    S = np.zeros((n_cls, len(m)), dtype=complex)
    for s in range(0, len(m), 1 << 14):
        mm = m[s:s + (1 << 14)]
        sig = np.ones((len(k), len(mm)))
        for i in range(f.dim):
            sig *= _sigma1(k[:, i, None] - mm[None, :, i], H)
        np.add.at(S[:, s:s + (1 << 14)], label, u[:, None] * sig)
    return S


def jitter_closed_form(cells, f, B, tolerance=None, per_cell=False, max_cutoff=None):
    """Exact expected L2 discrepancy of jittered sampling, up to a reported tail.

    ``B`` is a radius, a BallWindow, an ``(a, b)`` pair (r-average over [a, b])
    or a weight family.  ``tolerance`` defaults to 1e-6 of the leading term.
    ``per_cell`` also returns the N cell terms (costs N times more).
    """
    if f.dim != cells.dim:
        raise ValueError("density and cells differ in dimension")
    w = _window(cells, B)
    H, N, d = cells.side_count, cells.N, cells.dim
    l2 = f.l2_sq()
    diagonal = w.total() * l2 / N
    tol = 1e-6 * diagonal if tolerance is None else tolerance
    K = f.bandwidth_inf
    M = K + 8 * H
    cap = max_cutoff or {1: 1 << 20, 2: 1200, 3: 120}[d]
    while True:
        m = _box(d, M)
        rho = np.sqrt(np.sum(m.astype(float) ** 2, axis=1))
        S = _class_sums(f, H, m)
        mass = np.sum(np.abs(S) ** 2, axis=0) * N           # sum_j |g_j^(m)|^2
        wm = w.weight(rho)
        sub = math.fsum(wm * mass)
        leftover = max(l2 - math.fsum(mass), 0.0)
        tail = float(w.bound(M + 1) * leftover)
        if tail <= tol or M >= cap:
            break
        M = min(cap, 2 * M)
    est = JitterEstimate(N, w.describe(), diagonal - sub, tail, int(M), diagonal=diagonal)
    if tail > tol:
        est.extra["warning"] = f"tail {tail:.3g} above tolerance {tol:.3g} at cutoff cap {cap}"
    if per_cell:
        est.cell_terms = _cell_terms(cells, f, w, m, wm)
    return est


def _cell_terms(cells, f, w, m, wm):
    """||chi_B * (f chi_{E_j})||^2 truncated to the box m."""
    H = cells.side_count
    k = f.modes
    phi = np.exp(2j * np.pi * (cells.centers @ k.T.astype(float)))  # (N, K)
    out = np.zeros(cells.N)
    for s in range(0, len(m), 4096):
        mm = m[s:s + 4096]
        sig = np.ones((len(k), len(mm)))
        for i in range(f.dim):
            sig *= _sigma1(k[:, i, None] - mm[None, :, i], H)
        G = phi @ (f.coeffs[:, None] * sig)                          # (N, block)
        out += (np.abs(G) ** 2) @ wm[s:s + 4096]
    return out


def _replicate_points(cells, seed, replicate):
    gen = np.random.Generator(jitter_generator(seed, replicate))
    u = gen.random((cells.N, 4))[:, : cells.dim]
    return cells.lower_corners + u * cells.side


def jitter_mc(cells, f, B, replicates=2000, seed=0, weights="density"):
    """Monte Carlo estimate of J with its standard error.

    Each replicate draws one point per cell from the (seed, replicate) stream and
    evaluates the L2 average exactly (pair closure).  ``weights="unit"`` keeps
    alpha_j = 1 instead of f(z_j); that mixed scheme has no reference value.
    """
    if replicates < 100:
        raise ValueError("need at least 100 replicates")
    if weights not in ("density", "unit"):
        raise ValueError("weights must be 'density' or 'unit'")
    if not f.real:
        raise ValueError("jittered weights need a real density")
    w = _window(cells, B)
    vals = np.empty(replicates)
    for rep in range(replicates):
        z = _replicate_points(cells, seed, rep)
        alpha = f(z) if weights == "density" else np.ones(cells.N)
        ps = WeightedPointSet(z, alpha)
        cross, self_ = _support_terms(ps, f, w)
        vals[rep] = _pair_energy(ps, w) - 2.0 * cross + self_
    mean = float(np.mean(vals))
    err = float(np.std(vals, ddof=1) / math.sqrt(replicates))
    return JitterEstimate(cells.N, w.describe(), mc_value=mean, mc_stderr=err, replicates=replicates,
                          extra={"seed": int(seed), "weights": weights})


def jitter_both(cells, f, B, replicates=2000, seed=0):
    """Closed form and Monte Carlo in one estimate."""
    est = jitter_closed_form(cells, f, B)
    mc = jitter_mc(cells, f, B, replicates, seed)
    est.mc_value, est.mc_stderr, est.replicates = mc.mc_value, mc.mc_stderr, mc.replicates
    est.extra.update(mc.extra)
    return est


def holder_rate_experiment(beta, d=1, H_list=(4, 8, 16, 32, 64), r=0.25, seed=None,
                           shape="lacunary", f=None):
    """Closed-form J for a beta-Hoelder density over N = H^d.

    ``seed`` is unused by the closed form and kept for table provenance.
    Returns rows ``{N, r, J_closed, J_mc, stderr, tail_bound}``.
    """
    if not 0 < beta <= 1:
        raise ValueError("beta must lie in (0, 1]")
    if list(H_list) != sorted(H_list):
        raise ValueError("H_list must be ascending")
    f = holder_density(beta, d, shape=shape) if f is None else f
    rows = []
    for H in H_list:
        est = jitter_closed_form(PartitionCells(d, H), f, r)
        rows.append({"N": H**d, "r": r, "J_closed": est.closed_form, "J_mc": math.nan,
                     "stderr": math.nan, "tail_bound": est.tail_bound})
    return rows


CSV_COLUMNS = ("N", "r", "J_closed", "J_mc", "stderr", "tail_bound")


def write_jitter_csv(rows, path):
    with open(path, "w", newline="") as fh:
        wr = csv.DictWriter(fh, fieldnames=CSV_COLUMNS, extrasaction="ignore")
        wr.writeheader()
        for row in rows:
            wr.writerow({k: row.get(k, math.nan) for k in CSV_COLUMNS})


def cell_averages(cells, f):
    """M_{E_j}(f): mean of f over each cell, from the Fourier side."""
    H = cells.side_count
    k = f.modes
    sig = np.ones(len(k))
    for i in range(f.dim):
        sig *= _sigma1(k[:, i], H)
    phase = np.exp(2j * np.pi * (cells.centers @ k.T.astype(float)))
    return (phase @ (f.coeffs * sig)).real * cells.N
