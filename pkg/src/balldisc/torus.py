"""Torus geometry: wrapping, point sets, balls and cube partitions.

The torus is identified with the half-open cube [-1/2, 1/2)^d.  Every
coordinate stored in this module has already been wrapped into that cube.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

SUPPORTED_DIMS = (1, 2, 3)

# volume of the unit ball in R^d
UNIT_BALL_VOLUME = {1: 2.0, 2: np.pi, 3: 4.0 * np.pi / 3.0}


def _check_dim(d):
    if d not in SUPPORTED_DIMS:
        raise ValueError(f"dimension must be one of {SUPPORTED_DIMS}, got {d}")


def wrap(x):
    """Map reals to [-1/2, 1/2) by subtracting the nearest integer.

    Ties go down, so 0.5 maps to -0.5.
    """
    x = np.asarray(x, dtype=float)
    y = x - np.floor(x + 0.5)
    # x + 0.5 can round up across an integer; pull stragglers back in
    y = np.where(y >= 0.5, y - 1.0, y)
    y = np.where(y < -0.5, y + 1.0, y)
    return y


def wrap_distance(x, y):
    """Euclidean distance on the torus, min over integer shifts of |x - y + k|.

    Accepts single points or stacks of points along the leading axes.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape[-1:] != y.shape[-1:]:
        raise ValueError(f"dimension mismatch: {x.shape} vs {y.shape}")
    diff = wrap(x - y)
    return np.sqrt(np.sum(diff * diff, axis=-1))


def _frozen(a):
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class WeightedPointSet:
    """N points on the torus with real weights alpha_j.

    Parameters
    ----------
    points : array_like, shape (N, d) or (N,)
        Coordinates; wrapped into [-1/2, 1/2) on construction.
    weights : array_like, shape (N,), optional
        Defaults to all ones.
    nonneg : bool, optional
        Declared sign flag.  Inferred when omitted; a declared value that
        disagrees with the weights raises ValueError.
    grid_H : int, optional
        Set by :func:`grid_points`.  Lets spectral code use the closed form of
        the exponential sum of the grid.
    """

    points: np.ndarray
    weights: np.ndarray = None
    nonneg: bool = None
    grid_H: int | None = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[0] < 1:
            raise ValueError("points must have shape (N, d) with N >= 1")
        _check_dim(pts.shape[1])
        w = np.ones(pts.shape[0]) if self.weights is None else np.asarray(self.weights, dtype=float)
        if w.shape != (pts.shape[0],):
            raise ValueError(f"need {pts.shape[0]} weights, got shape {w.shape}")
        if not np.all(np.isfinite(w)) or not np.all(np.isfinite(pts)):
            raise ValueError("points and weights must be finite")
        actual = bool(np.all(w >= 0))
        if self.nonneg is not None and bool(self.nonneg) != actual:
            raise ValueError("nonneg flag is inconsistent with the weights")
        if self.grid_H is not None and not np.all(w == 1.0):
            raise ValueError("grid_H is only meaningful with unit weights")
        object.__setattr__(self, "points", _frozen(wrap(pts)))
        object.__setattr__(self, "weights", _frozen(w))
        object.__setattr__(self, "nonneg", actual)

    @property
    def dim(self):
        return self.points.shape[1]

    @property
    def N(self):
        return self.points.shape[0]

    def __len__(self):
        return self.N

    def with_weights(self, weights):
        """Same points, new weights (drops the grid tag)."""
        return WeightedPointSet(self.points, weights)

    def abs_mean(self):
        """N^-1 sum |alpha_j|, the sup of the exponential sum."""
        return float(np.mean(np.abs(self.weights)))

    def digest(self):
        """Short content hash, used in report provenance."""
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.points).tobytes())
        h.update(np.ascontiguousarray(self.weights).tobytes())
        return h.hexdigest()[:16]


def weight_norm(ps):
    """Normalized l2 norm (N^-1 sum alpha_j^2)^(1/2)."""
    w = ps.weights
    return float(np.sqrt(np.mean(w * w)))


@dataclass(frozen=True)
class BallWindow:
    """Ball B_r of radius 0 < r < 1/2, optionally recentred."""

    dim: int
    radius: float
    center_offset: tuple = None

    def __post_init__(self):
        _check_dim(self.dim)
        r = float(self.radius)
        if not 0.0 < r < 0.5:
            raise ValueError(f"radius must lie in (0, 1/2), got {r}")
        object.__setattr__(self, "radius", r)
        c = np.zeros(self.dim) if self.center_offset is None else wrap(np.atleast_1d(self.center_offset))
        if c.shape != (self.dim,):
            raise ValueError("center_offset has the wrong dimension")
        object.__setattr__(self, "center_offset", tuple(float(v) for v in c))

    @property
    def volume(self):
        return UNIT_BALL_VOLUME[self.dim] * self.radius**self.dim

    def contains(self, x):
        """Membership of (wrapped) points in center_offset + B_r."""
        return wrap_distance(np.atleast_2d(x), np.asarray(self.center_offset)) < self.radius


@dataclass(frozen=True)
class PartitionCells:
    """The H^d half-open cubes of side 1/H tiling [-1/2, 1/2)^d.

    Cell j has multi-index ``np.unravel_index(j, (H,)*d)`` in row-major order.
    """

    dim: int
    side_count: int

    def __post_init__(self):
        _check_dim(self.dim)
        if int(self.side_count) != self.side_count or self.side_count < 1:
            raise ValueError("side_count must be a positive integer")
        object.__setattr__(self, "side_count", int(self.side_count))

    @property
    def N(self):
        return self.side_count**self.dim

    @property
    def side(self):
        return 1.0 / self.side_count

    @property
    def cell_volume(self):
        return self.side**self.dim

    @property
    def diameter(self):
        return np.sqrt(self.dim) * self.side

    @property
    def lower_corners(self):
        H, d = self.side_count, self.dim
        axis = -0.5 + np.arange(H) / H
        mesh = np.meshgrid(*([axis] * d), indexing="ij")
        return np.stack([g.ravel() for g in mesh], axis=-1)

    @property
    def centers(self):
        return self.lower_corners + 0.5 * self.side

    def locate(self, x):
        """Index of the cell holding each point (points are wrapped first)."""
        x = wrap(np.atleast_2d(np.asarray(x, dtype=float)))
        if x.shape[1] != self.dim:
            raise ValueError("dimension mismatch")
        H = self.side_count
        idx = np.floor((x + 0.5) * H).astype(np.int64)
        idx = np.clip(idx, 0, H - 1)
        return np.ravel_multi_index(tuple(idx.T), (H,) * self.dim)


def grid_points(H, d):
    """The grid (1/H)Z^d inside [-1/2, 1/2)^d with unit weights.

    Coordinates are k/H with -1/2 <= k/H < 1/2, so H=2 gives {-1/2, 0} and
    H=3 gives {-1/3, 0, 1/3}.
    """
    _check_dim(d)
    if int(H) != H or H < 1:
        raise ValueError("H must be a positive integer")
    H = int(H)
    k = np.arange(-(H // 2), H - H // 2)
    axis = k / H
    mesh = np.meshgrid(*([axis] * d), indexing="ij")
    pts = np.stack([g.ravel() for g in mesh], axis=-1)
    return WeightedPointSet(pts, np.ones(pts.shape[0]), grid_H=H)


def cube_partition(H, d):
    return PartitionCells(d, H)


def jitter_generator(seed, replicate=0):
    """Counter-based generator keyed by (seed, replicate).

    Each cell consumes exactly one Philox block (four doubles), so the point of
    cell j depends only on (seed, replicate, j).
    """
    key = np.array([int(seed) & 0xFFFFFFFFFFFFFFFF, int(replicate) & 0xFFFFFFFFFFFFFFFF], dtype=np.uint64)
    return np.random.Philox(key=key)


def sample_jitter(cells, seed, replicate=0):
    """One uniform point in every cell, unit weights."""
    gen = np.random.Generator(jitter_generator(seed, replicate))
    u = gen.random((cells.N, 4))[:, : cells.dim]
    pts = cells.lower_corners + u * cells.side
    return WeightedPointSet(pts)


def sample_jitter_cell(cells, seed, j, replicate=0):
    """The point :func:`sample_jitter` puts in cell j, drawn on its own."""
    bg = jitter_generator(seed, replicate)
    bg.advance(int(j))
    u = np.random.Generator(bg).random(4)[: cells.dim]
    return wrap(cells.lower_corners[j] + u * cells.side)


def save_points(path, ps):
    """Write ``dim N`` then one ``x_1 .. x_d alpha`` row per point."""
    rows = np.column_stack([ps.points, ps.weights])
    with open(path, "w") as fh:
        fh.write(f"{ps.dim} {ps.N}\n")
        for row in rows:
            fh.write(" ".join(repr(float(v)) for v in row) + "\n")


def load_points(path):
    text = Path(path).read_text().split("\n")
    head = text[0].split()
    if len(head) != 2:
        raise ValueError("header must be 'dim N'")
    d, n = int(head[0]), int(head[1])
    body = [ln.split() for ln in text[1:] if ln.strip()]
    if len(body) != n:
        raise ValueError(f"header promises {n} points, found {len(body)}")
    arr = np.array([[float(v) for v in ln] for ln in body])
    if arr.shape[1] != d + 1:
        raise ValueError("each row must hold d coordinates and a weight")
    return WeightedPointSet(arr[:, :d], arr[:, d])
