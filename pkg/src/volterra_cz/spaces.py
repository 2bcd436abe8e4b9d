"""Vector-valued step functions on dyadic time grids, and every norm they carry.

The spatial space is the finite-dimensional l^r space on R^m (1 < r <= inf),
which is reflexive for finite r and makes every norm below exactly
computable: Bochner L^p norms, the weak L^{1,inf} quasinorm, distribution
functions, and induced matrix operator norms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dyadic import DyadicCube

__all__ = [
    "SpatialSpace", "TimeGrid", "StepFunction", "NormInterval",
    "bochner_norm", "weak_l1_norm", "distribution_function",
    "induced_operator_norm", "lp_lr_norm", "row_norms",
    "write_step_function", "read_step_function", "sidecar_path",
]


def _validate_exponent(r, low_open=1.0):
    if r != math.inf and not r > low_open:
        raise ValueError(f"exponent must lie in ({low_open:g}, inf], got {r!r}")


def row_norms(values: np.ndarray, r: float) -> np.ndarray:
    """l^r norm of each row of an (N, m) array."""
    a = np.abs(np.atleast_2d(values))
    if r == math.inf:
        return a.max(axis=1)
    if r == 2.0:
        return np.linalg.norm(a, axis=1)
    if r == 1.0:
        return a.sum(axis=1)
    # scale by the row maximum so large r does not overflow
    mx = a.max(axis=1)
    out = np.zeros_like(mx)
    nz = mx > 0
    if np.any(nz):
        scaled = a[nz] / mx[nz, None]
        out[nz] = mx[nz] * np.power(np.power(scaled, r).sum(axis=1), 1.0 / r)
    return out


@dataclass(frozen=True)
class SpatialSpace:
    """l^r on R^m, the finite-dimensional stand-in for a reflexive range space."""

    m: int
    r: float = 2.0

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("spatial dimension m must be a positive integer")
        _validate_exponent(self.r)

    def norm(self, v) -> float:
        v = np.asarray(v, dtype=float).reshape(1, -1)
        if v.shape[1] != self.m:
            raise ValueError(f"expected vector of length {self.m}, got {v.shape[1]}")
        return float(row_norms(v, self.r)[0])

    def norms(self, values: np.ndarray) -> np.ndarray:
        return row_norms(values, self.r)


@dataclass(frozen=True)
class TimeGrid:
    """Uniform dyadic grid on (0, T]: N cells of width h = 2^n_min, cell i = (i h, (i+1) h]."""

    n_min: int
    N: int

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("cell count N must be positive")

    @property
    def h(self) -> float:
        return 2.0 ** self.n_min

    @property
    def T(self) -> float:
        return self.N * self.h

    def edges(self) -> np.ndarray:
        return np.arange(self.N + 1) * self.h

    def lefts(self) -> np.ndarray:
        return np.arange(self.N) * self.h

    def centers(self) -> np.ndarray:
        return (np.arange(self.N) + 0.5) * self.h

    def cell_slice(self, cube: DyadicCube) -> slice:
        """Grid cells covered by a dyadic cube at level >= n_min (clipped to the grid)."""
        j = cube.n - self.n_min
        if j < 0:
            raise ValueError(f"cube {cube} is finer than the grid (level {self.n_min})")
        start = cube.k << j
        return slice(min(start, self.N), min(start + (1 << j), self.N))

    def extended(self, n_cells: int) -> "TimeGrid":
        return TimeGrid(self.n_min, max(self.N, n_cells))


class StepFunction:
    """A piecewise-constant function (0, T] -> R^m on a dyadic grid.

    samples[i] is the value on cell i = (i h, (i+1) h]; the function is 0
    outside (0, T].  Values are frozen after construction, so instances are
    safe to share across workers.
    """

    __slots__ = ("grid", "space", "samples")

    def __init__(self, grid: TimeGrid, space: SpatialSpace, samples):
        samples = np.array(samples, dtype=float)
        if samples.ndim == 1:
            samples = samples[:, None]
        if samples.shape != (grid.N, space.m):
            raise ValueError(
                f"samples shape {samples.shape} does not match (N={grid.N}, m={space.m})")
        if not np.all(np.isfinite(samples)):
            raise ValueError("samples must be finite")
        samples.setflags(write=False)
        self.grid = grid
        self.space = space
        self.samples = samples

    @classmethod
    def zero(cls, grid: TimeGrid, space: SpatialSpace) -> "StepFunction":
        return cls(grid, space, np.zeros((grid.N, space.m)))

    def cell_norms(self) -> np.ndarray:
        """||f_i||_X per cell."""
        return self.space.norms(self.samples)

    def support_cells(self) -> np.ndarray:
        """Indices of cells where f is nonzero."""
        return np.nonzero(np.any(self.samples != 0.0, axis=1))[0]

    def support_measure(self) -> float:
        return len(self.support_cells()) * self.grid.h

    def with_samples(self, samples) -> "StepFunction":
        return StepFunction(self.grid, self.space, samples)

    def value_at(self, t: float) -> np.ndarray:
        """Value on the cell containing t (0 outside (0, T])."""
        if t <= 0.0 or t > self.grid.T:
            return np.zeros(self.space.m)
        i = min(int(np.ceil(t / self.grid.h)) - 1, self.grid.N - 1)
        return self.samples[i].copy()

    def __eq__(self, other):
        return (isinstance(other, StepFunction)
                and self.grid == other.grid and self.space == other.space
                and np.array_equal(self.samples, other.samples))

    def __repr__(self):
        return (f"StepFunction(N={self.grid.N}, h=2^{self.grid.n_min}, "
                f"m={self.space.m}, r={self.space.r})")


# ---------------------------------------------------------------------------
# norms

def lp_lr_norm(values: np.ndarray, h: float, p: float, r: float) -> float:
    """L^p(l^r) norm of the step function with the given cell values; exact."""
    if p < 1:
        raise ValueError(f"Bochner exponent p must be >= 1, got {p!r}")
    norms = row_norms(values, r)
    if p == math.inf:
        return float(norms.max(initial=0.0))
    if p == 1.0:
        return float(h * norms.sum())
    if p == 2.0:
        return float(math.sqrt(h) * np.linalg.norm(norms))
    mx = norms.max(initial=0.0)
    if mx == 0.0:
        return 0.0
    return float(mx * (h * np.power(norms / mx, p).sum()) ** (1.0 / p))


def bochner_norm(f: StepFunction, p: float) -> float:
    """||f||_{L^p((0,inf) -> X)}; exact for step functions.  Requires p >= 1."""
    return lp_lr_norm(f.samples, f.grid.h, p, f.space.r)


def weak_l1_norm(f: StepFunction) -> float:
    """sup_{lam>0} lam * |{t : ||f(t)||_X > lam}|.

    For a step function the supremum is attained in the left limit at one of
    the finitely many distinct values v of ||f||_X, where it equals
    v * |{||f||_X >= v}|; we maximize over that finite set.
    """
    return weak_l1_from_norms(f.cell_norms(), f.grid.h)


def weak_l1_from_norms(norms: np.ndarray, h: float) -> float:
    vals = np.sort(norms[norms > 0.0])
    if vals.size == 0:
        return 0.0
    # vals ascending: value vals[i] has measure h*(size - i) where it is the
    # smallest of the cells with ||f|| >= vals[i]
    counts = np.arange(vals.size, 0, -1)
    return float(np.max(vals * counts) * h)


def distribution_function(f: StepFunction, lam: float) -> float:
    """Lebesgue measure of {t : ||f(t)||_X > lam}; an exact multiple of h."""
    if lam <= 0:
        raise ValueError(f"level lam must be positive, got {lam!r}")
    return float(np.count_nonzero(f.cell_norms() > lam) * f.grid.h)


# ---------------------------------------------------------------------------
# induced matrix norms

@dataclass(frozen=True)
class NormInterval:
    """Certified enclosure [lower, upper] of an induced l^r -> l^r matrix norm."""

    lower: float
    upper: float

    def __post_init__(self):
        if not self.lower <= self.upper * (1 + 1e-12) + 1e-300:
            raise ValueError(f"invalid interval [{self.lower}, {self.upper}]")

    @property
    def degenerate(self) -> bool:
        return self.lower == self.upper

    def __iter__(self):
        yield self.lower
        yield self.upper


def _dual_vector(v: np.ndarray, s: float) -> np.ndarray:
    """w with <w, v> = ||v||_s and ||w||_{s'} = 1 (duality map in l^s)."""
    if s == math.inf:
        w = np.zeros_like(v)
        j = int(np.argmax(np.abs(v)))
        w[j] = math.copysign(1.0, v[j]) if v[j] != 0 else 1.0
        return w
    if s == 1.0:
        return np.sign(v) + (v == 0)
    nv = float(row_norms(v[None, :], s)[0])
    if nv == 0.0:
        w = np.zeros_like(v)
        w[0] = 1.0
        return w
    return np.sign(v) * np.power(np.abs(v) / nv, s - 1.0)


def _lr_ascent(A: np.ndarray, r: float, x0: np.ndarray, max_iter: int = 60) -> float:
    """Power-method ascent for ||A||_{r->r}; every iterate is a valid lower bound."""
    rp = r / (r - 1.0) if r != math.inf else 1.0
    x = x0 / max(float(row_norms(x0[None, :], r)[0]), 1e-300)
    best = 0.0
    for _ in range(max_iter):
        y = A @ x
        gamma = float(row_norms(y[None, :], r)[0])
        best = max(best, gamma)
        if gamma == 0.0:
            break
        z = A.T @ _dual_vector(y, r)
        nz = float(row_norms(z[None, :], rp)[0])
        if nz <= z @ x * (1.0 + 1e-14):
            break
        x = _dual_vector(z, rp)
    return best


def induced_operator_norm(A, r: float, samples: int = 32, seed: int = 0) -> NormInterval:
    """Induced l^r -> l^r norm of a square matrix as a certified interval.

    Exact (degenerate interval) for r in {1, 2, inf}: max column sum, largest
    singular value, max row sum.  Otherwise the lower endpoint comes from
    power-method ascent over randomly seeded unit vectors and the upper
    endpoint is the interpolation bound ||A||_1^{1/r} ||A||_inf^{1-1/r}.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix entries must be finite")
    if r < 1:
        raise ValueError(f"norm exponent r must be >= 1, got {r!r}")
    n1 = float(np.abs(A).sum(axis=0).max(initial=0.0))
    ninf = float(np.abs(A).sum(axis=1).max(initial=0.0))
    if r == 1.0:
        return NormInterval(n1, n1)
    if r == math.inf:
        return NormInterval(ninf, ninf)
    if r == 2.0:
        s = float(np.linalg.norm(A, 2))
        return NormInterval(s, s)
    upper = n1 ** (1.0 / r) * ninf ** (1.0 - 1.0 / r)
    m = A.shape[0]
    rng = np.random.default_rng(seed)
    starts = [np.ones(m), *np.eye(m)[: min(m, 8)], *rng.standard_normal((samples, m))]
    lower = max(_lr_ascent(A, r, x0) for x0 in starts)
    return NormInterval(min(lower, upper), upper)


# ---------------------------------------------------------------------------
# CSV serialization (header: cell_index,t_left,t_right,v_0,...,v_{m-1};
# grid metadata in a key=value sidecar)

def sidecar_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".meta")


def write_step_function(f: StepFunction, path) -> None:
    path = Path(path)
    cols = ",".join(f"v_{j}" for j in range(f.space.m))
    lines = [f"cell_index,t_left,t_right,{cols}"]
    edges = f.grid.edges()
    for i in range(f.grid.N):
        vals = ",".join(f"{v:.17g}" for v in f.samples[i])
        lines.append(f"{i},{edges[i]:.17g},{edges[i + 1]:.17g},{vals}")
    path.write_text("\n".join(lines) + "\n")
    r = "inf" if f.space.r == math.inf else f"{f.space.r:.17g}"
    sidecar_path(path).write_text(
        f"n_min={f.grid.n_min}\nN={f.grid.N}\nm={f.space.m}\nr={r}\n")


def read_step_function(path) -> StepFunction:
    path = Path(path)
    meta = {}
    for line in sidecar_path(path).read_text().splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            key, _, val = line.partition("=")
            meta[key.strip()] = val.strip()
    grid = TimeGrid(int(meta["n_min"]), int(meta["N"]))
    space = SpatialSpace(int(meta["m"]), float(meta["r"]))
    rows = path.read_text().splitlines()
    samples = np.zeros((grid.N, space.m))
    for row in rows[1:]:
        if not row.strip():
            continue
        parts = row.split(",")
        i = int(parts[0])
        samples[i] = [float(x) for x in parts[3:3 + space.m]]
    return StepFunction(grid, space, samples)
