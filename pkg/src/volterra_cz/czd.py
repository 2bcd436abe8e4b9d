"""Calderon-Zygmund decomposition f = g + sum_j b_j at level alpha on (0, inf).

Selection is the top-down stopping time over the dyadic tree: starting from
the smallest level at which every cube meeting supp f has norm-average
<= alpha, descend and select each child whose norm-average exceeds alpha
(strictly; ties are good).  Selected cubes are exactly the maximal bad
dyadic cubes, they are pairwise disjoint by nesting, and their norm-average
lies in (alpha, 2 alpha].

On each selected cube Q_j the bad part is b_j = (f - avg_Q f) 1_Q (vector
average) and the good part is that average; outside the cubes g = f.  The
badness test uses the scalar norm-average while b_j subtracts the vector
average.  Selected cubes may extend past the support of f, so the output
lives on a grid extended to cover them (f is zero on the extension).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import _backend
from .dyadic import DyadicCube
from .spaces import SpatialSpace, StepFunction, TimeGrid, lp_lr_norm

__all__ = [
    "BadPart", "CZDecomposition", "PropertyCheck", "PropertyReport",
    "cube_average", "decompose", "verify",
]


@dataclass(frozen=True)
class BadPart:
    """One selected cube with its mean-zero piece and bookkeeping values."""

    cube: DyadicCube
    b: StepFunction
    center: Fraction            # s_j, the cube midpoint
    average: np.ndarray         # vector average of f over the cube


@dataclass
class CZDecomposition:
    alpha: float
    good: StepFunction
    parts: list[BadPart]

    @property
    def cubes(self) -> list[DyadicCube]:
        return [p.cube for p in self.parts]

    def bad_sum(self) -> StepFunction:
        total = np.zeros_like(self.good.samples)
        for p in self.parts:
            total = total + p.b.samples
        return StepFunction(self.good.grid, self.good.space, total)

    def reconstruction(self) -> StepFunction:
        return StepFunction(self.good.grid, self.good.space,
                            self.good.samples + self.bad_sum().samples)


def _extend_to_grid(f: StepFunction, grid: TimeGrid) -> StepFunction:
    if grid.N == f.grid.N:
        return f
    samples = np.zeros((grid.N, f.space.m))
    samples[: f.grid.N] = f.samples
    return StepFunction(grid, f.space, samples)


def cube_average(f: StepFunction, cube: DyadicCube):
    """Vector and scalar-norm averages of f over a dyadic cube.

    Returns ``(vector_avg, norm_avg)`` where the vector average is
    (1/|Q|) int_Q f and the norm average is (1/|Q|) int_Q ||f||_X.  Both are
    exact finite sums because the cube is no finer than the grid (cells
    outside the grid contribute zero).
    """
    if cube.n < f.grid.n_min:
        raise ValueError(
            f"cube {cube} is finer than the grid resolution 2^{f.grid.n_min}")
    sl = f.grid.cell_slice(cube)
    h = f.grid.h
    measure = float(cube.measure)
    vec = f.samples[sl].sum(axis=0) * h / measure
    nrm = float(f.cell_norms()[sl].sum() * h / measure)
    return vec, nrm


def decompose(f: StepFunction, alpha: float) -> CZDecomposition:
    """Decompose f at level alpha > 0 into good and bad parts."""
    if not alpha > 0:
        raise ValueError(f"decomposition level alpha must be positive, got {alpha!r}")
    h = f.grid.h
    cell_integrals = np.ascontiguousarray(f.cell_norms() * h)
    levels, indices = _backend.select_bad_cubes(cell_integrals, h, float(alpha))

    cubes = [DyadicCube(f.grid.n_min + int(j), int(k))
             for j, k in zip(levels, indices)]
    n_ext = f.grid.N
    for j, k in zip(levels, indices):
        n_ext = max(n_ext, (int(k) + 1) << int(j))
    grid = f.grid.extended(n_ext)
    f_ext = _extend_to_grid(f, grid)

    g = np.array(f_ext.samples)
    parts = []
    for cube in cubes:
        sl = grid.cell_slice(cube)
        avg = f_ext.samples[sl].sum(axis=0) * h / float(cube.measure)
        b = np.zeros_like(g)
        b[sl] = f_ext.samples[sl] - avg
        g[sl] = avg
        parts.append(BadPart(cube=cube,
                             b=StepFunction(grid, f.space, b),
                             center=cube.center,
                             average=avg))
    return CZDecomposition(alpha=float(alpha),
                           good=StepFunction(grid, f.space, g),
                           parts=parts)


# ---------------------------------------------------------------------------
# verification

@dataclass(frozen=True)
class PropertyCheck:
    name: str
    passed: bool
    detail: str
    witness: DyadicCube | None = None

    def to_dict(self):
        d = {"name": self.name, "passed": self.passed, "detail": self.detail}
        if self.witness is not None:
            d["witness"] = str(self.witness)
        return d


@dataclass
class PropertyReport:
    checks: list[PropertyCheck] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[PropertyCheck]:
        return [c for c in self.checks if not c.passed]

    def first_failure(self) -> PropertyCheck | None:
        bad = self.failures()
        return bad[0] if bad else None

    def to_dict(self):
        return {"ok": self.ok, "checks": [c.to_dict() for c in self.checks]}


def verify(d: CZDecomposition, f: StepFunction, alpha: float, r: float = 2.0,
           tol: float = 1e-12) -> PropertyReport:
    """Check the five decomposition properties plus the selection bound.

    Properties, checked to tolerance ``tol`` scaled by the data magnitude:
      1. ||g||_L1 <= ||f||_L1 and ||g||_Linf <= 2 alpha;
      2. the b_j are supported in pairwise-disjoint dyadic cubes;
      3. int_{Q_j} b_j = 0 (vector) and int_{Q_j} ||b_j|| <= 4 alpha |Q_j|;
      4. sum_j |Q_j| <= ||f||_L1 / alpha;
      5. int ||sum_{j=k..l} b_j||^r <= 2^r int_{union Q_j, j=k..l} ||f||^r
         for every contiguous index range (the parts have disjoint supports,
         so ranges reduce to prefix sums);
      plus: alpha < norm-average <= 2 alpha on every selected cube.

    Failures are reported with the violated property and a witness cube.
    """
    grid = d.good.grid
    h = grid.h
    f = _extend_to_grid(f, grid)
    space = f.space
    checks: list[PropertyCheck] = []
    fl1 = lp_lr_norm(f.samples, h, 1.0, space.r)
    scale = max(1.0, float(f.cell_norms().max(initial=0.0)), alpha)

    # (1) good-part bounds
    gl1 = lp_lr_norm(d.good.samples, h, 1.0, space.r)
    glinf = lp_lr_norm(d.good.samples, h, np.inf, space.r)
    checks.append(PropertyCheck(
        "good_l1", gl1 <= fl1 + tol * scale,
        f"||g||_1 = {gl1:.17g} vs ||f||_1 = {fl1:.17g}"))
    checks.append(PropertyCheck(
        "good_linf", glinf <= 2.0 * alpha + tol * scale,
        f"||g||_inf = {glinf:.17g} vs 2*alpha = {2.0 * alpha:.17g}"))

    # (2) disjoint dyadic supports
    disjoint_ok, disjoint_witness = True, None
    order = sorted(range(len(d.parts)), key=lambda i: d.parts[i].cube.left)
    for a, bidx in zip(order, order[1:]):
        ca, cb = d.parts[a].cube, d.parts[bidx].cube
        if ca.right > cb.left:
            disjoint_ok, disjoint_witness = False, cb
            break
    support_ok, support_witness = True, None
    for p in d.parts:
        sl = grid.cell_slice(p.cube)
        outside = np.array(p.b.samples)
        outside[sl] = 0.0
        if np.any(outside != 0.0):
            support_ok, support_witness = False, p.cube
            break
    checks.append(PropertyCheck(
        "disjoint_cubes", disjoint_ok,
        "selected cubes pairwise disjoint" if disjoint_ok else "overlapping cubes",
        disjoint_witness))
    checks.append(PropertyCheck(
        "bad_supported_in_cube", support_ok,
        "each b_j vanishes outside its cube" if support_ok else "support leaks cube",
        support_witness))

    # (3) mean zero and L1 size of each bad part
    mz_ok, mz_witness, mz_worst = True, None, 0.0
    sz_ok, sz_witness = True, None
    for p in d.parts:
        sl = grid.cell_slice(p.cube)
        integral = p.b.samples[sl].sum(axis=0) * h
        dev = float(np.abs(integral).max(initial=0.0))
        if dev > mz_worst:
            mz_worst = dev
        if dev > tol * scale * max(1.0, float(p.cube.measure)) and mz_ok:
            mz_ok, mz_witness = False, p.cube
        bl1 = float(space.norms(p.b.samples[sl]).sum() * h)
        if bl1 > 4.0 * alpha * float(p.cube.measure) + tol * scale and sz_ok:
            sz_ok, sz_witness = False, p.cube
    checks.append(PropertyCheck(
        "bad_mean_zero", mz_ok,
        f"max |int b_j| component = {mz_worst:.3e}", mz_witness))
    checks.append(PropertyCheck(
        "bad_l1_bound", sz_ok,
        "int ||b_j|| <= 4 alpha |Q_j| on every cube" if sz_ok else
        "bad part too large in L1", sz_witness))

    # (4) total measure of the bad cubes
    total_measure = float(sum((p.cube.measure for p in d.parts), Fraction(0)))
    checks.append(PropertyCheck(
        "cube_measure_bound",
        total_measure <= fl1 / alpha + tol * scale,
        f"sum |Q_j| = {total_measure:.17g} vs ||f||_1/alpha = {fl1 / alpha:.17g}"))

    # (5) L^r control of contiguous partial sums; disjoint supports reduce
    # every range [k, l] to a difference of prefix sums
    range_ok, range_witness, worst_gap = True, None, 0.0
    if d.parts:
        fnorm_r = space.norms(f.samples) ** r
        lhs = np.empty(len(d.parts))
        rhs = np.empty(len(d.parts))
        for i in order:
            sl = grid.cell_slice(d.parts[i].cube)
            lhs[i] = (space.norms(d.parts[i].b.samples[sl]) ** r).sum() * h
            rhs[i] = (2.0 ** r) * fnorm_r[sl].sum() * h
        diff = np.concatenate(([0.0], np.cumsum(rhs[order] - lhs[order])))
        run_max, margin, arg = 0.0, np.inf, 0
        for l in range(1, len(diff)):
            run_max = max(run_max, diff[l - 1])
            if diff[l] - run_max < margin:
                margin, arg = diff[l] - run_max, l - 1
        rscale = max(1.0, float(rhs.max(initial=0.0)))
        if margin < -tol * rscale:
            range_ok, range_witness, worst_gap = False, d.parts[order[arg]].cube, margin
    checks.append(PropertyCheck(
        "partial_sum_lr", range_ok,
        "int ||sum b_j||^r <= 2^r int_{union Q_j} ||f||^r on all ranges"
        if range_ok else f"range bound violated by {worst_gap:.3e}", range_witness))

    # selection bound alpha < avg <= 2 alpha
    sel_ok, sel_witness, sel_detail = True, None, "all cube norm-averages in (alpha, 2*alpha]"
    for p in d.parts:
        _, nrm = cube_average(f, p.cube)
        if not (nrm > alpha - tol * scale and nrm <= 2.0 * alpha + tol * scale):
            sel_ok, sel_witness = False, p.cube
            sel_detail = f"norm-average {nrm:.17g} outside (alpha, 2*alpha]"
            break
    checks.append(PropertyCheck("selection_bound", sel_ok, sel_detail, sel_witness))
    return PropertyReport(checks)
