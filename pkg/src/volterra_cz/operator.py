"""Forward and transpose application of Volterra operators, and the exact
discrete parabolic solve.

Off-support application integrates K(t, s) f(s) cell by cell with
Gauss-Legendre quadrature, doubling the order until two successive orders
agree; a one-cell buffer between t and supp f keeps the integrand smooth.
On-support values of the Green kernel come from the exponential integrator
in :func:`solve_parabolic`, which is exact for piecewise-constant data.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from . import _backend
from .dyadic import DyadicCube
from .kernels import GeneratorSpec, ModelScalarKernel, Semigroup, VolterraKernel
from .spaces import StepFunction

__all__ = [
    "OffSupportError", "QuadratureError", "ParabolicSolution",
    "apply_off_support", "apply_bad_part", "transpose_apply",
    "adjoint_pair", "adjoint_check", "solve_parabolic",
]

QUAD_TOL = 1e-11
MAX_ORDER = 256


class OffSupportError(ValueError):
    """Raised when the evaluation point is inside or adjacent to supp f."""


class QuadratureError(RuntimeError):
    """Raised when order doubling fails to converge (kernel under-resolved)."""


@functools.lru_cache(maxsize=None)
def _gauss_legendre(order: int):
    nodes, weights = np.polynomial.legendre.leggauss(order)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def _support_gap(f: StepFunction, t: float) -> float:
    """Distance from t to the union of nonzero cells (0 if inside one)."""
    cells = f.support_cells()
    if cells.size == 0:
        return math.inf
    h = f.grid.h
    lefts = cells * h
    rights = lefts + h
    return float(np.maximum(0.0, np.maximum(lefts - t, t - rights)).min())


def _require_off_support(f: StepFunction, t: float):
    gap = _support_gap(f, t)
    h = f.grid.h
    if gap < h * (1.0 - 1e-12):
        raise OffSupportError(
            f"t = {t!r} is within one grid cell (h = {h:g}) of supp f "
            f"(gap = {gap:g}); off-support application requires a one-cell buffer")


def _cell_quadrature(kernel: VolterraKernel, lefts: np.ndarray, h: float,
                     values: np.ndarray, t: float, transpose: bool = False,
                     shift: float | None = None) -> np.ndarray:
    """sum_i int_cell K(t,s) values_i ds by adaptive Gauss-Legendre.

    ``shift`` subtracts K(t, shift) from the integrand (bad-part formula);
    ``transpose`` integrates the adjoint kernel K(s, t)' instead.
    """
    m_out = kernel.domain.m if transpose else kernel.codomain.m
    if lefts.size == 0:
        return np.zeros(m_out)
    scalar_fast = (isinstance(kernel, ModelScalarKernel) and not transpose)
    prev = None
    order = 8
    while order <= MAX_ORDER:
        nodes, weights = _gauss_legendre(order)
        if scalar_fast:
            total = np.array([_backend.model_kernel_cell_sums(
                t, np.ascontiguousarray(lefts), h,
                np.ascontiguousarray(values[:, 0]),
                np.ascontiguousarray(nodes), np.ascontiguousarray(weights),
                math.nan if shift is None else float(shift))])
        else:
            s = (lefts[:, None] + (nodes[None, :] + 1.0) * (0.5 * h)).ravel()
            v = np.repeat(values, order, axis=0)
            if transpose:
                rows = kernel.apply_many_transposed(t, s, v)
            else:
                rows = kernel.apply_many(t, s, v)
                if shift is not None:
                    rows = rows - kernel.apply_many(
                        t, np.full(s.size, float(shift)), v)
            w = np.tile(weights, lefts.size)
            total = 0.5 * h * (w @ rows)
        if prev is not None and np.abs(total - prev).max() <= \
                QUAD_TOL * max(1.0, float(np.abs(total).max())):
            return total
        prev = total
        order *= 2
    raise QuadratureError(
        f"cell quadrature did not stabilize at order {MAX_ORDER} (t = {t!r})")


def apply_off_support(kernel: VolterraKernel, f: StepFunction, t: float) -> np.ndarray:
    """(Tf)(t) = int_0^t K(t,s) f(s) ds for t at least one cell away from supp f.

    Cells at or beyond t contribute nothing (causality); the result is the
    exact zero vector when t lies below the support.
    """
    if f.space.m != kernel.domain.m:
        raise ValueError(f"f has m={f.space.m}, kernel domain has m={kernel.domain.m}")
    _require_off_support(f, t)
    h = f.grid.h
    cells = f.support_cells()
    cells = cells[(cells + 1) * h <= t]
    if cells.size == 0:
        return np.zeros(kernel.codomain.m)
    return _cell_quadrature(kernel, cells * h, h, f.samples[cells], t)


def apply_bad_part(kernel: VolterraKernel, b: StepFunction, cube: DyadicCube,
                   t: float) -> np.ndarray:
    """Apply T to a mean-zero piece supported in a cube, for t outside the
    expanded cube: the mean-zero-shifted integral
    int_Q (K(t,s) - K(t,s_j)) b(s) ds for t > s_j, exactly 0 for t < s_j.
    """
    if kernel.domain.m != b.space.m:
        raise ValueError("dimension mismatch between kernel and bad part")
    h = b.grid.h
    sl = b.grid.cell_slice(cube)
    outside = np.array(b.samples)
    outside[sl] = 0.0
    if np.any(outside != 0.0):
        raise ValueError(f"bad part is not supported in {cube}")
    integral = b.samples[sl].sum(axis=0) * h
    scale = max(1.0, float(np.abs(b.samples).max(initial=0.0)))
    if np.abs(integral).max(initial=0.0) > 1e-12 * scale * max(1.0, float(cube.measure)):
        raise ValueError(f"bad part on {cube} is not mean-zero: int b = {integral}")
    expanded = cube.expand()
    if expanded.contains_point(t):
        raise OffSupportError(
            f"t = {t!r} lies inside the expanded cube {expanded}")
    center = float(cube.center)
    if t < center:
        return np.zeros(kernel.codomain.m)
    cells = np.arange(sl.start, sl.stop)
    nz = np.any(b.samples[cells] != 0.0, axis=1)
    cells = cells[nz]
    if cells.size == 0:
        return np.zeros(kernel.codomain.m)
    return _cell_quadrature(kernel, cells * h, h, b.samples[cells], t,
                            shift=center)


def transpose_apply(kernel: VolterraKernel, f: StepFunction, t: float) -> np.ndarray:
    """(T'f)(t) = int_t^inf K(s,t)' f(s) ds; exactly 0 above the support."""
    if f.space.m != kernel.codomain.m:
        raise ValueError(f"f has m={f.space.m}, kernel codomain has m={kernel.codomain.m}")
    if t <= 0:
        raise ValueError("transpose application requires t > 0")
    _require_off_support(f, t)
    h = f.grid.h
    cells = f.support_cells()
    cells = cells[cells * h >= t]
    if cells.size == 0:
        return np.zeros(kernel.domain.m)
    return _cell_quadrature(kernel, cells * h, h, f.samples[cells], t,
                            transpose=True)


def _paired_integral(apply_fn, against: StepFunction) -> float:
    """int <A(t), against(t)> dt by adaptive Gauss-Legendre on the cells of
    ``against``; A is evaluated pointwise through ``apply_fn``."""
    h = against.grid.h
    cells = against.support_cells()
    if cells.size == 0:
        return 0.0
    prev = None
    order = 8
    while order <= MAX_ORDER:
        nodes, weights = _gauss_legendre(order)
        total = 0.0
        for i in cells:
            ts = i * h + (nodes + 1.0) * (0.5 * h)
            vals = np.array([apply_fn(float(tt)) @ against.samples[i] for tt in ts])
            total += 0.5 * h * float(weights @ vals)
        if prev is not None and abs(total - prev) <= QUAD_TOL * max(1.0, abs(total)):
            return total
        prev = total
        order *= 2
    raise QuadratureError("pairing quadrature did not stabilize")


def adjoint_pair(kernel: VolterraKernel, g: StepFunction,
                 f: StepFunction) -> tuple[float, float]:
    """(<Tg, f>, <g, T'f>) for separated supports.

    The pairing is the time integral of the Euclidean inner product.  The
    supports must be at least one grid cell apart so both applications stay
    off-support.
    """
    if g.grid.h != f.grid.h:
        raise ValueError("g and f must share the grid resolution")
    gc, fc = g.support_cells(), f.support_cells()
    if gc.size and fc.size:
        lo = max(gc.min(), fc.min())
        hi = min(gc.max(), fc.max())
        if hi >= lo - 1:
            raise OffSupportError(
                "supports of g and f must be separated by at least one grid cell")
    lhs = _paired_integral(lambda t: apply_off_support(kernel, g, t), f)
    rhs = _paired_integral(lambda t: transpose_apply(kernel, f, t), g)
    return lhs, rhs


def adjoint_check(kernel: VolterraKernel, g: StepFunction, f: StepFunction) -> float:
    """|<Tg, f> - <g, T'f>| (duality identity defect).

    Contract: result <= 1e-10 * (1 + |<Tg, f>|).
    """
    lhs, rhs = adjoint_pair(kernel, g, f)
    return abs(lhs - rhs)


# ---------------------------------------------------------------------------
# exact parabolic solve

@dataclass
class ParabolicSolution:
    """Exact exponential-integrator solution of d_t u + A u = f, u(0) = 0.

    ``u`` holds the right-endpoint values u(t_{i+1}) per cell, ``du_dt`` and
    ``Au`` are cell averages, so du_dt + Au = f holds cell-wise to rounding.
    ``u_nodes`` stores all N+1 endpoint values for pointwise consumers.
    """

    u: StepFunction
    du_dt: StepFunction
    Au: StepFunction
    u_nodes: np.ndarray
    f: StepFunction
    generator: GeneratorSpec
    zero_modes: int

    def residual(self) -> float:
        """max cell-wise |du_dt + Au - f|."""
        res = self.du_dt.samples + self.Au.samples - self.f.samples
        return float(np.abs(res).max(initial=0.0))

    @property
    def Tf(self) -> StepFunction:
        """The singular part d_t u - f = -Au, as a step function."""
        return StepFunction(self.Au.grid, self.Au.space, -self.Au.samples)


def solve_parabolic(spec: GeneratorSpec, f: StepFunction) -> ParabolicSolution:
    """March u_{i+1} = E u_i + S f_i with E = e^{-hA}, S = int_0^h e^{-uA} du.

    Exact for piecewise-constant f (zero modes of A get their analytic
    limits).  Cell averages of u use D = int_0^h (h-u) e^{-uA} du, making
    the reported identity d_t u + A u = f exact up to rounding.
    """
    if f.space.m != spec.m:
        raise ValueError(f"f has spatial dimension {f.space.m}, spec has m={spec.m}")
    sg = Semigroup(spec.assemble())
    h = f.grid.h
    E, S, D = sg.step_matrices(h)
    N, m = f.grid.N, spec.m
    nodes = np.zeros((N + 1, m))
    ubar = np.zeros((N, m))
    for i in range(N):
        ubar[i] = (S @ nodes[i] + D @ f.samples[i]) / h
        nodes[i + 1] = E @ nodes[i] + S @ f.samples[i]
    du = np.diff(nodes, axis=0) / h
    Au = ubar @ sg.A.T
    return ParabolicSolution(
        u=StepFunction(f.grid, f.space, nodes[1:]),
        du_dt=StepFunction(f.grid, f.space, du),
        Au=StepFunction(f.grid, f.space, Au),
        u_nodes=nodes,
        f=f,
        generator=spec,
        zero_modes=sg.zero_modes)
