"""Known-answer check corpus.

Every check pins a computable fact about the library to an independently
derived value: closed-form integrals, hand-run decompositions, spectral
suprema, duality identities.  The CLI ``selftest`` subcommand runs the whole
corpus; the pytest suite executes the same entries one by one.
"""

from __future__ import annotations

import math

import numpy as np
import scipy.integrate

from .czd import BadPart, cube_average, decompose, verify
from .dyadic import DyadicCube
from .experiments import (GeneratorSpec, TrialFamily, czd_stress,
                          estimate_strong_constant, estimate_weak_constant,
                          kernel_norm_scaling, maxreg_sweep)
from .kernels import (CallableKernel, CausalityError, GreensKernel,
                      heat_kernel_pointwise, model_scalar_kernel)
from .operator import (_paired_integral, adjoint_check, apply_bad_part,
                       apply_off_support, solve_parabolic, transpose_apply)
from .spaces import (SpatialSpace, StepFunction, TimeGrid, bochner_norm,
                     distribution_function, induced_operator_norm,
                     lp_lr_norm, weak_l1_norm)
from .validate import (SamplingPlan, hormander_integral_s,
                       parabolic_estimate_check, validate_holder_s,
                       validate_holder_t, validate_size)

CHECKS = []


def check(name):
    def deco(fn):
        CHECKS.append((name, fn))
        return fn
    return deco


def _close(got, want, tol, label=""):
    if not abs(got - want) <= tol:
        raise AssertionError(f"{label} got {got:.17g}, want {want:.17g} "
                             f"(tol {tol:g})")
    return f"{label}{got:.17g} vs {want:.17g}"


def _scalar_step(values, n_min=0, r=2.0):
    values = np.asarray(values, dtype=float)
    return StepFunction(TimeGrid(n_min, len(values)), SpatialSpace(1, r), values)


def random_matrix_kernel(seed=0, m=2):
    """Fixed-seed smooth matrix convolution kernel B/(t-s) + C e^{-(t-s)}."""
    rng = np.random.default_rng(seed)
    B = rng.normal(size=(m, m))
    C = rng.normal(size=(m, m))
    space = SpatialSpace(m, 2.0)
    return CallableKernel(
        lambda t, s: B / (t - s) + C * math.exp(-(t - s)),
        space, space, sigma=1.0, M=None, convolution=True,
        name=f"randmat[{seed}]")


# --------------------------------------------------------------------------
# Bochner norms

@check("bochner: zero function")
def _():
    f = _scalar_step([0, 0, 0, 0])
    return _close(bochner_norm(f, 2.0), 0.0, 0.0)


@check("bochner: constant with ||c||=3 on (0,2], p=2")
def _():
    grid = TimeGrid(0, 2)
    f = StepFunction(grid, SpatialSpace(2, 2.0), np.full((2, 2), 3 / math.sqrt(2)))
    return _close(bochner_norm(f, 2.0), 3.0 * math.sqrt(2.0), 1e-12)


@check("bochner: scalar 4 on (0,1], p=1")
def _():
    return _close(bochner_norm(_scalar_step([4.0]), 1.0), 4.0, 0.0)


@check("bochner: rejects p < 1")
def _():
    try:
        bochner_norm(_scalar_step([1.0]), 0.5)
    except ValueError:
        return "p=0.5 rejected"
    raise AssertionError("p < 1 accepted")


# --------------------------------------------------------------------------
# weak norm and distribution function

@check("weak-L1: zero function")
def _():
    return _close(weak_l1_norm(_scalar_step([0.0, 0.0])), 0.0, 0.0)


@check("weak-L1: 2 on (0,1], 1 on (1,3] -> 3")
def _():
    f = _scalar_step([2.0, 1.0, 1.0])
    return _close(weak_l1_norm(f), 3.0, 0.0)


@check("weak-L1: single level set c*L")
def _():
    f = _scalar_step([2.5] * 4)
    return _close(weak_l1_norm(f), 10.0, 1e-12)


@check("distribution function: three levels")
def _():
    f = _scalar_step([2.0, 1.0, 1.0])
    a = _close(distribution_function(f, 1.5), 1.0, 0.0, "lam=1.5: ")
    b = _close(distribution_function(f, 0.5), 3.0, 0.0, "lam=0.5: ")
    z = _close(distribution_function(_scalar_step([0.0]), 1.0), 0.0, 0.0, "zero: ")
    return "; ".join((a, b, z))


# --------------------------------------------------------------------------
# induced operator norms

@check("induced norm: identity is [1,1] for fractional r")
def _():
    iv = induced_operator_norm(np.eye(3), 1.7)
    _close(iv.lower, 1.0, 1e-12, "lower ")
    return _close(iv.upper, 1.0, 1e-12, "upper ")


@check("induced norm: nilpotent [[0,2],[0,0]] at r=2")
def _():
    iv = induced_operator_norm([[0.0, 2.0], [0.0, 0.0]], 2.0)
    return _close(iv.lower, 2.0, 1e-12)


@check("induced norm: shear at r=2 is the golden ratio")
def _():
    iv = induced_operator_norm([[1.0, 1.0], [0.0, 1.0]], 2.0)
    return _close(iv.lower, (1.0 + math.sqrt(5.0)) / 2.0, 1e-12)


@check("induced norm: shear interpolation upper bound is 2")
def _():
    iv = induced_operator_norm([[1.0, 1.0], [0.0, 1.0]], 3.0)
    _close(iv.upper, 2.0, 1e-12, "upper ")
    if not iv.lower <= iv.upper:
        raise AssertionError("interval inverted")
    return f"[{iv.lower:.17g}, {iv.upper:.17g}]"


# --------------------------------------------------------------------------
# dyadic cubes

@check("dyadic: parents")
def _():
    assert DyadicCube(0, 3).parent() == DyadicCube(1, 1)
    assert DyadicCube(0, 0).parent() == DyadicCube(1, 0)
    assert DyadicCube(-1, 0).parent().parent() == DyadicCube(1, 0)
    return "three parent identities"


@check("dyadic: children partition")
def _():
    assert DyadicCube(1, 0).children() == (DyadicCube(0, 0), DyadicCube(0, 1))
    assert DyadicCube(1, 1).children() == (DyadicCube(0, 2), DyadicCube(0, 3))
    grand = [c for child in DyadicCube(2, 0).children() for c in child.children()]
    assert [float(c.left) for c in grand] == [0.0, 1.0, 2.0, 3.0]
    total = sum(c.measure for c in grand)
    assert total == DyadicCube(2, 0).measure
    return "4 grandchildren partition (0,4]"


@check("dyadic: expanded cubes")
def _():
    e = DyadicCube(0, 0).expand()
    assert (float(e.left), float(e.right)) == (0.0, 1.5)
    e = DyadicCube(1, 1).expand()
    assert (float(e.left), float(e.right)) == (1.0, 5.0)
    e = DyadicCube(0, 1).expand()
    assert (float(e.left), float(e.right)) == (0.5, 2.5)
    return "(0,1.5], (1,5], (0.5,2.5]"


@check("dyadic: containment by integer arithmetic")
def _():
    assert DyadicCube(1, 0).contains(DyadicCube(0, 1))
    assert not DyadicCube(0, 0).contains(DyadicCube(0, 1))
    assert not DyadicCube(1, 1).contains(DyadicCube(0, 0))
    return "containment triple"


# --------------------------------------------------------------------------
# decomposition

def _worked_example():
    f = _scalar_step([4.0])  # 4 on (0,1], grid h=1
    return f, decompose(f, 1.0)


@check("cube averages: 4*1_(0,1] over (0,2] and (0,4]")
def _():
    f = _scalar_step([4.0])
    vec, nrm = cube_average(f, DyadicCube(1, 0))
    _close(vec[0], 2.0, 0.0, "vector ")
    _close(nrm, 2.0, 0.0, "norm ")
    _, nrm4 = cube_average(f, DyadicCube(2, 0))
    _close(nrm4, 1.0, 0.0, "coarser ")
    vec0, nrm0 = cube_average(_scalar_step([0.0, 0.0]), DyadicCube(1, 0))
    assert vec0[0] == 0.0 and nrm0 == 0.0
    return "averages 2, 1, 0"


@check("decompose: worked example selects (0,2] with g=2, b=(+2,-2)")
def _():
    f, d = _worked_example()
    assert [p.cube for p in d.parts] == [DyadicCube(1, 0)]
    assert np.allclose(d.good.samples[:, 0], [2.0, 2.0], atol=0)
    assert np.allclose(d.parts[0].b.samples[:, 0], [2.0, -2.0], atol=0)
    assert float(d.parts[0].center) == 1.0
    return "Q(1,0), g=2 on (0,2], b=(+2,-2)"


@check("decompose: bounded input yields no bad cubes")
def _():
    f = _scalar_step([0.5, -0.7, 0.2, 0.0])
    d = decompose(f, 1.0)
    assert not d.parts
    assert np.array_equal(d.good.samples, f.samples)
    return "g = f, empty bad list"


@check("decompose: zero function")
def _():
    d = decompose(_scalar_step([0.0, 0.0]), 1.0)
    assert not d.parts and not d.good.samples.any()
    return "empty decomposition"


@check("verify: worked example passes with the stated numbers")
def _():
    f, d = _worked_example()
    rep = verify(d, f, 1.0, r=2.0)
    assert rep.ok, rep.first_failure()
    _close(bochner_norm(d.good, 1.0), 4.0, 0.0, "||g||_1 ")
    _close(bochner_norm(d.good, math.inf), 2.0, 0.0, "||g||_inf ")
    part = d.parts[0]
    _close(float(part.b.samples.sum()), 0.0, 0.0, "int b ")
    _close(bochner_norm(part.b, 1.0), 4.0, 0.0, "int ||b|| ")
    return "properties (1)-(5) + selection bound"


@check("verify: vacuous for the zero function")
def _():
    f = _scalar_step([0.0, 0.0])
    rep = verify(decompose(f, 1.0), f, 1.0)
    assert rep.ok
    return "all pass vacuously"


@check("verify: shifted bad part fails mean-zero with witness")
def _():
    f, d = _worked_example()
    part = d.parts[0]
    d.parts[0] = BadPart(cube=part.cube,
                         b=part.b.with_samples(part.b.samples + 0.1),
                         center=part.center, average=part.average)
    rep = verify(d, f, 1.0)
    fail = rep.first_failure()
    assert fail is not None and fail.name == "bad_mean_zero"
    assert fail.witness == DyadicCube(1, 0)
    return f"detected: {fail.name} at {fail.witness}"


# --------------------------------------------------------------------------
# kernels

@check("model kernel: pointwise values and causality")
def _():
    k = model_scalar_kernel()
    _close(k.matrix(3.0, 1.0)[0, 0], 0.5, 0.0, "K(3,1) ")
    _close(k.matrix(2.0, 1.5)[0, 0], 2.0, 0.0, "K(2,1.5) ")
    try:
        k.matrix(1.0, 1.0)
    except CausalityError:
        return "values ok, s >= t rejected"
    raise AssertionError("causality violation accepted")


@check("heat kernel: pointwise formula values")
def _():
    want0 = -0.5 / math.sqrt(2.0 * math.pi)
    a = _close(heat_kernel_pointwise(1.0, 0.0, d=1), want0, 1e-16, "k(1,0) ")
    want1 = 0.5 * math.exp(-1.0) / math.sqrt(2.0 * math.pi)
    b = _close(heat_kernel_pointwise(1.0, 1.0, d=1), want1, 1e-16, "k(1,1) ")
    return f"{a}; {b}"


@check("heat kernel: integrates to zero over the line")
def _():
    val, _ = scipy.integrate.quad(
        lambda x: heat_kernel_pointwise(1.0, x, d=1), -np.inf, np.inf)
    a = _close(val, 0.0, 1e-8, "paper variant ")
    val2, _ = scipy.integrate.quad(
        lambda x: heat_kernel_pointwise(1.0, x, d=1, variant="standard"),
        -np.inf, np.inf)
    b = _close(val2, 0.0, 1e-8, "standard variant ")
    return f"{a}; {b}"


@check("heat kernel: rejects t <= 0")
def _():
    try:
        heat_kernel_pointwise(0.0, 1.0, d=1)
    except ValueError:
        return "t=0 rejected"
    raise AssertionError("t <= 0 accepted")


@check("green kernel: scalar semigroup value -e^{-1}")
def _():
    k = GreensKernel(GeneratorSpec.scalar(1.0))
    return _close(k.matrix(2.0, 1.0)[0, 0], -math.exp(-1.0), 1e-15)


@check("green kernel: zero generator gives the zero kernel")
def _():
    k = GreensKernel(GeneratorSpec.scalar(0.0))
    assert k.matrix(2.0, 1.0)[0, 0] == 0.0
    return "K == 0"


@check("green kernel: sup tau ||K(tau)|| = 1/e for symmetric generators")
def _():
    k = GreensKernel(GeneratorSpec.constant(12, bc="dirichlet"))
    got = validate_size(k).value
    return _close(got, 1.0 / math.e, 1e-6)


@check("green kernel: sup tau^2 ||dK(tau)|| = 4/e^2")
def _():
    k = GreensKernel(GeneratorSpec.constant(12, bc="dirichlet"))
    got = validate_size(k.time_derivative(), power=2.0).value
    return _close(got, 4.0 * math.exp(-2.0), 1e-5)


@check("size validator: model kernel constant is exactly 1")
def _():
    got = validate_size(model_scalar_kernel())
    assert not got.diverging
    return _close(got.value, 1.0, 0.0)


@check("size validator: (t-s)^{-3/2} kernel flagged divergent")
def _():
    space = SpatialSpace(1, 2.0)
    k = CallableKernel(lambda t, s: [[(t - s) ** -1.5]], space, space,
                       convolution=True, name="supersingular")
    got = validate_size(k, refine=False)
    assert got.diverging, "divergence not flagged"
    return f"flagged, sampled sup {got.value:.3e}"


@check("holder validator: model kernel constant 2, attained on the boundary")
def _():
    got = validate_holder_s(model_scalar_kernel())
    assert got.value <= 2.0 + 1e-9, got.value
    assert got.value >= 1.9, got.value
    return _close(got.value, 2.0, 1e-9)


@check("holder validators agree for convolution kernels")
def _():
    k = GreensKernel(GeneratorSpec.constant(3, bc="dirichlet"))
    vs = validate_holder_s(k).value
    vt = validate_holder_t(k).value
    return _close(vs, vt, 1e-9 * max(1.0, abs(vt)))


@check("holder validator: kernel constant in s has zero constant")
def _():
    space = SpatialSpace(1, 2.0)
    k = CallableKernel(lambda t, s: [[1.0]], space, space, M=1.0,
                       name="constant")
    got = validate_holder_s(k)
    return _close(got.value, 0.0, 0.0)


@check("hormander integral: ln 2, scale-invariant over six decades")
def _():
    k = model_scalar_kernel()
    out = []
    for delta in (1e-3, 1.0, 1e3):
        s0 = 2.0 * delta
        got = hormander_integral_s(k, s0 + delta, s0, tol=1e-7)
        _close(got.value, math.log(2.0), 1e-6, f"delta={delta:g}: ")
        out.append(f"{got.value:.12g}")
    return "ln2 at delta=1e-3,1,1e3: " + ", ".join(out)


@check("hormander integral: ln(3/2) on the other side")
def _():
    k = model_scalar_kernel()
    got = hormander_integral_s(k, 2.0, 3.0, tol=1e-7)
    return _close(got.value, math.log(1.5), 1e-6)


@check("hormander integral: constant kernel gives zero")
def _():
    space = SpatialSpace(1, 2.0)
    k = CallableKernel(lambda t, s: [[1.0]], space, space, M=1.0,
                       name="constant")
    got = hormander_integral_s(k, 2.0, 1.0, tol=1e-8)
    assert abs(got.value) <= 1e-8, got.value
    return f"value {got.value:.3e} (tail only)"


@check("parabolic estimate: bare exponent is unbounded like t^{-3/2}")
def _():
    rep = parabolic_estimate_check(1, 0, (0,), q=0.0)
    assert rep.small_t_slope_at_origin is not None
    _close(rep.small_t_slope_at_origin, -1.5, 0.1, "slope ")
    assert not rep.bounded
    return f"slope {rep.small_t_slope_at_origin:.4f}, unbounded as claimed"


@check("parabolic estimate: exponent 3/2 is bounded in d=1")
def _():
    rep = parabolic_estimate_check(1, 0, (0,), q=1.5)
    assert rep.bounded, rep.to_dict()
    # exact scale invariance |k|(t+x^2)^{3/2} = phi(x^2/t) reduces the scan
    # to the profile phi(u) = |u - 1/2| e^{-u} (1+u)^{3/2} / sqrt(2 pi)
    def phi(u):
        return abs(u - 0.5) * math.exp(-u) * (1.0 + u) ** 1.5 \
            / math.sqrt(2.0 * math.pi)
    grid_us = [0.0] + [2.0 ** k for k in range(-36, 37)]
    want = max(phi(u) for u in grid_us)
    _close(rep.sup_value, want, 1e-5 * want, "sup ")
    dense = max(phi(u) for u in np.linspace(0.0, 40.0, 400001))
    assert rep.sup_value <= dense * (1.0 + 1e-9)
    return f"bounded, sup {rep.sup_value:.8f} (ray bound {dense:.8f})"


@check("parabolic estimate: decays along fixed x for q=0")
def _():
    rep = parabolic_estimate_check(1, 0, (0,), q=0.0)
    assert rep.decay_at_fixed_x
    return "weighted value decays at x=1 as t grows"


# --------------------------------------------------------------------------
# operator application

@check("apply: model kernel on 1_(0,1] at t=2 and t=3")
def _():
    k = model_scalar_kernel()
    f = _scalar_step([1.0])
    a = _close(apply_off_support(k, f, 2.0)[0], math.log(2.0), 1e-10, "t=2 ")
    b = _close(apply_off_support(k, f, 3.0)[0], math.log(1.5), 1e-10, "t=3 ")
    return f"{a}; {b}"


@check("apply: exact zero below the support")
def _():
    k = model_scalar_kernel()
    f = StepFunction(TimeGrid(0, 4), SpatialSpace(1, 2.0), [0, 0, 1.0, 0])
    assert apply_off_support(k, f, 1.0)[0] == 0.0
    return "causality zero is exact"


@check("apply bad part: worked example at t=4 is -2 ln(9/8)")
def _():
    f, d = _worked_example()
    part = d.parts[0]
    got = apply_bad_part(model_scalar_kernel(), part.b, part.cube, 4.0)[0]
    return _close(got, -2.0 * math.log(9.0 / 8.0), 1e-10)


@check("apply bad part: shifted and unshifted quadratures agree")
def _():
    f, d = _worked_example()
    part = d.parts[0]
    k = model_scalar_kernel()
    shifted = apply_bad_part(k, part.b, part.cube, 4.0)[0]
    unshifted = apply_off_support(k, part.b, 4.0)[0]
    return _close(shifted, unshifted, 1e-10, "mean-zero cancellation ")


@check("apply bad part: exact zero before the center")
def _():
    grid = TimeGrid(-1, 8)  # h = 1/2, T = 4
    vals = np.zeros((8, 1))
    vals[4, 0], vals[5, 0] = 1.0, -1.0  # mean-zero on (2,3] = Q(0,2)
    b = StepFunction(grid, SpatialSpace(1, 2.0), vals)
    got = apply_bad_part(model_scalar_kernel(), b, DyadicCube(0, 2), 1.0)
    assert got[0] == 0.0
    return "t < s_j gives the exact zero vector"


@check("solve: scalar relaxation reaches 1 - e^{-1}")
def _():
    spec = GeneratorSpec.scalar(1.0)
    grid = TimeGrid(-6, 64)  # T = 1
    f = StepFunction(grid, SpatialSpace(1, 2.0), np.ones((64, 1)))
    sol = solve_parabolic(spec, f)
    _close(sol.residual(), 0.0, 1e-12, "residual ")
    return _close(sol.u_nodes[-1, 0], 1.0 - math.exp(-1.0), 1e-12, "u(1) ")


@check("solve: zero data gives the zero solution")
def _():
    spec = GeneratorSpec.constant(4, bc="dirichlet")
    grid = TimeGrid(-4, 16)
    f = StepFunction.zero(grid, SpatialSpace(4, 2.0))
    sol = solve_parabolic(spec, f)
    assert not sol.u.samples.any() and not sol.Au.samples.any()
    return "u == 0, Au == 0"


@check("solve: zero generator integrates the data")
def _():
    spec = GeneratorSpec.scalar(0.0)
    grid = TimeGrid(-4, 32)
    f = StepFunction(grid, SpatialSpace(1, 2.0), np.full((32, 1), 3.0))
    sol = solve_parabolic(spec, f)
    _close(sol.u_nodes[-1, 0], 3.0 * grid.T, 1e-14, "u(T) ")
    assert np.abs(sol.Tf.samples).max() == 0.0
    return "u = c t, Tf = 0"


@check("transpose: model kernel on 1_(2,3] at t=1")
def _():
    k = model_scalar_kernel()
    grid = TimeGrid(0, 3)
    f = StepFunction(grid, SpatialSpace(1, 2.0), [0.0, 0.0, 1.0])
    got = transpose_apply(k, f, 1.0)[0]
    return _close(got, math.log(2.0), 1e-10)


@check("transpose: exact zero above the support")
def _():
    k = model_scalar_kernel()
    grid = TimeGrid(0, 3)
    f = StepFunction(grid, SpatialSpace(1, 2.0), [1.0, 0.0, 0.0])
    assert transpose_apply(k, f, 2.5)[0] == 0.0
    return "anti-causality zero is exact"


@check("transpose: matches the reversed transposed kernel")
def _():
    k = random_matrix_kernel(seed=3, m=2)
    grid = TimeGrid(-2, 16)  # T = 4
    rng = np.random.default_rng(11)
    vals = np.zeros((16, 2))
    vals[8:12] = rng.normal(size=(4, 2))
    f = StepFunction(grid, SpatialSpace(2, 2.0), vals)
    t = 1.0
    direct = transpose_apply(k, f, t)
    c = grid.T
    rev = StepFunction(grid, f.space, f.samples[::-1])
    k_rev = CallableKernel(
        lambda tt, ss: np.asarray(k._fn(c - ss, c - tt)).T,
        k.domain, k.codomain, convolution=True, name="reversed")
    equivalent = apply_off_support(k_rev, rev, c - t)
    err = float(np.abs(direct - equivalent).max())
    assert err <= 1e-10, err
    return f"max component difference {err:.2e}"


@check("adjoint: closed-form pairing 3ln3 - 4ln2")
def _():
    k = model_scalar_kernel()
    grid = TimeGrid(0, 3)
    g = StepFunction(grid, SpatialSpace(1, 2.0), [1.0, 0.0, 0.0])
    f = StepFunction(grid, SpatialSpace(1, 2.0), [0.0, 0.0, 1.0])
    disc = adjoint_check(k, g, f)
    pairing = _paired_integral(lambda t: apply_off_support(k, g, t), f)
    want = 3.0 * math.log(3.0) - 4.0 * math.log(2.0)
    _close(pairing, want, 1e-10, "<Tg,f> ")
    assert disc <= 1e-10 * (1.0 + abs(pairing)), disc
    return f"pairing {pairing:.12f}, discrepancy {disc:.2e}"


@check("adjoint: zero inputs give zero discrepancy")
def _():
    k = model_scalar_kernel()
    grid = TimeGrid(0, 3)
    g = StepFunction.zero(grid, SpatialSpace(1, 2.0))
    f = StepFunction(grid, SpatialSpace(1, 2.0), [0.0, 0.0, 1.0])
    return _close(adjoint_check(k, g, f), 0.0, 0.0)


@check("adjoint: random matrix kernel obeys duality")
def _():
    k = random_matrix_kernel(seed=7, m=2)
    grid = TimeGrid(-2, 16)
    rng = np.random.default_rng(5)
    gv = np.zeros((16, 2))
    gv[0:4] = rng.normal(size=(4, 2))
    fv = np.zeros((16, 2))
    fv[9:13] = rng.normal(size=(4, 2))
    g = StepFunction(grid, SpatialSpace(2, 2.0), gv)
    f = StepFunction(grid, SpatialSpace(2, 2.0), fv)
    disc = adjoint_check(k, g, f)
    assert disc <= 1e-10, disc
    return f"discrepancy {disc:.2e}"


# --------------------------------------------------------------------------
# experiments

@check("strong constant: kernel-mode input gives ratio 1")
def _():
    spec = GeneratorSpec.constant(4, bc="periodic")  # constants are in ker A
    grid = TimeGrid(-5, 32)
    phi = np.sin(2 * math.pi * grid.centers())
    f = StepFunction(grid, SpatialSpace(4, 2.0),
                     np.outer(phi, np.full(4, 0.5)))
    sol = solve_parabolic(spec, f)
    h = grid.h
    num = lp_lr_norm(sol.du_dt.samples, h, 2, 2) + lp_lr_norm(sol.Au.samples, h, 2, 2)
    got = num / lp_lr_norm(f.samples, h, 2, 2)
    return _close(got, 1.0, 1e-10)


@check("strong constant: energy bound at p=r=2")
def _():
    spec = GeneratorSpec.constant(6, bc="dirichlet")
    fam = TrialFamily("oscillatory", seed=3, count=20)
    got = estimate_strong_constant(spec, 2.0, 2.0, fam, grid=TimeGrid(-7, 128))
    assert got <= 2.0 + 1e-9, got
    return f"constant {got:.12f} <= 2"


@check("weak constant: spike response is finite and positive")
def _():
    spec = GeneratorSpec.scalar(5.0)
    fam = TrialFamily("spikes", seed=1, count=5,
                      params={"mass": 1.0, "width_cells": 1})
    got = estimate_weak_constant(spec, fam, grid=TimeGrid(-8, 256))
    assert 0.0 < got < math.inf, got
    return f"weak constant {got:.12f}"


@check("czd stress: 50 seeds x 3 scales all pass")
def _():
    summary = czd_stress(range(50), (0.1, 0.5, 2.0), N=128)
    assert summary.ok, summary.first_failure
    return f"{summary.passes}/{summary.runs} pass"


@check("czd stress: injected faults are all detected")
def _():
    summary = czd_stress(range(25), (0.1, 0.5, 2.0), N=64, mutate=True)
    assert summary.ok, summary.first_failure
    return f"{summary.passes}/{summary.runs} faults detected"


@check("sweep: single (2,2) entry respects the energy bound")
def _():
    spec = GeneratorSpec.constant(6, bc="dirichlet")
    fam = TrialFamily("oscillatory", seed=2, count=10)
    rep = maxreg_sweep(spec, [2.0], [2.0], fam, refinements=(64,))
    e = rep.entry(2.0, 2.0, 64)
    assert e["constant"] <= 2.0 + 1e-9
    assert e["base_B"] <= 1.0 + 1e-9
    return f"C(2,2) = {e['constant']:.12f}, B = {e['base_B']:.12f}"


@check("kernel decay: log-log slopes -1 and -2 in the resolved window")
def _():
    fit = kernel_norm_scaling()
    _close(fit.slope_kernel, -1.0, 0.05, "||K|| slope ")
    _close(fit.slope_derivative, -2.0, 0.05, "||dK|| slope ")
    return f"slopes {fit.slope_kernel:.4f}, {fit.slope_derivative:.4f}"


# --------------------------------------------------------------------------
# runner

def run(stream=None, name_filter: str = "") -> tuple[int, int]:
    """Run the known-answer checks (optionally a substring-filtered subset);
    returns (passes, failures)."""
    passes = failures = 0
    for name, fn in CHECKS:
        if name_filter and name_filter.lower() not in name.lower():
            continue
        try:
            detail = fn() or ""
            passes += 1
            line = f"PASS  {name}" + (f"  [{detail}]" if detail else "")
        except Exception as exc:  # report and continue
            failures += 1
            line = f"FAIL  {name}  [{exc}]"
        if stream is not None:
            print(line, file=stream)
    return passes, failures
