import math

import numpy as np
import pytest

from volterra_cz import (CallableKernel, GeneratorSpec, GreensKernel,
                         SamplingPlan, SpatialSpace, hormander_integral_s,
                         hormander_integral_t, model_scalar_kernel,
                         parabolic_estimate_check, validate_holder_s,
                         validate_holder_t, validate_size)

SPACE1 = SpatialSpace(1, 2.0)


def power_kernel(exponent, M=None):
    return CallableKernel(lambda t, s: [[(t - s) ** exponent]], SPACE1, SPACE1,
                          convolution=True, M=M, name=f"pow{exponent}")


class TestSamplingPlan:
    def test_default_covers_twelve_decades(self):
        plan = SamplingPlan()
        assert plan.decades == pytest.approx(12.04, abs=0.1)
        taus = plan.taus()
        assert taus[0] == 2.0 ** -20 and taus[-1] == 2.0 ** 20

    def test_narrow_plan_rejected_by_validator(self):
        plan = SamplingPlan(tau_min=0.1, tau_max=10.0)
        with pytest.raises(ValueError):
            validate_size(model_scalar_kernel(), plan)

    def test_invalid_bounds(self):
        with pytest.raises(ValueError):
            SamplingPlan(tau_min=1.0, tau_max=0.5)


class TestValidateSize:
    def test_model_kernel_exactly_one(self):
        res = validate_size(model_scalar_kernel())
        assert res.value == 1.0
        assert not res.diverging

    def test_green_kernel_attains_inverse_e(self):
        k = GreensKernel(GeneratorSpec.random_elliptic(10, Lam=3.0, seed=5))
        res = validate_size(k)
        assert res.value == pytest.approx(1.0 / math.e, abs=1e-6)

    def test_derivative_power_two(self):
        k = GreensKernel(GeneratorSpec.constant(10, bc="dirichlet"))
        res = validate_size(k.time_derivative(), power=2.0)
        assert res.value == pytest.approx(4.0 * math.exp(-2.0), abs=1e-5)

    def test_divergence_toward_small_separations(self):
        res = validate_size(power_kernel(-1.5), refine=False)
        assert res.diverging
        assert res.trend["s=1"]["low"]

    def test_divergence_toward_large_separations(self):
        res = validate_size(power_kernel(-0.5), refine=False)
        assert res.diverging
        assert res.trend["s=1"]["high"]

    def test_integrable_kernel_not_flagged(self):
        k = CallableKernel(lambda t, s: [[math.exp(-(t - s)) / (t - s)]],
                           SPACE1, SPACE1, convolution=True, name="damped")
        res = validate_size(k, refine=False)
        assert not res.diverging
        assert res.value <= 1.0 + 1e-12


class TestValidateHolder:
    def test_model_constant_two_on_boundary(self):
        res = validate_holder_s(model_scalar_kernel())
        assert 1.9 <= res.value <= 2.0 + 1e-9
        t, s, s0 = res.argmax
        assert (t - s0) == pytest.approx(2.0 * abs(s - s0), rel=1e-12)

    def test_model_t_side_matches_s_side(self):
        vs = validate_holder_s(model_scalar_kernel()).value
        vt = validate_holder_t(model_scalar_kernel()).value
        assert vs == pytest.approx(vt, rel=1e-12)

    def test_wrong_sigma_metadata_diverges(self):
        # sqrt kernel is 1/2-Holder; claiming sigma = 1 must blow up
        space = SPACE1
        k = CallableKernel(lambda t, s: [[math.sqrt(abs(t - s)) / (t - s)]],
                           space, space, sigma=1.0, convolution=True)
        res = validate_holder_s(k)
        assert res.diverging


class TestHormander:
    def test_model_closed_forms(self):
        k = model_scalar_kernel()
        got = hormander_integral_s(k, 3.0, 2.0, tol=1e-8)
        assert got.value == pytest.approx(math.log(2.0), abs=1e-7)
        got = hormander_integral_s(k, 2.0, 3.0, tol=1e-8)
        assert got.value == pytest.approx(math.log(1.5), abs=1e-7)

    def test_scale_invariance(self):
        k = model_scalar_kernel()
        vals = []
        for delta in (1e-3, 1.0, 1e3):
            s0 = 2.0 * delta
            vals.append(hormander_integral_s(k, s0 + delta, s0, tol=1e-9).value)
        assert max(vals) - min(vals) <= 2e-9

    def test_tail_is_certified_remainder(self):
        k = model_scalar_kernel()
        res = hormander_integral_s(k, 3.0, 2.0, tol=1e-6)
        assert 0 < res.tail <= 5e-7
        assert res.value >= math.log(2.0) - 1e-9

    def test_t_side_consistent_with_s_side_for_convolutions(self):
        # for K(t-s), the s-integral over (0, t0-2delta] approaches the
        # infinite-domain value as t0 grows
        k = model_scalar_kernel()
        got = hormander_integral_t(k, 1e6 - 1.0, 1e6, tol=1e-8)
        assert got.value == pytest.approx(math.log(2.0), abs=1e-4)
        got = hormander_integral_t(k, 1e6 + 1.0, 1e6, tol=1e-8)
        assert got.value == pytest.approx(math.log(1.5), abs=1e-4)

    def test_degenerate_domain_is_zero(self):
        k = model_scalar_kernel()
        res = hormander_integral_t(k, 1.5, 1.0, tol=1e-8)  # t0 - 2 delta <= 0
        assert res.value == 0.0

    def test_input_validation(self):
        k = model_scalar_kernel()
        with pytest.raises(ValueError):
            hormander_integral_s(k, 1.0, 1.0)
        with pytest.raises(ValueError):
            hormander_integral_s(k, -1.0, 1.0)


class TestParabolicCheck:
    def test_rejects_high_order(self):
        with pytest.raises(ValueError):
            parabolic_estimate_check(1, 2, (1,), q=0.0)

    def test_bare_exponent_unbounded(self):
        rep = parabolic_estimate_check(1, 0, (0,), q=0.0)
        assert rep.small_t_slope_at_origin == pytest.approx(-1.5, abs=0.1)
        assert not rep.bounded

    def test_scaling_complete_exponent_bounded(self):
        rep = parabolic_estimate_check(1, 0, (0,), q=1.5)
        assert rep.bounded

    def test_first_x_derivative(self):
        # d_x k has parabolic order 1/2 higher: bare q=0 unbounded, and the
        # scaling-complete exponent d/2 + 1 + 1/2 = 2 is bounded
        rep0 = parabolic_estimate_check(1, 0, (1,), q=0.0)
        assert not rep0.bounded
        rep2 = parabolic_estimate_check(1, 0, (1,), q=2.0)
        assert rep2.bounded

    def test_standard_variant_also_scans(self):
        rep = parabolic_estimate_check(1, 0, (0,), q=1.5, variant="standard")
        assert rep.bounded
        assert rep.sup_value > 0
