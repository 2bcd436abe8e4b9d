import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from volterra_cz import (NormInterval, SpatialSpace, StepFunction, TimeGrid,
                         bochner_norm, distribution_function,
                         induced_operator_norm, read_step_function,
                         weak_l1_norm, write_step_function)
from volterra_cz.spaces import lp_lr_norm, row_norms

from conftest import random_step, scalar_step

EXPONENTS = [1.5, 2.0, 3.0, 7.0, math.inf]

finite_floats = st.floats(min_value=-1e6, max_value=1e6,
                          allow_nan=False, allow_infinity=False)
vectors = st.lists(finite_floats, min_size=1, max_size=6)


class TestSpatialSpace:
    def test_rejects_bad_parameters(self):
        with pytest.raises(ValueError):
            SpatialSpace(0, 2.0)
        with pytest.raises(ValueError):
            SpatialSpace(3, 1.0)
        with pytest.raises(ValueError):
            SpatialSpace(3, 0.5)

    @pytest.mark.parametrize("r", EXPONENTS)
    def test_zero_vector(self, r):
        assert SpatialSpace(4, r).norm(np.zeros(4)) == 0.0

    @given(v=vectors, c=st.floats(min_value=-100, max_value=100,
                                  allow_nan=False))
    @settings(max_examples=200, deadline=None)
    def test_homogeneity(self, v, c):
        for r in (1.5, 3.0, math.inf):
            space = SpatialSpace(len(v), r)
            got = space.norm(c * np.asarray(v))
            want = abs(c) * space.norm(v)
            assert got == pytest.approx(want, rel=1e-12, abs=1e-12)

    @given(data=st.data())
    @settings(max_examples=200, deadline=None)
    def test_triangle_inequality(self, data):
        n = data.draw(st.integers(min_value=1, max_value=6))
        u = np.array(data.draw(st.lists(finite_floats, min_size=n, max_size=n)))
        v = np.array(data.draw(st.lists(finite_floats, min_size=n, max_size=n)))
        for r in (1.5, 2.0, 4.0, math.inf):
            space = SpatialSpace(n, r)
            assert space.norm(u + v) <= space.norm(u) + space.norm(v) + 1e-9 * (
                1.0 + space.norm(u) + space.norm(v))

    @given(v=vectors)
    @settings(max_examples=200, deadline=None)
    def test_r2_is_euclidean(self, v):
        space = SpatialSpace(len(v), 2.0)
        assert space.norm(v) == pytest.approx(float(np.linalg.norm(v)), rel=1e-14)


class TestBochnerNorm:
    def test_rejects_p_below_one(self):
        with pytest.raises(ValueError):
            bochner_norm(scalar_step([1.0]), 0.99)

    def test_exactness_on_steps(self):
        f = scalar_step([1.0, -2.0, 3.0], n_min=-1)  # h = 1/2
        assert bochner_norm(f, 1.0) == pytest.approx(3.0, abs=0)
        assert bochner_norm(f, 2.0) == pytest.approx(math.sqrt(7.0), rel=1e-15)
        assert bochner_norm(f, math.inf) == 3.0

    @pytest.mark.parametrize("p,q", [(1.0, 2.0), (1.5, 4.0), (2.0, math.inf),
                                     (1.0, math.inf), (3.0, 3.0)])
    def test_support_embedding(self, p, q):
        # ||f||_p <= |supp f|^{1/p - 1/q} ||f||_q
        for seed in range(30):
            f = random_step(seed, N=32, m=3, density=0.6)
            supp = f.support_measure()
            if supp == 0.0:
                continue
            inv_p = 0.0 if p == math.inf else 1.0 / p
            inv_q = 0.0 if q == math.inf else 1.0 / q
            lhs = bochner_norm(f, p)
            rhs = supp ** (inv_p - inv_q) * bochner_norm(f, q)
            assert lhs <= rhs * (1.0 + 1e-12)


class TestWeakNorm:
    def test_chebyshev(self):
        for seed in range(50):
            f = random_step(seed, N=48, m=2, density=0.7)
            assert weak_l1_norm(f) <= bochner_norm(f, 1.0) * (1.0 + 1e-12)

    def test_attained_on_value_set(self):
        f = scalar_step([2.0, 1.0, 1.0])
        vals = sorted(set(f.cell_norms())) + [0.5, 1.5, 3.0]
        brute = max(v * distribution_function(f, v * (1 - 1e-9)) for v in vals
                    if v > 0)
        assert weak_l1_norm(f) == pytest.approx(brute, rel=1e-9)

    def test_distribution_monotone_right_continuous(self):
        f = scalar_step([3.0, 1.0, 4.0, 1.0, 5.0])
        lams = np.linspace(0.1, 6.0, 200)
        vals = [distribution_function(f, lam) for lam in lams]
        assert all(a >= b for a, b in zip(vals, vals[1:]))
        # right-continuity at the jump points: d(v) = lim_{eps->0+} d(v+eps)
        for v in set(f.cell_norms()):
            if v > 0:
                assert distribution_function(f, v) == \
                    distribution_function(f, v * (1 + 1e-12))

    def test_rejects_nonpositive_level(self):
        with pytest.raises(ValueError):
            distribution_function(scalar_step([1.0]), 0.0)


class TestInducedNorm:
    def test_exact_special_exponents(self, rng):
        A = rng.normal(size=(4, 4))
        one = induced_operator_norm(A, 1.0)
        inf = induced_operator_norm(A, math.inf)
        two = induced_operator_norm(A, 2.0)
        assert one.degenerate and inf.degenerate and two.degenerate
        assert one.lower == pytest.approx(np.abs(A).sum(axis=0).max(), rel=1e-15)
        assert inf.lower == pytest.approx(np.abs(A).sum(axis=1).max(), rel=1e-15)
        assert two.lower == pytest.approx(np.linalg.norm(A, 2), rel=1e-13)

    @pytest.mark.parametrize("r", [1.3, 2.5, 5.0])
    def test_interval_orientation_and_sandwich(self, r, rng):
        for _ in range(20):
            A = rng.normal(size=(3, 3))
            iv = induced_operator_norm(A, r)
            assert iv.lower <= iv.upper * (1 + 1e-12)
            n1 = np.abs(A).sum(axis=0).max()
            ninf = np.abs(A).sum(axis=1).max()
            assert iv.upper == pytest.approx(
                n1 ** (1 / r) * ninf ** (1 - 1 / r), rel=1e-13)

    def test_r2_brute_force_within_one_percent(self, rng):
        # ascent lower bound vs plain random sampling, 1e4 unit vectors
        A = rng.normal(size=(2, 2))
        exact = induced_operator_norm(A, 2.0).lower
        u = rng.normal(size=(10000, 2))
        u /= np.linalg.norm(u, axis=1, keepdims=True)
        brute = np.linalg.norm(u @ A.T, axis=1).max()
        assert brute <= exact * (1 + 1e-12)
        assert brute >= exact * 0.99

    def test_ascent_lower_bound_close_for_fractional_r(self, rng):
        # brute force can only certify from below; the ascent should beat it
        for _ in range(5):
            A = rng.normal(size=(3, 3))
            iv = induced_operator_norm(A, 3.0)
            u = rng.normal(size=(2000, 3))
            bf = 0.0
            for x in u:
                nx = row_norms(x[None, :], 3.0)[0]
                bf = max(bf, row_norms((A @ x)[None, :], 3.0)[0] / nx)
            assert iv.lower >= bf * (1 - 1e-9)

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValueError):
            induced_operator_norm(np.ones((2, 3)), 2.0)
        with pytest.raises(ValueError):
            induced_operator_norm(np.eye(2), 0.5)
        with pytest.raises(ValueError):
            induced_operator_norm(np.array([[np.nan, 0], [0, 1]]), 2.0)


class TestStepFunction:
    def test_shape_validation(self):
        grid = TimeGrid(0, 4)
        with pytest.raises(ValueError):
            StepFunction(grid, SpatialSpace(2, 2.0), np.zeros((3, 2)))
        with pytest.raises(ValueError):
            StepFunction(grid, SpatialSpace(2, 2.0), np.full((4, 2), np.nan))

    def test_samples_frozen(self):
        f = scalar_step([1.0, 2.0])
        with pytest.raises(ValueError):
            f.samples[0] = 5.0

    def test_value_at(self):
        f = scalar_step([1.0, 2.0], n_min=-1)
        assert f.value_at(0.25)[0] == 1.0
        assert f.value_at(0.75)[0] == 2.0
        assert f.value_at(0.5)[0] == 1.0   # cells are left-open
        assert f.value_at(5.0)[0] == 0.0
        assert f.value_at(0.0)[0] == 0.0

    def test_grid_cell_alignment(self):
        grid = TimeGrid(-2, 8)
        edges = grid.edges()
        assert edges[0] == 0.0 and edges[-1] == grid.T
        assert np.all(np.diff(edges) == grid.h)

    def test_csv_round_trip(self, tmp_path):
        f = random_step(7, N=16, m=3, r=2.5)
        path = tmp_path / "f.csv"
        write_step_function(f, path)
        g = read_step_function(path)
        assert g.grid == f.grid
        assert g.space == f.space
        assert np.array_equal(g.samples, f.samples)
        header = path.read_text().splitlines()[0]
        assert header == "cell_index,t_left,t_right,v_0,v_1,v_2"
        meta = (tmp_path / "f.csv.meta").read_text()
        assert "n_min=" in meta and "N=" in meta and "m=" in meta and "r=" in meta


def test_lp_lr_norm_matches_direct_computation(rng):
    values = rng.normal(size=(10, 3))
    h = 0.25
    for p in (1.0, 2.0, 3.5, math.inf):
        for r in (1.5, 2.0, math.inf):
            norms = row_norms(values, r)
            if p == math.inf:
                want = norms.max()
            else:
                want = (h * (norms ** p).sum()) ** (1 / p)
            assert lp_lr_norm(values, h, p, r) == pytest.approx(want, rel=1e-12)


def test_norm_interval_validation():
    with pytest.raises(ValueError):
        NormInterval(2.0, 1.0)
