import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from volterra_cz import (DyadicCube, SpatialSpace, StepFunction, TimeGrid,
                         cube_average, decompose, verify)
from volterra_cz.czd import BadPart

from conftest import random_step, scalar_step


def test_cube_average_rejects_subgrid_cubes():
    f = scalar_step([1.0, 2.0], n_min=0)
    with pytest.raises(ValueError):
        cube_average(f, DyadicCube(-1, 0))


def test_cube_average_beyond_support_counts_zeros():
    f = scalar_step([4.0])
    vec, nrm = cube_average(f, DyadicCube(3, 0))  # (0, 8]
    assert vec[0] == pytest.approx(0.5, abs=0)
    assert nrm == pytest.approx(0.5, abs=0)


def test_decompose_rejects_nonpositive_alpha():
    f = scalar_step([1.0])
    for alpha in (0.0, -1.0):
        with pytest.raises(ValueError):
            decompose(f, alpha)


def test_worked_example_every_level():
    # same input sampled on finer grids must select the same cube
    for n_min in (0, -2, -4):
        N = 2 ** (-n_min)
        f = StepFunction(TimeGrid(n_min, N), SpatialSpace(1, 2.0),
                         np.full((N, 1), 4.0))
        d = decompose(f, 1.0)
        assert [p.cube for p in d.parts] == [DyadicCube(1, 0)]
        assert np.all(d.good.samples == 2.0)


def test_reconstruction_exact():
    for seed in range(100):
        f = random_step(seed, N=128, m=2, density=0.5, amplitude=3.0)
        sup = float(f.cell_norms().max(initial=0.0))
        if sup == 0.0:
            continue
        for scale in (0.1, 0.5, 1.0, 2.0, 10.0):
            alpha = scale * sup
            d = decompose(f, alpha)
            rec = d.reconstruction()
            n = f.grid.N
            # inside the cubes avg + (f - avg) double-rounds, so exactness
            # means ulp-scale agreement; outside them g = f bit for bit
            assert np.abs(rec.samples[:n] - f.samples).max() <= 1e-13 * max(1.0, sup)
            assert not rec.samples[n:].any()
            covered = np.zeros(d.good.grid.N, dtype=bool)
            for p in d.parts:
                covered[d.good.grid.cell_slice(p.cube)] = True
            free = ~covered[:n]
            assert np.array_equal(d.good.samples[:n][free], f.samples[free])


def test_selected_averages_in_half_open_band():
    for seed in range(40):
        f = random_step(seed, N=64, m=1, density=0.6, amplitude=2.0)
        sup = float(f.cell_norms().max(initial=0.0))
        if sup == 0.0:
            continue
        alpha = 0.25 * sup
        d = decompose(f, alpha)
        for p in d.parts:
            _, nrm = cube_average(f, p.cube)
            assert nrm > alpha
            assert nrm <= 2.0 * alpha * (1 + 1e-12)


def test_cubes_disjoint_and_maximal():
    for seed in range(20):
        f = random_step(seed, N=64, m=1, density=0.7, amplitude=2.0)
        sup = float(f.cell_norms().max(initial=0.0))
        if sup == 0.0:
            continue
        alpha = 0.3 * sup
        d = decompose(f, alpha)
        cubes = [p.cube for p in d.parts]
        for i, a in enumerate(cubes):
            for b in cubes[i + 1:]:
                assert a.disjoint(b)
            # every strict ancestor is good
            anc = a.parent()
            for _ in range(10):
                _, nrm = cube_average(f, anc)
                assert nrm <= alpha * (1 + 1e-12)
                anc = anc.parent()


def test_cells_outside_union_are_good():
    for seed in range(20):
        f = random_step(seed, N=32, m=1, density=0.8, amplitude=2.0)
        sup = float(f.cell_norms().max(initial=0.0))
        if sup == 0.0:
            continue
        alpha = 0.4 * sup
        d = decompose(f, alpha)
        covered = np.zeros(d.good.grid.N, dtype=bool)
        for p in d.parts:
            sl = d.good.grid.cell_slice(p.cube)
            covered[sl] = True
        # every grid cube disjoint from the union has norm-average <= alpha,
        # checked at every level from the grid up to the root
        n_ext = d.good.grid.N
        level = 0
        while (1 << level) <= n_ext:
            w = 1 << level
            for k in range((n_ext + w - 1) >> level):
                cells = slice(k * w, min((k + 1) * w, n_ext))
                if covered[cells].any():
                    continue
                cube = DyadicCube(f.grid.n_min + level, k)
                _, nrm = cube_average(f, cube)
                assert nrm <= alpha * (1 + 1e-12)
            level += 1


def test_alpha_monotonicity():
    for seed in range(20):
        f = random_step(seed, N=64, m=1, density=0.6, amplitude=2.0)
        sup = float(f.cell_norms().max(initial=0.0))
        if sup == 0.0:
            continue
        d1 = decompose(f, 0.2 * sup)
        d2 = decompose(f, 0.5 * sup)
        for p2 in d2.parts:
            assert any(p1.cube.contains(p2.cube) for p1 in d1.parts)


def test_good_part_sup_bound_is_grid_exact():
    for seed in range(30):
        f = random_step(seed, N=64, m=3, density=0.6, amplitude=5.0)
        sup = float(f.cell_norms().max(initial=0.0))
        if sup == 0.0:
            continue
        alpha = 0.3 * sup
        d = decompose(f, alpha)
        assert float(d.good.cell_norms().max(initial=0.0)) <= 2 * alpha * (1 + 1e-12)


@given(seed=st.integers(min_value=0, max_value=10_000),
       scale=st.sampled_from([0.1, 0.5, 1.0, 2.0, 10.0]))
@settings(max_examples=150, deadline=None)
def test_verify_passes_for_library_decompositions(seed, scale):
    f = random_step(seed, N=64, m=2, density=0.5, amplitude=2.0)
    sup = float(f.cell_norms().max(initial=0.0))
    alpha = scale * sup if sup > 0 else scale
    d = decompose(f, alpha)
    report = verify(d, f, alpha, r=2.0)
    assert report.ok, report.first_failure()


def test_verify_catches_mean_shift():
    f = scalar_step([4.0])
    d = decompose(f, 1.0)
    p = d.parts[0]
    d.parts[0] = BadPart(p.cube, p.b.with_samples(p.b.samples + 0.1),
                         p.center, p.average)
    rep = verify(d, f, 1.0)
    assert not rep.ok
    assert rep.first_failure().name == "bad_mean_zero"
    assert rep.first_failure().witness == DyadicCube(1, 0)


def test_verify_catches_good_part_inflation():
    f = scalar_step([0.5, 0.5])
    d = decompose(f, 1.0)
    d.good = d.good.with_samples(d.good.samples + 4.0)
    rep = verify(d, f, 1.0)
    names = {c.name for c in rep.failures()}
    assert "good_linf" in names


def test_verify_catches_overlapping_cubes():
    f = scalar_step([4.0, 0.0, 0.0, 0.0, 4.0, 0.0, 0.0, 0.0])
    d = decompose(f, 1.0)
    assert len(d.parts) >= 2
    p = d.parts[0]
    clone = BadPart(d.parts[1].cube, p.b, d.parts[1].cube.center, p.average)
    d.parts[0] = clone
    rep = verify(d, f, 1.0)
    assert not rep.ok


def test_verify_range_property_uses_r():
    f = random_step(3, N=64, m=1, density=0.7, amplitude=2.0)
    sup = float(f.cell_norms().max(initial=0.0))
    alpha = 0.2 * sup
    d = decompose(f, alpha)
    for r in (1.0, 2.0, 4.0):
        rep = verify(d, f, alpha, r=r)
        assert rep.ok, (r, rep.first_failure())


def test_report_dict_shape():
    f = scalar_step([4.0])
    d = decompose(f, 1.0)
    rep = verify(d, f, 1.0)
    payload = rep.to_dict()
    assert payload["ok"] is True
    names = [c["name"] for c in payload["checks"]]
    assert names == ["good_l1", "good_linf", "disjoint_cubes",
                     "bad_supported_in_cube", "bad_mean_zero", "bad_l1_bound",
                     "cube_measure_bound", "partial_sum_lr", "selection_bound"]


def test_decomposition_of_tall_single_cell():
    # a one-cell bad cube is selected as-is with a zero bad part
    f = scalar_step([0.0, 0.0, 100.0, 0.0], n_min=0)
    d = decompose(f, 60.0)
    assert [p.cube for p in d.parts] == [DyadicCube(0, 2)]
    assert not d.parts[0].b.samples.any()
    rep = verify(d, f, 60.0)
    assert rep.ok, rep.first_failure()
