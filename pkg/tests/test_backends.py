"""Parity between the compiled core and the pure NumPy fallback."""

import math

import numpy as np
import pytest

from volterra_cz import _purepy

try:
    from volterra_cz import _core
except ImportError:
    _core = None

needs_core = pytest.mark.skipif(_core is None, reason="compiled core not built")


def random_integrals(seed, N):
    rng = np.random.default_rng(seed)
    c = np.abs(rng.normal(size=N)) * (rng.random(N) < 0.6)
    return np.ascontiguousarray(c * 2.0 ** rng.integers(-3, 4))


@needs_core
@pytest.mark.parametrize("N", [1, 7, 64, 257, 1024])
def test_select_bad_cubes_bit_identical(N):
    for seed in range(25):
        c = random_integrals(seed, N)
        h = 2.0 ** -int(math.log2(N) if N > 1 else 0)
        for alpha in (0.05, 0.3, 1.0, 5.0):
            lv_c, ix_c = _core.select_bad_cubes(c, h, alpha)
            lv_p, ix_p = _purepy.select_bad_cubes(c, h, alpha)
            assert np.array_equal(lv_c, lv_p), (seed, alpha)
            assert np.array_equal(ix_c, ix_p), (seed, alpha)


@needs_core
def test_select_accepts_readonly_input():
    c = random_integrals(0, 32)
    c.setflags(write=False)
    lv, ix = _core.select_bad_cubes(c, 0.25, 0.5)
    lv2, ix2 = _purepy.select_bad_cubes(c, 0.25, 0.5)
    assert np.array_equal(lv, lv2) and np.array_equal(ix, ix2)


@needs_core
def test_model_kernel_sums_agree():
    rng = np.random.default_rng(3)
    nodes, weights = np.polynomial.legendre.leggauss(16)
    for trial in range(30):
        M = int(rng.integers(1, 12))
        h = 2.0 ** int(rng.integers(-6, 0))
        lefts = np.arange(M) * h
        coeffs = rng.normal(size=M)
        t = M * h + h * (1.0 + rng.random())
        shift = float(lefts[-1]) if trial % 2 else math.nan
        a = _core.model_kernel_cell_sums(t, lefts, h, coeffs, nodes, weights, shift)
        b = _purepy.model_kernel_cell_sums(t, lefts, h, coeffs, nodes, weights, shift)
        assert a == pytest.approx(b, rel=1e-13, abs=1e-15)


@needs_core
def test_selection_semantics_trivial_cases():
    # no cells above the level: nothing selected, identically in both backends
    c = np.full(16, 0.1)
    for impl in (_core, _purepy):
        lv, ix = impl.select_bad_cubes(c, 1.0, 1.0)
        assert lv.size == 0 and ix.size == 0
    # zero function
    z = np.zeros(8)
    for impl in (_core, _purepy):
        lv, ix = impl.select_bad_cubes(z, 1.0, 0.5)
        assert lv.size == 0


def test_backend_env_override(tmp_path):
    import subprocess
    import sys
    code = ("import volterra_cz; print(volterra_cz.BACKEND)")
    out = subprocess.run([sys.executable, "-c", code],
                         env={"PATH": "/usr/bin:/bin", "VOLTERRA_CZ_BACKEND": "pure"},
                         capture_output=True, text=True)
    assert out.stdout.strip() == "pure"
