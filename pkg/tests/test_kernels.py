import math
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from swan import _kernels_py as py
from swan import kernels

try:
    from swan import _kernels as cy
except ImportError:  # extension not built
    cy = None

needs_compiled = pytest.mark.skipif(cy is None, reason="compiled kernels not built")
LAM = 299792458.0 / 28e9


def test_backend_flag():
    assert kernels.BACKEND == ("compiled" if cy is not None else "python")


def test_pure_python_override():
    env = {**os.environ, "SWAN_PURE_PYTHON": "1"}
    out = subprocess.run([sys.executable, "-c", "import swan; print(swan.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


@given(st.floats(-10, 10), st.floats(-10, 10), st.floats(-10, 10), st.floats(0.5, 80), st.floats(1.0, 2.5))
def test_solve_position_inverts_path_length(x, feed, ux, cyv, n):
    d = py.path_length(x, feed, ux, cyv, n)
    got = py.solve_position(d, feed, ux, cyv, n)
    assert abs(py.path_length(got, feed, ux, cyv, n) - d) <= 1e-9


@given(st.floats(0, 100), st.floats(0, 100), st.sampled_from([1, -1]))
def test_wrapped_target_range(d_here, d_ref, direction):
    t = py.wrapped_target(d_here, d_ref, LAM, direction)
    step = (t - d_here) * direction
    assert -1e-12 <= step < LAM + 1e-12
    assert math.isclose(math.remainder(t - d_ref, LAM), 0.0, abs_tol=1e-9)


def _chain_args(draw_count=5):
    return dict(prev=0.1, lo=0.0, hi=1.0, feed=0.0, direction=1, count=draw_count, ux=0.1, cy=9.0,
                n_eff=1.4, wavelength=LAM, d_ref=9.0**0.5 + 1.4 * 0.1, delta=LAM / 2, align=True, clamp=False)


def test_fill_chain_spacing_and_alignment():
    a = _chain_args(20)
    pos, nu, flags = py.fill_chain(*a.values())
    assert pos.size == 20
    assert np.all(np.diff(pos) >= a["delta"] - 1e-12)
    assert np.all(nu >= 0) and np.all(flags == py.ALIGNED)
    d = np.array([py.path_length(x, 0.0, a["ux"], a["cy"], 1.4) for x in pos])
    resid = np.remainder(d - a["d_ref"] + LAM / 2, LAM) - LAM / 2
    assert np.max(np.abs(resid)) < 1e-9


def test_fill_chain_until_exhausted():
    a = {**_chain_args(-1), "prev": 0.9}
    pos, _, _ = py.fill_chain(*a.values())
    assert pos.size > 0 and pos[-1] <= 1.0
    left = {**a, "direction": -1, "prev": 0.02}
    pos, _, _ = py.fill_chain(*left.values())
    assert np.all(pos >= 0.0) and np.all(np.diff(pos) < 0)


@needs_compiled
@settings(max_examples=200, deadline=None)
@given(
    st.floats(-5, 5),
    st.floats(0.5, 60),
    st.floats(1.0, 2.0),
    st.sampled_from([1, -1]),
    st.integers(-1, 30),
    st.booleans(),
    st.booleans(),
)
def test_fill_chain_backends_agree(ux, cyv, n, direction, count, align, clamp):
    lo, hi = -1.0, 1.0
    prev = min(max(ux, lo), hi)
    d_ref = py.path_length(prev, lo, ux, cyv, n)
    args = (prev, lo, hi, lo, direction, count, ux, cyv, n, LAM, d_ref, LAM / 2, align, clamp)
    p1, s1, f1 = py.fill_chain(*args)
    p2, s2, f2 = cy.fill_chain(*args)
    np.testing.assert_allclose(p2, p1, rtol=0, atol=1e-12)
    np.testing.assert_allclose(s2, s1, rtol=0, atol=1e-12)
    np.testing.assert_array_equal(np.asarray(f2), np.asarray(f1))


@needs_compiled
@settings(max_examples=100, deadline=None)
@given(st.integers(1, 40), st.floats(0.02, 3.0), st.floats(0.0, 1.0), st.floats(0.5, 60), st.booleans())
def test_segment_sweep_backends_agree(M, L, frac, cyv, align):
    feeds = -M * L / 2 + L * np.arange(M, dtype=float)
    ux = feeds[0] + frac * M * L
    m_star = min(max(math.ceil((ux - feeds[0]) / L), 1), M)
    d_ref = py.path_length(ux, feeds[m_star - 1], ux, cyv, 1.4)
    for direction, sl in ((1, feeds[m_star:]), (-1, feeds[: m_star - 1][::-1])):
        sl = np.ascontiguousarray(sl)
        args = (sl, L, ux, direction, ux, cyv, 1.4, LAM, d_ref, LAM / 2, align)
        r1, r2 = py.segment_sweep(*args), cy.segment_sweep(*args)
        for a, b in zip(r1, r2):
            np.testing.assert_allclose(np.asarray(b, dtype=float), np.asarray(a, dtype=float), rtol=0, atol=1e-12)


@needs_compiled
def test_scalar_kernels_agree():
    rng = np.random.default_rng(3)
    for _ in range(500):
        x, feed, ux = rng.uniform(-5, 5, 3)
        cyv, n = rng.uniform(0.5, 50), rng.uniform(1.0, 2.0)
        assert cy.path_length(x, feed, ux, cyv, n) == pytest.approx(py.path_length(x, feed, ux, cyv, n), rel=1e-15)
        d = py.path_length(x, feed, ux, cyv, n)
        assert cy.solve_position(d, feed, ux, cyv, n) == pytest.approx(py.solve_position(d, feed, ux, cyv, n), abs=1e-12)
        for direction in (1, -1):
            assert cy.wrapped_target(d, 3.3, LAM, direction) == pytest.approx(py.wrapped_target(d, 3.3, LAM, direction), abs=1e-12)
