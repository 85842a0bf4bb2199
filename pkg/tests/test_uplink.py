import dataclasses
import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from swan.errors import InfeasibleLayout, InvalidArgument, NumericDomainError
from swan.phys import LinkBudget, UserLocation, WaveguideLayout, make_radio_config, path_phase_distance
from swan.uplink import (
    Placement,
    channel_vector,
    conventional_uplink_snr,
    phase_align_shift,
    placement_phase_spread,
    sa_place,
    sa_snr,
    sm_place,
    sm_snr,
    ss_place,
    ss_snr,
    wrapped_target,
)

BUDGET = LinkBudget(0.01, 1e-12)
LOSSLESS = make_radio_config(28e9, 1.4, 0.0)
LOSSY = make_radio_config(28e9, 1.4, 0.08)
SINGLE_PA = BUDGET.snr_scale * LOSSLESS.eta / 9.0  # user right below a PA at height 3


@st.composite
def scenes(draw, max_segments=40):
    M = draw(st.integers(1, max_segments))
    L = draw(st.floats(0.1, 4.0))
    h = draw(st.floats(1.0, 8.0))
    layout = WaveguideLayout.centered(M * L, M, height=h, min_spacing=LOSSLESS.wavelength / 2)
    frac = draw(st.floats(0.0, 1.0))
    user = UserLocation.on(layout, layout.first_feed_x + frac * layout.side_length, draw(st.floats(-10, 10)))
    return layout, user


def centered(M, L=1.0, h=3.0):
    layout = WaveguideLayout.centered(M * L, M, height=h, min_spacing=LOSSLESS.wavelength / 2)
    return layout, UserLocation.on(layout, 0.0, 0.0)


# ---------------------------------------------------------------- SS

def test_ss_lossless_projection():
    layout, user = centered(5)
    for mode in ("exact", "projection"):
        pl = ss_place(user, layout, LOSSLESS, mode)
        assert pl.positions[0] == 0.0 and pl.selected_segment == 3
    rep = ss_snr(user, ss_place(user, layout, LOSSLESS), layout, LOSSLESS, BUDGET)
    assert rep.snr == pytest.approx(SINGLE_PA, rel=1e-15)
    assert rep.snr == pytest.approx(806.6, rel=1e-4)
    assert rep.snr_db == pytest.approx(29.07, abs=5e-3)
    assert rep.waveguide_gain == 1.0


def test_ss_exact_else_branch_offset():
    # segment [0, 1], user at 0.5 from the feed, c_y = 9
    layout = WaveguideLayout(num_segments=1, segment_length=1.0, first_feed_x=0.0, height=3.0)
    user = UserLocation(0.5, 0.0, 9.0)
    a = LOSSY.alpha
    pl = ss_place(user, layout, LOSSY, "exact")
    offset = (-1.0 + math.sqrt(1.0 - 4.0 * a * a * 9.0)) / (2.0 * a)
    assert pl.positions[0] == pytest.approx(0.5 + offset, abs=1e-12)
    assert offset == pytest.approx(-0.0829, abs=1e-4)
    assert (1 - (2 * a * 0.5 - 1) ** 2) / (4 * a * a) == pytest.approx(54.1, abs=0.1)


def test_ss_exact_feed_branch():
    layout = WaveguideLayout(num_segments=1, segment_length=1.0, first_feed_x=0.0, height=math.sqrt(60.0))
    user = UserLocation(0.5, 0.0, 60.0)
    assert ss_place(user, layout, LOSSY, "exact").positions[0] == 0.0


def test_ss_exact_maximises_over_segment():
    # brute-force oracle over a fine grid of positions inside m*
    layout = WaveguideLayout.centered(20.0, 4, height=3.0)
    radio = make_radio_config(28e9, 1.4, 2.0)
    for ux in (-9.3, -2.1, 0.4, 7.7):
        user = UserLocation.on(layout, ux, 1.0)
        pl = ss_place(user, layout, radio, "exact")
        best = ss_snr(user, pl, layout, radio, BUDGET).snr
        m = pl.selected_segment
        lo, hi = layout.segment_bounds(m)
        grid = np.linspace(lo, hi, 20001)
        vals = [ss_snr(user, Placement("SS", [m], [x], [0.0], m), layout, radio, BUDGET).snr for x in grid]
        assert best >= max(vals) * (1 - 1e-9)


def test_ss_vacuous_branch_flagged():
    radio = make_radio_config(28e9, 1.4, 6.0)
    layout = WaveguideLayout(num_segments=1, segment_length=10.0, first_feed_x=0.0)
    pl = ss_place(UserLocation(9.0, 0.0, 9.0), layout, radio, "exact")
    assert "ss_branch_vacuous" in pl.events
    assert pl.is_feasible(layout)


@given(scenes(), st.floats(0.0, 3.0))
def test_ss_exact_else_branch_has_real_root(scene, kappa):
    layout, user = scene
    radio = make_radio_config(28e9, 1.4, kappa)
    pl = ss_place(user, layout, radio, "exact")
    assert pl.is_feasible(layout)
    assert np.isfinite(pl.positions).all()


def test_ss_rejects_bad_input():
    layout, user = centered(3)
    with pytest.raises(InvalidArgument):
        ss_place(user, layout, LOSSLESS, "nearest")
    pl = sm_place(user, layout)
    with pytest.raises(InvalidArgument):
        ss_snr(user, pl, layout, LOSSLESS, BUDGET)
    bad = Placement("SS", [1], [0.0], [0.0], selected_segment=2)
    with pytest.raises(InvalidArgument):
        ss_snr(user, bad, layout, LOSSLESS, BUDGET)


def test_ss_snr_halves_with_double_cy():
    layout, _ = centered(1)
    a = ss_snr(UserLocation(0.0, 0.0, 9.0), ss_place(UserLocation(0.0, 0.0, 9.0), layout, LOSSLESS), layout, LOSSLESS, BUDGET)
    b = ss_snr(UserLocation(0.0, 0.0, 18.0), ss_place(UserLocation(0.0, 0.0, 18.0), layout, LOSSLESS), layout, LOSSLESS, BUDGET)
    assert b.snr == pytest.approx(a.snr / 2, rel=1e-15)


def test_conventional_baseline():
    layout = WaveguideLayout.centered(200.0, 200)
    user = UserLocation.on(layout, 0.0, 0.0)
    assert conventional_uplink_snr(user, layout, LOSSY, BUDGET).waveguide_gain == pytest.approx(10**-0.8, rel=1e-12)
    assert 10**-0.8 == pytest.approx(0.1585, abs=1e-4)
    at_feed = UserLocation.on(layout, -100.0, 0.0)
    assert conventional_uplink_snr(at_feed, layout, LOSSY, BUDGET).waveguide_gain == 1.0
    proj = ss_snr(user, ss_place(user, layout, LOSSLESS, "projection"), layout, LOSSLESS, BUDGET)
    assert conventional_uplink_snr(user, layout, LOSSLESS, BUDGET).snr == pytest.approx(proj.snr, rel=1e-15)


# ---------------------------------------------------------------- alignment

def test_phase_align_shift_zero_and_residual():
    user = UserLocation(0.0, 0.0, 9.0)
    d = float(path_phase_distance(0.5, 0.5, user, 1.4))
    assert phase_align_shift(0.5, 0.5, user, LOSSLESS, d) == pytest.approx(0.0, abs=1e-12)
    target = d + 0.7 * LOSSLESS.wavelength
    nu = phase_align_shift(0.5, 0.5, user, LOSSLESS, target)
    assert abs(float(path_phase_distance(0.5 + nu, 0.5, user, 1.4)) - target) <= 1e-9
    assert 0.0 <= nu <= LOSSLESS.wavelength / 0.4


def _bisect_root(f, lo, hi, iters=200):
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


@given(st.floats(-5, 5), st.floats(0.0, 1.0), st.floats(0.5, 60), st.floats(1.0, 2.0))
def test_phase_align_shift_matches_bisection(ux, frac, cyv, n):
    radio = make_radio_config(28e9, n, 0.0)
    user = UserLocation(ux, 0.0, cyv)
    feed, anchor = -6.0, -6.0 + 12.0 * frac
    d0 = float(path_phase_distance(anchor, feed, user, n))
    target = d0 + 0.37 * radio.wavelength
    nu = phase_align_shift(anchor, feed, user, radio, target)
    ref = _bisect_root(lambda v: float(path_phase_distance(anchor + v, feed, user, n)) - target, 0.0, 100.0)
    assert nu == pytest.approx(ref, abs=1e-9)
    assert abs(float(path_phase_distance(anchor + nu, feed, user, n)) - target) <= 1e-9


def test_phase_align_shift_n_eff_one_branch():
    radio = make_radio_config(28e9, 1.0, 0.0)
    user = UserLocation(0.0, 0.0, 9.0)
    d0 = float(path_phase_distance(1.0, 1.0, user, 1.0))
    nu = phase_align_shift(1.0, 1.0, user, radio, d0 + radio.wavelength / 3)
    assert abs(float(path_phase_distance(1.0 + nu, 1.0, user, 1.0)) - d0 - radio.wavelength / 3) <= 1e-9


def test_phase_align_shift_guards():
    user = UserLocation(0.0, 0.0, 9.0)
    d0 = float(path_phase_distance(1.0, 1.0, user, 1.4))
    with pytest.raises(InvalidArgument):
        phase_align_shift(1.0, 1.0, user, LOSSLESS, d0 - 0.01)
    with pytest.raises(InvalidArgument):
        phase_align_shift(1.0, 1.0, user, LOSSLESS, d0 + 0.01, direction=-1)
    # d(x) has a floor only when n_eff < 1, which make_radio_config forbids
    radio = dataclasses.replace(LOSSLESS, n_eff=0.5)
    with pytest.raises(NumericDomainError):
        phase_align_shift(1.0, 1.0, user, radio, 0.0, direction=-1)


def test_wrapped_target_examples():
    lam = LOSSLESS.wavelength
    assert wrapped_target(1.0, 1.0, lam) == 1.0
    assert wrapped_target(1.0, 1.0 + 0.25 * lam, lam) == pytest.approx(1.0 + 0.25 * lam)
    assert wrapped_target(1.0, 1.0 - 0.25 * lam, lam) == pytest.approx(1.0 + 0.75 * lam)
    assert wrapped_target(1.0, 1.0 - 0.25 * lam, lam, direction=-1) == pytest.approx(1.0 - 0.25 * lam)


# ---------------------------------------------------------------- SA / SM

def test_sa_single_segment():
    layout, user = centered(1)
    pl = sa_place(user, layout, LOSSLESS)
    assert pl.positions.tolist() == [0.0] and pl.shifts.tolist() == [0.0]
    assert sa_snr(user, pl, layout, LOSSLESS, BUDGET).snr == pytest.approx(SINGLE_PA, rel=1e-14)
    assert sm_snr(user, sm_place(user, layout), layout, LOSSLESS, BUDGET).snr == pytest.approx(SINGLE_PA, rel=1e-14)


def test_sa_three_segments():
    layout, user = centered(3)
    pl = sa_place(user, layout, LOSSLESS)
    hat = np.array([-0.5, 0.0, 0.5])
    np.testing.assert_allclose(pl.positions, hat + np.array([-1, 0, 1]) * pl.shifts, atol=1e-15)
    assert np.all(pl.shifts < LOSSLESS.wavelength / 0.4)
    rep = sa_snr(user, pl, layout, LOSSLESS, BUDGET)
    hand = BUDGET.snr_scale * LOSSLESS.eta * (1 / 3 + 2 / math.sqrt(9.25)) ** 2 / 3
    assert rep.snr == pytest.approx(hand, rel=2e-3)
    assert rep.snr == pytest.approx(2.376e3, rel=2e-3)
    assert rep.noise_scale == 3


def test_sa_detuning_reduces_snr():
    layout, user = centered(5)
    pl = sa_place(user, layout, LOSSLESS)
    base = sa_snr(user, pl, layout, LOSSLESS, BUDGET).snr
    pos = pl.positions.copy()
    pos[3] += LOSSLESS.guided_wavelength / 2
    bad = Placement("SA", pl.segments, pos, pl.shifts)
    assert sa_snr(user, bad, layout, LOSSLESS, BUDGET).snr < base


def test_sm_positions_max_rule():
    layout, user = centered(5)
    pl = sm_place(user, layout)
    np.testing.assert_allclose(pl.positions, [-1.5, -0.5, 0.0, 0.5, 1.5])
    assert np.all(pl.shifts == 0.0)
    sa = sa_place(user, layout, LOSSLESS)
    np.testing.assert_allclose(sa.positions - np.sign(sa.positions) * sa.shifts, pl.positions, atol=1e-15)


def test_sm_three_segments_hand_value():
    layout, user = centered(3)
    rep = sm_snr(user, sm_place(user, layout), layout, LOSSLESS, BUDGET)
    hand = BUDGET.snr_scale * LOSSLESS.eta * (1 / 9 + 2 / 9.25)
    assert rep.snr == pytest.approx(hand, rel=1e-13)
    assert rep.snr == pytest.approx(2.376e3, rel=1e-3)


def test_sm_ignores_shifts():
    layout, user = centered(5)
    pl = sm_place(user, layout)
    shifted = Placement("SM", pl.segments, pl.positions, np.full(5, 0.003))
    assert sm_snr(user, shifted, layout, LOSSLESS, BUDGET).snr == sm_snr(user, pl, layout, LOSSLESS, BUDGET).snr


def test_sweep_infeasible_when_segment_too_short():
    layout = WaveguideLayout.centered(0.01, 5, min_spacing=0.005)
    user = UserLocation.on(layout, 0.0, 0.0)
    with pytest.raises(InfeasibleLayout):
        sa_place(user, layout, LOSSLESS)
    with pytest.raises(InfeasibleLayout):
        sm_place(user, layout)


def test_even_segment_count():
    layout = WaveguideLayout.centered(4.0, 4, min_spacing=LOSSLESS.wavelength / 2)
    user = UserLocation.on(layout, 0.0, 0.0)
    pl = sa_place(user, layout, LOSSLESS)
    assert pl.num_active == 4 and pl.is_feasible(layout)
    assert placement_phase_spread(user, pl, layout, LOSSLESS) < 1e-6


def test_placement_validation():
    with pytest.raises(InvalidArgument):
        Placement("XX", [1], [0.0], [0.0])
    with pytest.raises(InvalidArgument):
        Placement("SA", [1, 2], [0.0], [0.0])
    pl = Placement("SA", [1], [0.0], [0.0])
    with pytest.raises(ValueError):
        pl.positions[0] = 1.0


def test_channel_vector_matches_coefficients():
    from swan.phys import freespace_coeff, inwaveguide_coeff

    layout, user = centered(3)
    pl = sa_place(user, layout, LOSSY)
    h = channel_vector(user, pl, layout, LOSSY)
    ref = [freespace_coeff(user, x, LOSSY) * inwaveguide_coeff(x, layout.feed_x(int(m)), LOSSY)
           for m, x in zip(pl.segments, pl.positions)]
    np.testing.assert_allclose(h, ref, rtol=1e-12)


@settings(max_examples=200, deadline=None)
@given(scenes(), st.sampled_from([0.0, 0.08, 1.0]))
def test_sweep_placements_feasible_and_ordered(scene, kappa):
    layout, user = scene
    assume(layout.segment_length > layout.min_spacing)
    radio = make_radio_config(28e9, 1.4, kappa)
    sa, sm = sa_place(user, layout, radio), sm_place(user, layout)
    assert sa.is_feasible(layout) and sm.is_feasible(layout)
    assert placement_phase_spread(user, sa, layout, radio) <= 1e-6
    for lossy in (False, True):
        # same placement, SM >= SA by Cauchy-Schwarz
        a = sa_snr(user, sa, layout, radio, BUDGET, lossy).snr
        m = sm_snr(user, Placement("SM", sa.segments, sa.positions, sa.shifts), layout, radio, BUDGET, lossy).snr
        assert m >= a * (1 - 1e-12)
    rep = sa_snr(user, sa, layout, radio, BUDGET)
    assert rep.snr >= 0 and 0 < rep.waveguide_gain <= 1 + 1e-12


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 60), st.floats(0.2, 3.0), st.floats(-0.5, 0.5))
def test_sm_non_decreasing_in_segments(M, L, frac):
    user = UserLocation(frac * L, 0.0, 9.0)
    prev = 0.0
    for k in range(1, M + 1, 2):
        layout = WaveguideLayout.centered(k * L, k, height=3.0, min_spacing=LOSSLESS.wavelength / 2)
        s = sm_snr(user, sm_place(user, layout), layout, LOSSLESS, BUDGET).snr
        assert s >= prev * (1 - 1e-12)
        prev = s
