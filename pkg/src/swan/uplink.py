"""Uplink placement and exact SNR for the SS, SA and SM protocols.

Every active segment carries exactly one activated PA.  Placements are
described by :class:`Placement`; SNRs are returned as :class:`SnrReport`
with the decomposition

    snr = snr_scale * eta * freespace_term * waveguide_gain / noise_scale

where ``freespace_term`` is the aggregate evaluated with unit in-waveguide
amplitudes (phases kept) and ``waveguide_gain`` is the ratio of the lossy to
the lossless aggregate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import InfeasibleLayout, InvalidArgument, NumericDomainError
from .phys import LinkBudget, RadioConfig, UserLocation, WaveguideLayout, nearest_segment

PROTOCOLS = ("SS", "SA", "SM")


@dataclass(frozen=True)
class Placement:
    """One activated PA per active segment.

    Attributes
    ----------
    protocol : str
        ``"SS"``, ``"SA"`` or ``"SM"``.
    segments : ndarray of int
        Active segment indices (1-based, ascending).
    positions : ndarray
        PA x-coordinate in each active segment.
    shifts : ndarray
        Fine-tuning shift applied after the max/min rule (>= 0).
    selected_segment : int or None
        ``m*`` for SS placements.
    events : tuple of str
        Noteworthy situations met while placing (clamps, vacuous branches).
    """

    protocol: str
    segments: np.ndarray
    positions: np.ndarray
    shifts: np.ndarray
    selected_segment: int | None = None
    events: tuple[str, ...] = field(default=())

    def __post_init__(self) -> None:
        if self.protocol not in PROTOCOLS:
            raise InvalidArgument(f"unknown protocol {self.protocol!r}")
        segs = np.asarray(self.segments, dtype=np.int64)
        pos = np.asarray(self.positions, dtype=float)
        nu = np.asarray(self.shifts, dtype=float)
        if not (segs.shape == pos.shape == nu.shape) or segs.ndim != 1:
            raise InvalidArgument("segments, positions and shifts must be 1-D arrays of equal length")
        for arr in (segs, pos, nu):
            arr.setflags(write=False)
        object.__setattr__(self, "segments", segs)
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "shifts", nu)

    @property
    def num_active(self) -> int:
        return int(self.segments.size)

    def is_feasible(self, layout: WaveguideLayout, tol: float = 1e-12) -> bool:
        """Segment bounds and pairwise minimum spacing, checked exhaustively."""
        feeds = layout.first_feed_x + (self.segments - 1) * layout.segment_length
        if np.any(self.positions < feeds - tol) or np.any(self.positions > feeds + layout.segment_length + tol):
            return False
        if np.any(self.shifts < 0.0):
            return False
        if self.positions.size > 1:
            gaps = np.abs(self.positions[:, None] - self.positions[None, :])
            np.fill_diagonal(gaps, np.inf)
            if gaps.min() < layout.min_spacing - tol:
                return False
        return True


@dataclass(frozen=True)
class SnrReport:
    protocol: str
    snr: float
    freespace_term: float
    waveguide_gain: float
    noise_scale: int = 1

    @property
    def snr_db(self) -> float:
        return 10.0 * math.log10(self.snr)

    @property
    def rate(self) -> float:
        """Achievable rate ``log2(1 + snr)`` in bit/s/Hz."""
        return math.log2(1.0 + self.snr)


# ---------------------------------------------------------------- SS

def ss_place(user: UserLocation, layout: WaveguideLayout, radio: RadioConfig, mode: str = "exact") -> Placement:
    """Single activated PA in the segment nearest to the user.

    ``mode="exact"`` maximises the loss-aware SNR inside segment ``m*``;
    ``mode="projection"`` puts the PA at ``u_x``.  With ``alpha = 0`` both
    coincide.
    """
    if mode not in ("exact", "projection"):
        raise InvalidArgument(f"mode must be 'exact' or 'projection', got {mode!r}")
    m = nearest_segment(user.u_x, layout)
    lo, hi = layout.segment_bounds(m)
    events: list[str] = []
    alpha = radio.alpha
    if mode == "projection" or alpha == 0.0:
        psi = user.u_x
    else:
        rel = user.u_x - lo
        t = 2.0 * alpha * rel - 1.0
        if abs(t) > 1.0:
            # right-hand side of the branch test is negative: feed branch is vacuous
            events.append("ss_branch_vacuous")
        # (1 - t^2) / (4 alpha^2) and (-1 + sqrt(1 - 4 alpha^2 c_y)) / (2 alpha), rewritten so
        # that alpha^2 never appears alone (it underflows for tiny alpha)
        rhs = rel * (1.0 - alpha * rel) / alpha
        if user.c_y >= rhs:
            psi = lo
        else:
            q = 2.0 * alpha * user.c_y
            psi = user.u_x - q / (1.0 + math.sqrt(1.0 - 2.0 * alpha * q))
    psi = min(max(psi, lo), hi)
    return Placement("SS", np.array([m]), np.array([psi]), np.array([0.0]), selected_segment=m, events=tuple(events))


def ss_snr(
    user: UserLocation,
    placement: Placement,
    layout: WaveguideLayout,
    radio: RadioConfig,
    budget: LinkBudget,
    lossy: bool = True,
) -> SnrReport:
    if placement.num_active != 1:
        raise InvalidArgument("SS placement must have exactly one active segment")
    m = int(placement.segments[0])
    if placement.selected_segment is not None and placement.selected_segment != m:
        raise InvalidArgument("selected segment does not match the active segment")
    psi = float(placement.positions[0])
    feed = layout.feed_x(m)
    fs = 1.0 / ((user.u_x - psi) ** 2 + user.c_y)
    gain = 10.0 ** (-radio.kappa * abs(psi - feed) / 10.0) if lossy else 1.0
    return SnrReport("SS", budget.snr_scale * radio.eta * fs * gain, fs, gain, 1)


def conventional_uplink_snr(
    user: UserLocation,
    layout: WaveguideLayout,
    radio: RadioConfig,
    budget: LinkBudget,
    lossy: bool = True,
) -> SnrReport:
    """Single PA at the user projection on one waveguide fed at ``first_feed_x``.

    Any segmented ``layout`` is accepted; only its span start is used.
    """
    fs = 1.0 / user.c_y
    gain = 10.0 ** (-radio.kappa * abs(user.u_x - layout.first_feed_x) / 10.0) if lossy else 1.0
    return SnrReport("SS", budget.snr_scale * radio.eta * fs * gain, fs, gain, 1)


# ---------------------------------------------------------------- phase alignment

def wrapped_target(d_here: float, d_ref: float, wavelength: float, direction: int = 1) -> float:
    """Closest path length at or beyond ``d_here`` (in ``direction``) congruent to ``d_ref`` mod ``wavelength``."""
    return kernels.wrapped_target(float(d_here), float(d_ref), float(wavelength), 1 if direction > 0 else -1)


def phase_align_shift(
    anchor_pos: float,
    feed_x: float,
    user: UserLocation,
    radio: RadioConfig,
    target_dist: float,
    direction: int = 1,
) -> float:
    """Shift ``nu >= 0`` moving a PA from ``anchor_pos`` so its path length equals ``target_dist``.

    The path length ``d(x) = sqrt((x-u_x)^2 + c_y) + n_eff (x - feed_x)`` is
    strictly increasing, so the shift is applied in ``+x`` when
    ``target_dist >= d(anchor_pos)`` (``direction=1``) and in ``-x`` for
    ``direction=-1``.
    """
    d_here = kernels.path_length(anchor_pos, feed_x, user.u_x, user.c_y, radio.n_eff)
    slack = 1e-12 * (1.0 + abs(d_here))
    if direction > 0 and target_dist < d_here - slack:
        raise InvalidArgument("target distance lies left of the anchor for a rightward shift")
    if direction < 0 and target_dist > d_here + slack:
        raise InvalidArgument("target distance lies right of the anchor for a leftward shift")
    x = kernels.solve_position(float(target_dist), float(feed_x), user.u_x, user.c_y, radio.n_eff)
    if x != x:
        raise NumericDomainError("negative discriminant while solving for the aligned position")
    nu = x - anchor_pos if direction > 0 else anchor_pos - x
    return max(nu, 0.0)


def _event_names(flags: np.ndarray, segs: np.ndarray) -> list[str]:
    return [f"clamped:{int(s)}" for s, f in zip(segs, flags) if f == kernels.CLAMPED]


def _sweep_place(protocol: str, user: UserLocation, layout: WaveguideLayout, radio: RadioConfig | None, align: bool) -> Placement:
    if layout.segment_length <= layout.min_spacing:
        raise InfeasibleLayout("segment length must exceed the minimum spacing")
    m_star = nearest_segment(user.u_x, layout)
    feeds = layout.feed_xs
    n_eff = radio.n_eff if radio is not None else 1.0
    wl = radio.wavelength if radio is not None else 1.0
    d_ref = kernels.path_length(user.u_x, feeds[m_star - 1], user.u_x, user.c_y, n_eff)
    common = (user.u_x, user.c_y, n_eff, wl, d_ref, layout.min_spacing, align)

    right_feeds = np.ascontiguousarray(feeds[m_star:])
    left_feeds = np.ascontiguousarray(feeds[: m_star - 1][::-1])
    rp, rs, rf = kernels.segment_sweep(right_feeds, layout.segment_length, user.u_x, 1, *common)
    lp, ls, lf = kernels.segment_sweep(left_feeds, layout.segment_length, user.u_x, -1, *common)
    if np.any(rf == kernels.NO_ROOM) or np.any(lf == kernels.NO_ROOM):
        raise InfeasibleLayout("no admissible PA position in some segment")

    right_segs = np.arange(m_star + 1, layout.num_segments + 1)
    left_segs = np.arange(m_star - 1, 0, -1)
    segs = np.concatenate([left_segs[::-1], [m_star], right_segs])
    pos = np.concatenate([lp[::-1], [user.u_x], rp])
    nu = np.concatenate([ls[::-1], [0.0], rs])
    events = _event_names(lf[::-1], left_segs[::-1]) + _event_names(rf, right_segs)
    return Placement(protocol, segs, pos, nu, events=tuple(events))


def sa_place(user: UserLocation, layout: WaveguideLayout, radio: RadioConfig) -> Placement:
    """Phase-aligned one-PA-per-segment placement for segment aggregation.

    The PA of segment ``m*`` sits at ``u_x``.  Sweeping outward, each next PA
    starts at the nearest admissible point (segment edge or previous PA plus
    the minimum spacing) and is then shifted away from the user until its
    path length is congruent with the reference one modulo the wavelength.
    A shift that would leave the segment is clamped to the segment end and
    reported in ``events``.
    """
    return _sweep_place("SA", user, layout, radio, align=True)


def sm_place(user: UserLocation, layout: WaveguideLayout) -> Placement:
    """Same sweep as :func:`sa_place` without fine-tuning (all shifts zero)."""
    return _sweep_place("SM", user, layout, None, align=False)


# ---------------------------------------------------------------- coherent sums

def _terms(user: UserLocation, positions, feeds, radio: RadioConfig, lossy: bool):
    """Per-PA complex channels ``h_i * h_o`` without the ``sqrt(eta)`` factor.

    Returns ``(lossy_terms, unit_amplitude_terms)``.
    """
    positions = np.asarray(positions, dtype=float)
    dist = np.abs(positions - feeds)
    r = np.sqrt((user.u_x - positions) ** 2 + user.c_y)
    phase = np.exp(-1j * (radio.wavenumber * r + 2.0 * np.pi * dist / radio.guided_wavelength))
    unit = phase / r
    if lossy and radio.kappa > 0.0:
        return unit * 10.0 ** (-radio.kappa * dist / 20.0), unit
    return unit, unit


def channel_vector(
    user: UserLocation,
    placement: Placement,
    layout: WaveguideLayout,
    radio: RadioConfig,
    lossy: bool = True,
) -> np.ndarray:
    """Complex uplink channel ``h_i * h_o`` of every active PA (segment order)."""
    feeds = layout.first_feed_x + (placement.segments - 1) * layout.segment_length
    h, _ = _terms(user, placement.positions, feeds, radio, lossy)
    return math.sqrt(radio.eta) * h


def sa_snr(
    user: UserLocation,
    placement: Placement,
    layout: WaveguideLayout,
    radio: RadioConfig,
    budget: LinkBudget,
    lossy: bool = True,
) -> SnrReport:
    """Coherent sum over the active segments with aggregated noise ``M sigma^2``."""
    if placement.num_active < 1:
        raise InvalidArgument("placement has no active segment")
    feeds = layout.first_feed_x + (placement.segments - 1) * layout.segment_length
    h, unit = _terms(user, placement.positions, feeds, radio, lossy)
    lossless = float(abs(unit.sum()) ** 2)
    total = float(abs(h.sum()) ** 2)
    m = placement.num_active
    gain = total / lossless if h is not unit else 1.0
    return SnrReport("SA", budget.snr_scale * radio.eta * total / m, lossless, gain, m)


def sm_snr(
    user: UserLocation,
    placement: Placement,
    layout: WaveguideLayout,
    radio: RadioConfig,
    budget: LinkBudget,
    lossy: bool = True,
) -> SnrReport:
    """Maximal-ratio combining over the active segments (incoherent power sum)."""
    if placement.num_active < 1:
        raise InvalidArgument("placement has no active segment")
    feeds = layout.first_feed_x + (placement.segments - 1) * layout.segment_length
    h, unit = _terms(user, placement.positions, feeds, radio, lossy)
    lossless = float(np.sum(unit.real**2 + unit.imag**2))
    total = float(np.sum(h.real**2 + h.imag**2))
    gain = total / lossless if h is not unit else 1.0
    return SnrReport("SM", budget.snr_scale * radio.eta * total, lossless, gain, 1)


def phase_spread(user: UserLocation, positions, feeds, radio: RadioConfig) -> float:
    """Largest pairwise wrapped phase difference (rad) among PAs fed from ``feeds``.

    Works on path lengths relative to the first PA, so the result stays
    accurate for long waveguides where the absolute phase is large.
    """
    positions = np.asarray(positions, dtype=float)
    feeds = np.broadcast_to(np.asarray(feeds, dtype=float), positions.shape)
    if positions.size < 2:
        return 0.0
    d = np.sqrt((positions - user.u_x) ** 2 + user.c_y) + radio.n_eff * (positions - feeds)
    wl = radio.wavelength
    rel = np.remainder(d - d[0] + 0.5 * wl, wl) - 0.5 * wl
    # circular spread: the smallest arc containing all points
    ang = np.sort(rel * (2.0 * np.pi / wl))
    gaps = np.diff(np.concatenate([ang, [ang[0] + 2.0 * np.pi]]))
    return float(2.0 * np.pi - gaps.max())


def placement_phase_spread(user: UserLocation, placement: Placement, layout: WaveguideLayout, radio: RadioConfig) -> float:
    feeds = layout.first_feed_x + (placement.segments - 1) * layout.segment_length
    return phase_spread(user, placement.positions, feeds, radio)
