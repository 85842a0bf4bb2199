"""Downlink placement and SNR with several activated PAs per segment.

Power is split equally over the ``N_m`` PAs of a segment (``1/sqrt(N_m)``
amplitude) and, for SA, equally over the ``M`` active segments.  SM applies
maximal-ratio transmission across segments.

Within a segment the PAs are laid out from an anchor PA outward in two
chains: the right chain takes ``N // 2`` PAs and the left chain the rest.
When a chain hits the segment boundary its remaining PAs are moved to the
other side.  Every PA is shifted away from its predecessor until its path
length matches the reference modulo the wavelength, so the achieved spacing
is usually larger than the minimum spacing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import kernels
from .errors import InfeasibleLayout, InvalidArgument
from .phys import LinkBudget, RadioConfig, UserLocation, WaveguideLayout, nearest_segment
from .uplink import PROTOCOLS, SnrReport, _terms

DENSE = "dense"


@dataclass(frozen=True)
class MultiPlacement:
    """Per-segment PA coordinates for a downlink transmission.

    ``positions[i]`` and ``shifts[i]`` belong to segment ``segments[i]``;
    segments are stored in ascending order.
    """

    protocol: str
    segments: np.ndarray
    positions: tuple[np.ndarray, ...]
    shifts: tuple[np.ndarray, ...]
    selected_segment: int | None = None
    events: tuple[str, ...] = field(default=())

    def __post_init__(self) -> None:
        if self.protocol not in PROTOCOLS:
            raise InvalidArgument(f"unknown protocol {self.protocol!r}")
        segs = np.asarray(self.segments, dtype=np.int64)
        if segs.ndim != 1 or len(self.positions) != segs.size or len(self.shifts) != segs.size:
            raise InvalidArgument("one position and one shift array per active segment required")
        pos = tuple(np.asarray(p, dtype=float) for p in self.positions)
        nu = tuple(np.asarray(s, dtype=float) for s in self.shifts)
        for arr in (segs, *pos, *nu):
            arr.setflags(write=False)
        object.__setattr__(self, "segments", segs)
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "shifts", nu)

    @property
    def counts(self) -> np.ndarray:
        return np.array([p.size for p in self.positions], dtype=np.int64)

    @property
    def total_count(self) -> int:
        return int(sum(p.size for p in self.positions))

    def all_positions(self) -> np.ndarray:
        return np.concatenate(self.positions) if self.positions else np.empty(0)

    def feeds(self, layout: WaveguideLayout) -> np.ndarray:
        """Feed coordinate of every PA, aligned with :meth:`all_positions`."""
        return np.concatenate(
            [np.full(p.size, layout.feed_x(int(m))) for m, p in zip(self.segments, self.positions)]
        )

    def is_feasible(self, layout: WaveguideLayout, tol: float = 1e-12) -> bool:
        """Segment bounds, per-segment capacity and global pairwise spacing."""
        cap = layout.max_pas_per_segment
        for m, p in zip(self.segments, self.positions):
            lo, hi = layout.segment_bounds(int(m))
            if p.size > cap or np.any(p < lo - tol) or np.any(p > hi + tol):
                return False
        if any(np.any(s < 0.0) for s in self.shifts):
            return False
        xs = np.sort(self.all_positions())
        return bool(xs.size < 2 or np.diff(xs).min() >= layout.min_spacing - tol)


@dataclass(frozen=True)
class MrtWeights:
    """Unit-norm transmit weights over the active segments."""

    segments: np.ndarray
    weights: np.ndarray

    def __post_init__(self) -> None:
        w = np.asarray(self.weights, dtype=complex)
        norm = float(np.sum(w.real**2 + w.imag**2))
        if not math.isclose(norm, 1.0, rel_tol=1e-9):
            raise InvalidArgument(f"MRT weights must have unit norm, got {norm!r}")
        object.__setattr__(self, "weights", w)


# ---------------------------------------------------------------- placement

def _single(prev: float, lo: float, hi: float, feed: float, direction: int, user, radio, d_ref, delta, clamp):
    pos, nu, flags = kernels.fill_chain(
        prev, lo, hi, feed, direction, 1, user.u_x, user.c_y, radio.n_eff, radio.wavelength, d_ref, delta, True, clamp
    )
    return pos, nu, flags


def _chain(prev, lo, hi, feed, direction, count, user, radio, d_ref, delta):
    return kernels.fill_chain(
        prev, lo, hi, feed, direction, count, user.u_x, user.c_y, radio.n_eff, radio.wavelength, d_ref, delta, True, False
    )


def _fill_segment(anchor: float, anchor_nu: float, lo: float, hi: float, feed: float, count, user, radio, d_ref, delta):
    """Anchor plus two outward chains inside ``[lo, hi]``; returns sorted positions and shifts."""
    if count == DENSE:
        rp, rs, _ = _chain(anchor, lo, hi, feed, 1, -1, user, radio, d_ref, delta)
        lp, ls, _ = _chain(anchor, lo, hi, feed, -1, -1, user, radio, d_ref, delta)
    else:
        n_right = count // 2
        n_left = count - 1 - n_right
        rp, rs, _ = _chain(anchor, lo, hi, feed, 1, n_right, user, radio, d_ref, delta)
        n_left += n_right - rp.size
        lp, ls, _ = _chain(anchor, lo, hi, feed, -1, n_left, user, radio, d_ref, delta)
        short = n_left - lp.size
        if short > 0:
            start = rp[-1] if rp.size else anchor
            ep, es, _ = _chain(start, lo, hi, feed, 1, short, user, radio, d_ref, delta)
            rp = np.concatenate([rp, ep])
            rs = np.concatenate([rs, es])
            short -= ep.size
        if short > 0:
            raise InfeasibleLayout(
                f"only {count - short} of {count} phase-aligned PAs fit in the segment at {feed!r}"
            )
    pos = np.concatenate([lp[::-1], [anchor], rp])
    nu = np.concatenate([ls[::-1], [anchor_nu], rs])
    return pos, nu


def _resolve_counts(counts, segs: Sequence[int], layout: WaveguideLayout) -> dict[int, object]:
    cap = layout.max_pas_per_segment
    if isinstance(counts, str):
        if counts != DENSE:
            raise InvalidArgument(f"counts must be an int, a sequence or 'dense', got {counts!r}")
        return {m: DENSE for m in segs}
    if np.ndim(counts) == 0:
        values = [counts] * len(segs)
    else:
        values = list(counts)
        if len(values) != len(segs):
            raise InvalidArgument(f"{len(values)} counts given for {len(segs)} active segments")
    out: dict[int, object] = {}
    for m, n in zip(segs, values):
        if int(n) != n or n < 1:
            raise InvalidArgument(f"PA count must be a positive integer, got {n!r}")
        if n > cap:
            raise InfeasibleLayout(f"{int(n)} PAs exceed the per-segment capacity {cap}")
        out[m] = int(n)
    return out


def dl_place(
    protocol: str,
    user: UserLocation,
    layout: WaveguideLayout,
    radio: RadioConfig,
    counts=1,
    segments: Sequence[int] | None = None,
) -> MultiPlacement:
    """Multi-PA downlink placement.

    Parameters
    ----------
    protocol : {"SS", "SA", "SM"}
    counts : int, sequence of int or "dense"
        PAs per active segment.  ``"dense"`` keeps adding phase-aligned PAs
        until both segment ends are reached.
    segments : sequence of int, optional
        Active segments for SA/SM (default: all).  Must contain ``m*``.

    Notes
    -----
    SS uses segment ``m*`` only, aligned to the path length at ``u_x``.  SA
    and SM visit segments outward from ``m*``; each segment's anchor starts
    at the admissible point closest to the PAs already placed (keeping the
    global minimum spacing).  SA aligns every PA to the reference at
    ``u_x``; SM aligns each segment to its own unshifted anchor.
    """
    if protocol not in PROTOCOLS:
        raise InvalidArgument(f"unknown protocol {protocol!r}")
    if layout.segment_length <= layout.min_spacing:
        raise InfeasibleLayout("segment length must exceed the minimum spacing")
    m_star = nearest_segment(user.u_x, layout)
    if protocol == "SS":
        segs = [m_star]
    elif segments is None:
        segs = list(range(1, layout.num_segments + 1))
    else:
        segs = sorted({int(m) for m in segments})
        if m_star not in segs:
            raise InvalidArgument(f"active segments must contain the user segment {m_star}")
        if segs[0] < 1 or segs[-1] > layout.num_segments:
            raise InvalidArgument("active segment index out of range")
    per_seg = _resolve_counts(counts, segs, layout)
    delta = layout.min_spacing
    seg_len = layout.segment_length

    lo, hi = layout.segment_bounds(m_star)
    d_ref = kernels.path_length(user.u_x, lo, user.u_x, user.c_y, radio.n_eff)
    pos, nu = _fill_segment(user.u_x, 0.0, lo, hi, lo, per_seg[m_star], user, radio, d_ref, delta)
    placed: dict[int, tuple[np.ndarray, np.ndarray]] = {m_star: (pos, nu)}
    events: list[str] = []

    for direction, order in ((1, [m for m in segs if m > m_star]), (-1, [m for m in reversed(segs) if m < m_star])):
        edge = placed[m_star][0][-1] if direction > 0 else placed[m_star][0][0]
        for m in order:
            feed = layout.first_feed_x + (m - 1) * seg_len
            if direction > 0:
                s_lo, s_hi = max(feed, edge + delta), feed + seg_len
                hat = s_lo
            else:
                s_lo, s_hi = feed, min(feed + seg_len, edge - delta)
                hat = s_hi
            if s_lo > s_hi:
                raise InfeasibleLayout(f"no room left in segment {m} after the minimum spacing")
            if protocol == "SA":
                prev = -math.inf if direction > 0 else math.inf
                ap, an, af = _single(prev, s_lo, s_hi, feed, direction, user, radio, d_ref, delta, True)
                if ap.size == 0:
                    raise InfeasibleLayout(f"no aligned position for the anchor of segment {m}")
                if af[0] == kernels.CLAMPED:
                    events.append(f"clamped:{m}")
                anchor, anchor_nu, ref = float(ap[0]), float(an[0]), d_ref
            else:
                anchor, anchor_nu = hat, 0.0
                ref = kernels.path_length(hat, feed, user.u_x, user.c_y, radio.n_eff)
            pos, nu = _fill_segment(anchor, anchor_nu, s_lo, s_hi, feed, per_seg[m], user, radio, ref, delta)
            placed[m] = (pos, nu)
            edge = pos[-1] if direction > 0 else pos[0]

    order = sorted(placed)
    return MultiPlacement(
        protocol,
        np.array(order),
        tuple(placed[m][0] for m in order),
        tuple(placed[m][1] for m in order),
        selected_segment=m_star if protocol == "SS" else None,
        events=tuple(events),
    )


def pass1_place(user: UserLocation, layout: WaveguideLayout, radio: RadioConfig, count) -> MultiPlacement:
    """Conventional PASS-1 baseline: ``count`` PAs around the user on one long waveguide."""
    return dl_place("SS", user, layout.as_single_waveguide(), radio, count)


def pass2_place(user: UserLocation, layout: WaveguideLayout, radio: RadioConfig) -> MultiPlacement:
    """Conventional PASS-2 baseline: densest phase-aligned fill of the whole span."""
    return dl_place("SS", user, layout.as_single_waveguide(), radio, DENSE)


# ---------------------------------------------------------------- SNR

def _segment_sums(user: UserLocation, placement: MultiPlacement, layout: WaveguideLayout, radio: RadioConfig, lossy: bool):
    lossy_sums, unit_sums = [], []
    for m, pos in zip(placement.segments, placement.positions):
        h, unit = _terms(user, pos, layout.feed_x(int(m)), radio, lossy)
        lossy_sums.append(h.sum() / math.sqrt(pos.size))
        unit_sums.append(unit.sum() / math.sqrt(pos.size))
    return np.array(lossy_sums), np.array(unit_sums)


def dl_snr(
    protocol: str,
    user: UserLocation,
    placement: MultiPlacement,
    layout: WaveguideLayout,
    radio: RadioConfig,
    budget: LinkBudget,
    lossy: bool = True,
) -> SnrReport:
    """Exact downlink SNR from the complex coefficients of every PA."""
    if protocol != placement.protocol:
        raise InvalidArgument(f"placement built for {placement.protocol}, evaluated as {protocol}")
    if protocol == "SS" and placement.segments.size != 1:
        raise InvalidArgument("SS placement must use exactly one segment")
    g, g_unit = _segment_sums(user, placement, layout, radio, lossy)
    scale = budget.snr_scale * radio.eta
    if protocol == "SM":
        total = float(np.sum(g.real**2 + g.imag**2))
        lossless = float(np.sum(g_unit.real**2 + g_unit.imag**2))
        noise = 1
    else:
        total = float(abs(g.sum()) ** 2)
        lossless = float(abs(g_unit.sum()) ** 2)
        noise = int(placement.segments.size) if protocol == "SA" else 1
    gain = total / lossless if (lossy and radio.kappa > 0.0) else 1.0
    return SnrReport(protocol, scale * total / noise, lossless, gain, noise)


def mrt_weights(
    user: UserLocation,
    placement: MultiPlacement,
    layout: WaveguideLayout,
    radio: RadioConfig,
    lossy: bool = True,
) -> MrtWeights:
    """Matched-filter weights ``g^* / ||g||`` over the per-segment effective channels."""
    g, _ = _segment_sums(user, placement, layout, radio, lossy)
    w = np.conj(g) / math.sqrt(float(np.sum(g.real**2 + g.imag**2)))
    return MrtWeights(placement.segments.copy(), w)


def dl_phase_spread(user: UserLocation, placement: MultiPlacement, layout: WaveguideLayout, radio: RadioConfig) -> float:
    """Largest wrapped phase difference among the terms combined coherently.

    For SS and SA that is every PA; for SM the worst segment is reported.
    """
    from .uplink import phase_spread

    if placement.protocol == "SM":
        return max(
            phase_spread(user, p, layout.feed_x(int(m)), radio) for m, p in zip(placement.segments, placement.positions)
        )
    return phase_spread(user, placement.all_positions(), placement.feeds(layout), radio)


def dl_ss_snr_curve(
    user: UserLocation,
    layout: WaveguideLayout,
    radio: RadioConfig,
    budget: LinkBudget,
    lossy: bool = True,
) -> np.ndarray:
    """Exact SS downlink SNR for every feasible ``N = 1, 2, ...`` in segment ``m*``.

    Both chains grow by prefix as ``N`` increases, so one dense fill gives
    all values in linear time.  Entry ``N - 1`` equals
    ``dl_snr("SS", ..., dl_place("SS", ..., counts=N))``.
    """
    m = nearest_segment(user.u_x, layout)
    lo, hi = layout.segment_bounds(m)
    d_ref = kernels.path_length(user.u_x, lo, user.u_x, user.c_y, radio.n_eff)
    delta = layout.min_spacing
    rp, _, _ = _chain(user.u_x, lo, hi, lo, 1, -1, user, radio, d_ref, delta)
    lp, _, _ = _chain(user.u_x, lo, hi, lo, -1, -1, user, radio, d_ref, delta)
    h0, _ = _terms(user, np.array([user.u_x]), lo, radio, lossy)
    hr, _ = _terms(user, rp, lo, radio, lossy)
    hl, _ = _terms(user, lp, lo, radio, lossy)
    cr = np.concatenate([[0.0], np.cumsum(hr)])
    cl = np.concatenate([[0.0], np.cumsum(hl)])
    n_max = 1 + rp.size + lp.size
    scale = budget.snr_scale * radio.eta
    out = np.empty(n_max)
    for n in range(1, n_max + 1):
        # same split and reallocation as _fill_segment
        nr = n // 2
        r_take = min(nr, rp.size)
        l_take = min(n - 1 - r_take, lp.size)
        r_take = n - 1 - l_take
        s = h0[0] + cr[r_take] + cl[l_take]
        out[n - 1] = scale * abs(s) ** 2 / n
    return out
