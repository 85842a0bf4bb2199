"""Pure-Python placement kernels (fallback for the compiled ``_kernels``).

Both implementations expose identical signatures and follow the same
arithmetic step by step, so results agree to rounding.

Path length of a PA at ``x`` fed from ``feed``::

    d(x) = sqrt((x - ux)**2 + cy) + n_eff * (x - feed)

``d`` is strictly increasing in ``x`` for ``n_eff >= 1``, so every target has
exactly one preimage.
"""

from __future__ import annotations

import math

import numpy as np

ALIGNED = 0
CLAMPED = 1
UNALIGNED = 2
NO_ROOM = 3

_NEWTON_STEPS = 4


def path_length(x: float, feed: float, ux: float, cy: float, n_eff: float) -> float:
    dx = x - ux
    return math.sqrt(dx * dx + cy) + n_eff * (x - feed)


def _fmod_pos(a: float, m: float) -> float:
    r = math.fmod(a, m)
    if r < 0.0:
        r += m
    return r


def wrapped_target(d_here: float, d_ref: float, wavelength: float, direction: int) -> float:
    """Nearest path length congruent to ``d_ref`` (mod wavelength) in ``direction``."""
    if direction > 0:
        return d_here + _fmod_pos(d_ref - d_here, wavelength)
    return d_here - _fmod_pos(d_here - d_ref, wavelength)


def solve_position(target: float, feed: float, ux: float, cy: float, n_eff: float) -> float:
    """Position ``x`` with ``d(x) == target``; NaN if the discriminant is negative."""
    b = target + n_eff * (feed - ux)
    if n_eff == 1.0:
        if b <= 0.0:
            return math.nan
        X = (b * b - cy) / (2.0 * b)
    else:
        disc = b * b + cy * (n_eff * n_eff - 1.0)
        if disc < 0.0:
            return math.nan
        # rationalised smaller root of (n^2-1) X^2 - 2 n b X + (b^2 - cy) = 0
        X = (b * b - cy) / (n_eff * b + math.sqrt(disc))
    for _ in range(_NEWTON_STEPS):
        r = math.sqrt(X * X + cy)
        f = r + n_eff * X - b
        step = f / (X / r + n_eff)
        X -= step
        if abs(step) <= 1e-16 * (1.0 + abs(X)):
            break
    return ux + X


def _place_one(
    psi_hat: float,
    lo: float,
    hi: float,
    feed: float,
    direction: int,
    ux: float,
    cy: float,
    n_eff: float,
    wavelength: float,
    d_ref: float,
    align: bool,
    clamp: bool,
) -> tuple[float, float, int]:
    if not align:
        return psi_hat, 0.0, UNALIGNED
    d_here = path_length(psi_hat, feed, ux, cy, n_eff)
    target = wrapped_target(d_here, d_ref, wavelength, direction)
    x = solve_position(target, feed, ux, cy, n_eff)
    if x != x:
        return math.nan, math.nan, NO_ROOM
    if direction > 0:
        x = max(x, psi_hat)
        if x > hi:
            if not clamp:
                return x, x - psi_hat, NO_ROOM
            return hi, hi - psi_hat, CLAMPED
        return x, x - psi_hat, ALIGNED
    x = min(x, psi_hat)
    if x < lo:
        if not clamp:
            return x, psi_hat - x, NO_ROOM
        return lo, psi_hat - lo, CLAMPED
    return x, psi_hat - x, ALIGNED


def fill_chain(
    prev: float,
    lo: float,
    hi: float,
    feed: float,
    direction: int,
    count: int,
    ux: float,
    cy: float,
    n_eff: float,
    wavelength: float,
    d_ref: float,
    delta: float,
    align: bool,
    clamp: bool,
):
    """Place up to ``count`` PAs stepping away from ``prev`` inside ``[lo, hi]``.

    Each candidate starts at ``max(lo, prev + delta)`` (or the mirrored rule for
    ``direction < 0``) and is then shifted away from ``prev`` until its path
    length is congruent with ``d_ref``.  ``count < 0`` fills until the interval
    is exhausted.  Returns ``(positions, shifts, flags)``.
    """
    positions: list[float] = []
    shifts: list[float] = []
    flags: list[int] = []
    remaining = count
    while remaining != 0:
        if direction > 0:
            psi_hat = max(lo, prev + delta)
            if psi_hat > hi:
                break
        else:
            psi_hat = min(hi, prev - delta)
            if psi_hat < lo:
                break
        x, nu, flag = _place_one(psi_hat, lo, hi, feed, direction, ux, cy, n_eff, wavelength, d_ref, align, clamp)
        if flag == NO_ROOM:
            break
        positions.append(x)
        shifts.append(nu)
        flags.append(flag)
        prev = x
        remaining -= 1
    return (
        np.asarray(positions, dtype=float),
        np.asarray(shifts, dtype=float),
        np.asarray(flags, dtype=np.int8),
    )


def segment_sweep(
    feeds,
    seg_len: float,
    prev: float,
    direction: int,
    ux: float,
    cy: float,
    n_eff: float,
    wavelength: float,
    d_ref: float,
    delta: float,
    align: bool,
):
    """One PA per segment, visiting ``feeds`` in order (outward from the user).

    Segment-bound overflow after alignment is clamped and flagged
    ``CLAMPED``; a segment with no admissible start point is flagged
    ``NO_ROOM`` and ends the sweep.
    """
    n = len(feeds)
    positions = np.full(n, math.nan)
    shifts = np.full(n, math.nan)
    flags = np.full(n, NO_ROOM, dtype=np.int8)
    for i in range(n):
        lo = float(feeds[i])
        hi = lo + seg_len
        if direction > 0:
            psi_hat = max(lo, prev + delta)
            if psi_hat > hi:
                break
        else:
            psi_hat = min(hi, prev - delta)
            if psi_hat < lo:
                break
        x, nu, flag = _place_one(psi_hat, lo, hi, lo, direction, ux, cy, n_eff, wavelength, d_ref, align, True)
        if flag == NO_ROOM:
            break
        positions[i] = x
        shifts[i] = nu
        flags[i] = flag
        prev = x
    return positions, shifts, flags
