"""Radio constants, waveguide geometry and the two channel coefficients.

Everything is kept in SI linear units: metres, watts, linear power ratios.
Conversion from dB happens only at the command-line boundary
(:func:`dbm_to_watt` is provided for that purpose).

Segment indices are 1-based throughout the package, so segment ``m`` has its
feed point at ``first_feed_x + (m - 1) * segment_length``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import InvalidArgument, OutOfRange

#: Speed of light in vacuum, m/s.
SPEED_OF_LIGHT = 299_792_458.0


def dbm_to_watt(value_dbm: float) -> float:
    return 10.0 ** ((value_dbm - 30.0) / 10.0)


def watt_to_dbm(value_w: float) -> float:
    return 10.0 * math.log10(value_w) + 30.0


def linear_to_db(value: float) -> float:
    return 10.0 * math.log10(value)


@dataclass(frozen=True)
class RadioConfig:
    """Carrier-derived constants of one deployment.

    Build instances with :func:`make_radio_config`; the derived fields are
    not validated against each other when the constructor is called directly.
    """

    carrier_freq: float
    wavelength: float
    guided_wavelength: float
    wavenumber: float
    eta: float
    n_eff: float
    kappa: float
    alpha: float

    def lossless(self) -> "RadioConfig":
        """Same radio with the in-waveguide attenuation switched off."""
        return make_radio_config(self.carrier_freq, self.n_eff, 0.0)

    def with_kappa(self, kappa: float) -> "RadioConfig":
        return make_radio_config(self.carrier_freq, self.n_eff, kappa)


def make_radio_config(carrier_freq: float, n_eff: float, kappa: float) -> RadioConfig:
    """Derive wavelength, wavenumber, free-space gain constant and alpha.

    Parameters
    ----------
    carrier_freq : float
        Carrier frequency in Hz.
    n_eff : float
        Effective refractive index of the dielectric waveguide (>= 1).
    kappa : float
        Average in-waveguide attenuation in dB/m (>= 0).
    """
    if not (math.isfinite(carrier_freq) and carrier_freq > 0.0):
        raise InvalidArgument(f"carrier_freq must be positive, got {carrier_freq!r}")
    if not (math.isfinite(n_eff) and n_eff >= 1.0):
        raise InvalidArgument(f"n_eff must be >= 1, got {n_eff!r}")
    if not (math.isfinite(kappa) and kappa >= 0.0):
        raise InvalidArgument(f"kappa must be >= 0, got {kappa!r}")
    wavelength = SPEED_OF_LIGHT / carrier_freq
    return RadioConfig(
        carrier_freq=float(carrier_freq),
        wavelength=wavelength,
        guided_wavelength=wavelength / n_eff,
        wavenumber=2.0 * math.pi / wavelength,
        eta=SPEED_OF_LIGHT**2 / (16.0 * math.pi**2 * carrier_freq**2),
        n_eff=float(n_eff),
        kappa=float(kappa),
        alpha=kappa * math.log(10.0) / 20.0,
    )


@dataclass(frozen=True)
class WaveguideLayout:
    """Geometry of a segmented waveguide running along the x-axis.

    ``num_segments`` segments of length ``segment_length`` are placed end to
    end starting at ``first_feed_x``; each feed sits at the left end of its
    segment.  The waveguide runs at height ``height`` above the ground plane
    and at ``y = lateral_offset``.
    """

    num_segments: int
    segment_length: float
    first_feed_x: float
    lateral_offset: float = 0.0
    height: float = 3.0
    min_spacing: float = 5e-3

    def __post_init__(self) -> None:
        if int(self.num_segments) != self.num_segments or self.num_segments < 1:
            raise InvalidArgument(f"num_segments must be a positive integer, got {self.num_segments!r}")
        object.__setattr__(self, "num_segments", int(self.num_segments))
        if not self.segment_length > 0.0:
            raise InvalidArgument("segment_length must be positive")
        if not self.height > 0.0:
            raise InvalidArgument("height must be positive")
        if not self.min_spacing > 0.0:
            raise InvalidArgument("min_spacing must be positive")

    @classmethod
    def centered(
        cls,
        side_length: float,
        num_segments: int,
        *,
        height: float = 3.0,
        lateral_offset: float = 0.0,
        min_spacing: float = 5e-3,
    ) -> "WaveguideLayout":
        """Layout covering ``[-side_length/2, side_length/2]`` with ``num_segments`` segments."""
        return cls(
            num_segments=num_segments,
            segment_length=side_length / num_segments,
            first_feed_x=-side_length / 2.0,
            lateral_offset=lateral_offset,
            height=height,
            min_spacing=min_spacing,
        )

    @property
    def side_length(self) -> float:
        return self.segment_length * self.num_segments

    @cached_property
    def feed_xs(self) -> np.ndarray:
        xs = self.first_feed_x + self.segment_length * np.arange(self.num_segments, dtype=float)
        xs.setflags(write=False)
        return xs

    def feed_x(self, m: int) -> float:
        if not 1 <= m <= self.num_segments:
            raise InvalidArgument(f"segment index {m} outside [1, {self.num_segments}]")
        return self.first_feed_x + (m - 1) * self.segment_length

    def segment_bounds(self, m: int) -> tuple[float, float]:
        lo = self.feed_x(m)
        return lo, lo + self.segment_length

    @property
    def max_pas_per_segment(self) -> int:
        return int(math.floor(self.segment_length / self.min_spacing)) + 1

    def as_single_waveguide(self) -> "WaveguideLayout":
        """Conventional PASS counterpart: one waveguide over the same span."""
        return WaveguideLayout(
            num_segments=1,
            segment_length=self.side_length,
            first_feed_x=self.first_feed_x,
            lateral_offset=self.lateral_offset,
            height=self.height,
            min_spacing=self.min_spacing,
        )


@dataclass(frozen=True)
class UserLocation:
    """Planar user position and its squared transverse distance ``c_y``.

    ``c_y = (u_y - lateral_offset)**2 + height**2`` with respect to a layout;
    use :meth:`on` to compute it.  Analytic code may construct the object
    with ``c_y`` directly.
    """

    u_x: float
    u_y: float
    c_y: float

    def __post_init__(self) -> None:
        if not self.c_y > 0.0:
            raise InvalidArgument(f"c_y must be positive, got {self.c_y!r}")

    @classmethod
    def on(cls, layout: WaveguideLayout, u_x: float, u_y: float = 0.0) -> "UserLocation":
        c_y = (u_y - layout.lateral_offset) ** 2 + layout.height**2
        return cls(float(u_x), float(u_y), c_y)


@dataclass(frozen=True)
class LinkBudget:
    tx_power: float
    noise_power: float

    def __post_init__(self) -> None:
        if not (self.tx_power > 0.0 and self.noise_power > 0.0):
            raise InvalidArgument("tx_power and noise_power must be positive")

    @classmethod
    def from_dbm(cls, tx_power_dbm: float, noise_power_dbm: float) -> "LinkBudget":
        return cls(dbm_to_watt(tx_power_dbm), dbm_to_watt(noise_power_dbm))

    @property
    def snr_scale(self) -> float:
        return self.tx_power / self.noise_power


def freespace_coeff(user: UserLocation, pa_x: float, radio: RadioConfig) -> complex:
    """Spherical-wave LoS coefficient ``sqrt(eta) * exp(-j k0 r) / r``.

    The PA sits at ``(pa_x, lateral_offset, height)``; all transverse geometry
    is carried by ``user.c_y``.
    """
    r = math.sqrt((user.u_x - pa_x) ** 2 + user.c_y)
    return math.sqrt(radio.eta) * cmath.exp(-1j * radio.wavenumber * r) / r


def inwaveguide_coeff(pa_x: float, feed_x: float, radio: RadioConfig) -> complex:
    """Feed-to-PA propagation ``10**(-kappa*dist/20) * exp(-j 2 pi dist / lambda_g)``."""
    dist = abs(pa_x - feed_x)
    amplitude = 10.0 ** (-radio.kappa * dist / 20.0)
    return amplitude * cmath.exp(-1j * 2.0 * math.pi * dist / radio.guided_wavelength)


def nearest_segment(u_x: float, layout: WaveguideLayout) -> int:
    """Index of the segment above the user's projection.

    Boundary points belong to the segment on their left; ``u_x`` equal to the
    first feed resolves to segment 1.
    """
    lo = layout.first_feed_x
    hi = lo + layout.side_length
    if not lo <= u_x <= hi:
        raise OutOfRange(f"u_x={u_x!r} outside the waveguide span [{lo!r}, {hi!r}]")
    m = math.ceil((u_x - lo) / layout.segment_length)
    return min(max(m, 1), layout.num_segments)


def path_phase_distance(pa_x, feed_x, user: UserLocation, n_eff: float):
    """Free-space plus effective in-waveguide path length ``r + n_eff*(pa_x - feed_x)``.

    Multiplying by the wavenumber gives the total propagation phase; works on
    scalars and numpy arrays alike.
    """
    return np.sqrt((pa_x - user.u_x) ** 2 + user.c_y) + n_eff * (pa_x - feed_x)
