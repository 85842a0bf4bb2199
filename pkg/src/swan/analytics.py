"""Closed-form averages, SNR approximations and scaling laws, plus their oracles.

Several closed forms as commonly printed carry transcription slips (``2 c_y`` where
the integral identity gives ``2 sqrt(c_y)``, a wrong sign and power in the
Euler-Maclaurin correction).  Every affected function takes
``form="derived"`` (default, re-derived from the exact sums) or
``form="printed"`` (literal printed expression) so both can be compared
against the brute-force oracles.

All SNR approximations return linear ratios and assume the user sits
directly below the centre of the middle segment of an odd number of
segments; other geometries raise :class:`UnsupportedGeometry`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np

from .errors import InvalidArgument, UndefinedDerivative, UnsupportedGeometry
from .phys import LinkBudget, RadioConfig, UserLocation, WaveguideLayout

FORMS = ("derived", "printed")


def _check_form(form: str) -> None:
    if form not in FORMS:
        raise InvalidArgument(f"form must be one of {FORMS}, got {form!r}")


def _check_odd(M: int) -> None:
    if int(M) != M or M < 1 or M % 2 == 0:
        raise UnsupportedGeometry(f"closed form derived for odd M with a centred user, got M={M!r}")


# ---------------------------------------------------------------- in-waveguide gain

@dataclass(frozen=True)
class GainCurvePoint:
    M: int
    gain: float
    conventional_gain: float
    ratio_to_conventional: float


def _check_gain_args(M, D_x, alpha) -> None:
    if not M >= 1:
        raise InvalidArgument(f"M must be >= 1, got {M!r}")
    if not D_x > 0.0:
        raise InvalidArgument(f"D_x must be positive, got {D_x!r}")
    if not alpha >= 0.0:
        raise InvalidArgument(f"alpha must be >= 0, got {alpha!r}")


def avg_gain_ss(M: float, D_x: float, alpha: float) -> float:
    """Average SS in-waveguide power gain ``(1 - exp(-2 alpha D_x / M)) / (2 alpha D_x / M)``.

    The user is uniform along the span and the PA is at its projection, so
    the feed distance is uniform on ``[0, D_x / M]``.
    """
    _check_gain_args(M, D_x, alpha)
    y = 2.0 * alpha * D_x / M
    if y == 0.0:
        return 1.0
    return -math.expm1(-y) / y


def conventional_avg_gain(D_x: float, alpha: float) -> float:
    """Average gain of one waveguide over the whole span (``avg_gain_ss`` at ``M = 1``)."""
    return avg_gain_ss(1, D_x, alpha)


def _one_minus_1py_emy(y: float) -> float:
    """``1 - (1 + y) exp(-y)`` without cancellation for small ``y``."""
    if y < 1e-3:
        # sum_{n>=2} (-1)^(n+1) (n-1) y^n / n!
        term, total = y * y / 2.0, 0.0
        for n in range(2, 10):
            total += term * (n - 1)
            term *= -y / (n + 1)
        return total
    return -math.expm1(-y) - y * math.exp(-y)


def gain_derivatives(M: float, D_x: float, alpha: float) -> tuple[float, float]:
    """First and second derivatives of :func:`avg_gain_ss` with respect to ``M``.

    With ``beta = 2 alpha D_x``::

        dA/dM   = (1 - (1 + beta/M) exp(-beta/M)) / beta   > 0
        d2A/dM2 = -(beta / M**3) exp(-beta/M)               < 0
    """
    _check_gain_args(M, D_x, alpha)
    if alpha == 0.0:
        raise UndefinedDerivative("gain is identically 1 when alpha = 0")
    beta = 2.0 * alpha * D_x
    y = beta / M
    first = _one_minus_1py_emy(y) / beta
    second = -(beta / M**3) * math.exp(-y)
    return first, second


def gain_ratio(M: float, D_x: float, alpha: float) -> float:
    """SWAN over conventional average gain, ``M (1 - e^{-beta/M}) / (1 - e^{-beta})``."""
    _check_gain_args(M, D_x, alpha)
    beta = 2.0 * alpha * D_x
    if beta == 0.0:
        return 1.0
    return M * math.expm1(-beta / M) / math.expm1(-beta)


def gain_ratio_limit(D_x: float, alpha: float) -> float:
    """``M -> infinity`` limit ``beta / (1 - e^{-beta})`` of :func:`gain_ratio`."""
    _check_gain_args(1, D_x, alpha)
    beta = 2.0 * alpha * D_x
    if beta == 0.0:
        return 1.0
    return -beta / math.expm1(-beta)


def gain_curve(Ms, D_x: float, alpha: float) -> list[GainCurvePoint]:
    conv = conventional_avg_gain(D_x, alpha)
    return [GainCurvePoint(int(M), avg_gain_ss(M, D_x, alpha), conv, gain_ratio(M, D_x, alpha)) for M in Ms]


# ---------------------------------------------------------------- SA uplink

@dataclass(frozen=True)
class ApproxParams:
    """Geometry for the closed forms.  Unused fields may stay ``None``."""

    c_y: float
    L: float | None = None
    M: int | None = None
    D_x: float | None = None
    delta: float | None = None
    N: int | None = None

    def __post_init__(self) -> None:
        if not self.c_y > 0.0:
            raise InvalidArgument("c_y must be positive")
        for name in ("L", "D_x", "delta"):
            v = getattr(self, name)
            if v is not None and not v > 0.0:
                raise InvalidArgument(f"{name} must be positive")
        if self.L is not None and self.M is not None and self.D_x is not None:
            if not math.isclose(self.L * self.M, self.D_x, rel_tol=1e-9):
                raise InvalidArgument("D_x must equal L * M")

    def side_length(self) -> float:
        if self.D_x is not None:
            return self.D_x
        if self.L is None or self.M is None:
            raise InvalidArgument("need D_x or both L and M")
        return self.L * self.M

    def segment_length(self) -> float:
        if self.L is not None:
            return self.L
        if self.D_x is None or self.M is None:
            raise InvalidArgument("need L or both D_x and M")
        return self.D_x / self.M


def _asinh_arg(x: float, c_y: float, form: str) -> float:
    # the integral of 1/sqrt(c + t^2) is asinh(t / sqrt(c)); the printed forms divide by c
    return x / (2.0 * math.sqrt(c_y)) if form == "derived" else x / (2.0 * c_y)


def lemma2_bracket(M: int, L: float, c_y: float, form: str = "derived") -> float:
    """Euler-Maclaurin estimate of ``1/sqrt(c_y) + 2 sum_m 1/sqrt(c_y + (L(m - 1/2))^2)``."""
    _check_form(form)
    _check_odd(M)
    half = (M - 1) * L / 2.0
    base = 1.0 / math.sqrt(c_y) + (2.0 / L) * math.asinh(_asinh_arg((M - 1) * L, c_y, form))
    if form == "derived":
        return base + ((M - 1) * L**2 / 24.0) / (c_y + half**2) ** 1.5
    return base - ((M - 1) / 24.0 * L**3) / (c_y**2 + half**2) ** 1.5


def sa_uplink_approx(
    variant: str,
    params: ApproxParams,
    budget: LinkBudget,
    eta: float,
    form: str = "derived",
) -> float:
    """Closed-form SA uplink SNR.

    Parameters
    ----------
    variant : {"lemma2", "fixed_Dx", "fixed_L"}
        ``lemma2`` keeps the Euler-Maclaurin correction and ``(M-1) L``;
        ``fixed_Dx`` drops the correction and substitutes ``(M-1) L ~ D_x``;
        ``fixed_L`` drops the correction only.
    """
    _check_form(form)
    if params.M is None:
        raise InvalidArgument("params.M is required")
    M = params.M
    _check_odd(M)
    c = params.c_y
    scale = budget.snr_scale * eta / M
    if variant == "lemma2":
        return scale * lemma2_bracket(M, params.segment_length(), c, form) ** 2
    if variant == "fixed_Dx":
        D = params.side_length()
        return scale * (1.0 / math.sqrt(c) + (2.0 * M / D) * math.asinh(_asinh_arg(D, c, form))) ** 2
    if variant == "fixed_L":
        L = params.segment_length()
        return scale * (1.0 / math.sqrt(c) + (2.0 / L) * math.asinh(_asinh_arg((M - 1) * L, c, form))) ** 2
    raise InvalidArgument(f"unknown SA approximation variant {variant!r}")


def sa_min_segments(D_x: float, c_y: float, form: str = "derived") -> float:
    """Real ``M`` minimising the fixed-``D_x`` SA approximation.

    ``derived``: ``D_x / (2 sqrt(c_y) asinh(D_x / (2 sqrt(c_y))))``, the
    stationary point of the fixed-``D_x`` form.  ``printed``:
    ``D_x / (sqrt(2 c_y) asinh(D_x / (2 c_y)))``.
    """
    _check_form(form)
    if not (D_x > 0.0 and c_y > 0.0):
        raise InvalidArgument("D_x and c_y must be positive")
    if form == "derived":
        return D_x / (2.0 * math.sqrt(c_y) * math.asinh(D_x / (2.0 * math.sqrt(c_y))))
    return D_x / (math.sqrt(2.0 * c_y) * math.asinh(D_x / (2.0 * c_y)))


def _gain_k(D_x: float, c_y: float, form: str) -> float:
    _check_form(form)
    if not (D_x > 0.0 and c_y > 0.0):
        raise InvalidArgument("D_x and c_y must be positive")
    return 2.0 * math.sqrt(c_y) / D_x * math.asinh(_asinh_arg(D_x, c_y, form))


def sa_gain_over_conventional(M: float, D_x: float, c_y: float, form: str = "derived") -> float:
    """Approximate SA SNR over the lossless single-PA conventional SNR, ``(1 + k M)^2 / M``."""
    if not M >= 1:
        raise InvalidArgument("M must be >= 1")
    k = _gain_k(D_x, c_y, form)
    return (1.0 + k * M) ** 2 / M


def sa_gain_slope(D_x: float, c_y: float, form: str = "derived") -> float:
    """Large-``M`` slope ``k^2`` of :func:`sa_gain_over_conventional`."""
    return _gain_k(D_x, c_y, form) ** 2


def threshold_M(D_x: float, c_y: float, form: str = "derived") -> int:
    """Smallest integer ``M`` beyond which the SA gain over conventional stays above 1.

    The ratio exceeds 1 except for ``sqrt(M)`` between the roots of
    ``k s^2 - s + 1``; this returns the first integer above the larger
    root squared, or 1 when no integer falls in that dip.
    """
    k = _gain_k(D_x, c_y, form)
    disc = 1.0 - 4.0 * k
    if disc < 0.0:
        return 1
    s_hi = (1.0 + math.sqrt(disc)) / (2.0 * k)
    m = math.floor(s_hi * s_hi) + 1
    if m - 1 >= 1 and sa_gain_over_conventional(m - 1, D_x, c_y, form) <= 1.0:
        return m
    return 1


# ---------------------------------------------------------------- SM uplink

def sm_uplink_approx(
    variant: str,
    params: ApproxParams,
    budget: LinkBudget,
    eta: float,
    form: str = "derived",
) -> float:
    """Closed-form SM uplink SNR.

    Parameters
    ----------
    variant : {"full", "simplified", "upper", "limit"}
        ``full`` includes the Euler-Maclaurin correction, ``simplified``
        drops it, ``upper`` replaces ``(M-1) L`` by ``D_x`` and ``limit`` is
        the ``M -> infinity`` value ``1/c_y + pi / (L sqrt(c_y))``.
    """
    _check_form(form)
    c = params.c_y
    scale = budget.snr_scale * eta
    sc = math.sqrt(c)
    if variant == "limit":
        return scale * (1.0 / c + math.pi / (params.segment_length() * sc))
    if variant == "upper":
        L = params.segment_length()
        return scale * (1.0 / c + 2.0 / (L * sc) * math.atan(params.side_length() / (2.0 * sc)))
    if variant not in ("full", "simplified"):
        raise InvalidArgument(f"unknown SM approximation variant {variant!r}")
    if params.M is None:
        raise InvalidArgument("params.M is required")
    M = params.M
    _check_odd(M)
    L = params.segment_length()
    half = (M - 1) * L / 2.0
    value = 1.0 / c + 2.0 / (L * sc) * math.atan(half / sc)
    if variant == "full":
        if form == "derived":
            value += ((M - 1) * L**2 / 12.0) / (c + half**2) ** 2
        else:
            value -= ((M - 1) / 12.0 * L**3) / (c + half**2) ** 2
    return scale * value


# ---------------------------------------------------------------- SS downlink

def dl_ss_approx(N: int, delta: float, c_y: float, budget: LinkBudget, eta: float, form: str = "derived") -> float:
    """Closed-form SS downlink SNR for ``N`` PAs at uniform spacing ``delta`` around the user."""
    _check_form(form)
    if int(N) != N or N < 1:
        raise InvalidArgument(f"N must be a positive integer, got {N!r}")
    if not (delta > 0.0 and c_y > 0.0):
        raise InvalidArgument("delta and c_y must be positive")
    bracket = 1.0 / math.sqrt(c_y) + (2.0 / delta) * math.asinh(_asinh_arg((N - 1) * delta, c_y, form))
    return budget.snr_scale * eta / N * bracket**2


def dl_ss_approx_argmax(n_max: int, delta: float, c_y: float, budget: LinkBudget, eta: float, form: str = "derived") -> int:
    """Integer ``N`` in ``[1, n_max]`` maximising :func:`dl_ss_approx`."""
    values = [dl_ss_approx(n, delta, c_y, budget, eta, form) for n in range(1, n_max + 1)]
    return int(np.argmax(values)) + 1


# ---------------------------------------------------------------- oracles

def midpoint_oracle(kind: str, M: int, L: float, c_y: float, dps: int = 40) -> float:
    """Exact ``sum_{m=1}^{(M-1)/2} f(L (m - 1/2))`` in ``dps``-digit arithmetic.

    ``kind="inverse_distance"`` uses ``f(x) = 1/sqrt(c_y + x^2)``;
    ``kind="inverse_square"`` uses ``f(x) = 1/(c_y + x^2)``.
    """
    if kind not in ("inverse_distance", "inverse_square"):
        raise InvalidArgument(f"unknown oracle kind {kind!r}")
    if int(M) != M or M < 3 or M % 2 == 0:
        raise InvalidArgument(f"M must be odd and >= 3, got {M!r}")
    with mpmath.workdps(dps):
        Lm, cm = mpmath.mpf(L), mpmath.mpf(c_y)
        xs = (Lm * (m - mpmath.mpf(1) / 2) for m in range(1, (M - 1) // 2 + 1))
        if kind == "inverse_distance":
            total = mpmath.fsum(1 / mpmath.sqrt(cm + x * x) for x in xs)
        else:
            total = mpmath.fsum(1 / (cm + x * x) for x in xs)
        return float(total)


def centered_geometry(M: int, L: float, c_y: float, min_spacing: float) -> tuple[WaveguideLayout, UserLocation]:
    """Layout of ``M`` segments centred on the origin with the user below the middle."""
    layout = WaveguideLayout.centered(M * L, M, min_spacing=min_spacing, height=math.sqrt(c_y))
    return layout, UserLocation(0.0, 0.0, c_y)


def exact_centered_snr(protocol: str, M: int, L: float, c_y: float, radio: RadioConfig, budget: LinkBudget, lossy: bool = False) -> float:
    """Exact uplink SA or SM SNR for the centred-user geometry of the closed forms."""
    from .uplink import sa_place, sa_snr, sm_place, sm_snr

    layout, user = centered_geometry(M, L, c_y, radio.wavelength / 2.0)
    if protocol == "SA":
        return sa_snr(user, sa_place(user, layout, radio), layout, radio, budget, lossy).snr
    if protocol == "SM":
        return sm_snr(user, sm_place(user, layout), layout, radio, budget, lossy).snr
    raise InvalidArgument(f"protocol must be 'SA' or 'SM', got {protocol!r}")
