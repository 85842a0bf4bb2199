"""Segmented waveguide pinching-antenna systems (SWAN).

Modules
-------
phys       radio constants, geometry, channel coefficients
uplink     one-PA-per-segment placement and SNR for SS / SA / SM
downlink   multi-PA placement, power split, MRT
analytics  closed forms, scaling laws and their brute-force oracles
simkit     seeded Monte Carlo sweeps
cli        ``swan`` command-line front end
"""

from .errors import (
    InfeasibleLayout,
    InvalidArgument,
    NumericDomainError,
    OutOfRange,
    SwanError,
    UndefinedDerivative,
    UnsupportedGeometry,
)
from .kernels import BACKEND
from .phys import (
    LinkBudget,
    RadioConfig,
    UserLocation,
    WaveguideLayout,
    freespace_coeff,
    inwaveguide_coeff,
    make_radio_config,
    nearest_segment,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "InfeasibleLayout",
    "InvalidArgument",
    "LinkBudget",
    "NumericDomainError",
    "OutOfRange",
    "RadioConfig",
    "SwanError",
    "UndefinedDerivative",
    "UnsupportedGeometry",
    "UserLocation",
    "WaveguideLayout",
    "__version__",
    "freespace_coeff",
    "inwaveguide_coeff",
    "make_radio_config",
    "nearest_segment",
]
