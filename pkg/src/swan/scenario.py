"""Scenario files: TOML sections mapped onto :class:`~swan.simkit.ScenarioConfig`.

Example::

    [radio]
    carrier_freq_ghz = 28
    n_eff = 1.4
    kappa = 0.08            # dB/m

    [layout]
    side_length = 100       # m
    segment_length = 1      # m  (or num_segments = ...)
    height = 3
    min_spacing_wavelengths = 0.5

    [budget]
    tx_power_dbm = 10
    noise_power_dbm = -90

    [region]
    width = 20

    [run]
    trials = 1000
    seed = 7
    protocols = ["SS", "SA", "SM"]

dB and GHz inputs are converted to SI linear units here and nowhere else.
Overrides use dotted keys, e.g. ``layout.segment_length=0.5``.
"""

from __future__ import annotations

import sys
from dataclasses import replace
from pathlib import Path
from typing import Any, Callable, Iterable

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

from .errors import InvalidArgument, SwanError
from .phys import SPEED_OF_LIGHT, dbm_to_watt
from .simkit import ScenarioConfig


class UsageError(SwanError):
    """Bad command line: unknown key, malformed option."""


class ConfigError(SwanError):
    """Scenario cannot be parsed or describes an invalid system."""


def _seq(v) -> tuple:
    if isinstance(v, str):
        return tuple(s.strip() for s in v.split(",") if s.strip())
    return tuple(v)


def _opt_float(v):
    return None if v is None or v == "none" else float(v)


def _counts(v):
    if isinstance(v, str) and v == "dense":
        return v
    if isinstance(v, bool) or int(v) != v:
        raise ValueError(f"expected 'dense' or an integer, got {v!r}")
    return int(v)


# dotted key -> (config field, converter).  Converters receive the raw value
# and the running field dict (for keys that depend on the carrier).
_Conv = Callable[[Any, dict], Any]
KEYS: dict[str, tuple[str, _Conv]] = {
    "radio.carrier_freq": ("carrier_freq", lambda v, _: float(v)),
    "radio.carrier_freq_ghz": ("carrier_freq", lambda v, _: float(v) * 1e9),
    "radio.n_eff": ("n_eff", lambda v, _: float(v)),
    "radio.kappa": ("kappa", lambda v, _: float(v)),
    "layout.side_length": ("side_length", lambda v, _: float(v)),
    "layout.segment_length": ("segment_length", lambda v, _: _opt_float(v)),
    "layout.num_segments": ("num_segments", lambda v, _: None if v in (None, "none") else int(v)),
    "layout.height": ("height", lambda v, _: float(v)),
    "layout.lateral_offset": ("lateral_offset", lambda v, _: float(v)),
    "layout.min_spacing": ("min_spacing", lambda v, _: _opt_float(v)),
    "layout.min_spacing_wavelengths": (
        "min_spacing",
        lambda v, f: float(v) * SPEED_OF_LIGHT / f.get("carrier_freq", ScenarioConfig.carrier_freq),
    ),
    "budget.tx_power_dbm": ("tx_power", lambda v, _: dbm_to_watt(float(v))),
    "budget.noise_power_dbm": ("noise_power", lambda v, _: dbm_to_watt(float(v))),
    "budget.tx_power_w": ("tx_power", lambda v, _: float(v)),
    "budget.noise_power_w": ("noise_power", lambda v, _: float(v)),
    "region.width": ("region_width", lambda v, _: float(v)),
    "region.fixed_u_x": ("fixed_u_x", lambda v, _: _opt_float(v)),
    "region.fixed_u_y": ("fixed_u_y", lambda v, _: _opt_float(v)),
    "run.link": ("link", lambda v, _: str(v)),
    "run.trials": ("trials", lambda v, _: int(v)),
    "run.seed": ("seed", lambda v, _: int(v)),
    "run.protocols": ("protocols", lambda v, _: _seq(v)),
    "run.baselines": ("baselines", lambda v, _: _seq(v)),
    "run.loss_cases": ("loss_cases", lambda v, _: _seq(v)),
    "run.dl_counts": ("dl_counts", lambda v, _: _counts(v)),
    "run.ss_mode": ("ss_mode", lambda v, _: str(v)),
}

# keys whose conversion depends on the carrier frequency are applied last
_LATE = ("layout.min_spacing_wavelengths",)


def _flatten(doc: dict, prefix: str = "") -> dict[str, Any]:
    flat: dict[str, Any] = {}
    for k, v in doc.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            flat.update(_flatten(v, key + "."))
        else:
            flat[key] = v
    return flat


def parse_value(text: str) -> Any:
    """TOML scalar/array syntax if it parses, else the bare string."""
    try:
        return tomllib.loads(f"v = {text}")["v"]
    except tomllib.TOMLDecodeError:
        return text.strip()


def parse_override(item: str) -> tuple[str, Any]:
    if "=" not in item:
        raise UsageError(f"override must look like section.key=value, got {item!r}")
    key, _, raw = item.partition("=")
    key = key.strip()
    if key not in KEYS:
        raise UsageError(f"unknown configuration key {key!r}")
    return key, parse_value(raw)


def load_scenario_file(path: str | Path) -> dict[str, Any]:
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"scenario file not found: {path}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"cannot parse scenario file {path}: {exc}") from exc
    flat = _flatten(doc)
    for key in flat:
        if key not in KEYS:
            raise UsageError(f"unknown configuration key {key!r} in {path}")
    return flat


def build_config(
    entries: dict[str, Any] | None = None,
    overrides: Iterable[tuple[str, Any]] = (),
    base: ScenarioConfig | None = None,
) -> ScenarioConfig:
    """Apply file entries, then overrides, on top of ``base`` (defaults if omitted)."""
    merged = dict(entries or {})
    for key, value in overrides:
        if key not in KEYS:
            raise UsageError(f"unknown configuration key {key!r}")
        merged[key] = value
    fields: dict[str, Any] = {}
    ordered = [k for k in merged if k not in _LATE] + [k for k in merged if k in _LATE]
    for key in ordered:
        name, conv = KEYS[key]
        try:
            fields[name] = conv(merged[key], fields)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid value for {key}: {merged[key]!r} ({exc})") from exc
    if "num_segments" in fields and fields["num_segments"] is not None and "segment_length" not in fields:
        fields["segment_length"] = None
    if "segment_length" in fields and fields["segment_length"] is not None and "num_segments" not in fields:
        fields["num_segments"] = None
    cfg = base or ScenarioConfig()
    try:
        return replace(cfg, **fields)
    except InvalidArgument as exc:
        raise ConfigError(str(exc)) from exc
