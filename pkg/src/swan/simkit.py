"""Monte Carlo harness: user sampling, protocol and baseline sweeps, rate averages.

Reproducibility
---------------
Trial ``t`` draws its user from ``SeedSequence(seed, spawn_key=(t,))``, and
the draw is made in unit coordinates scaled by the region size.  The same
trial therefore sees the same relative user position at every sweep value
(common random numbers), and no trial depends on the execution order.
Per-trial SNRs are reduced with :func:`math.fsum`, which is correctly
rounded, so a result does not depend on how trials were chunked across
worker processes.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from .downlink import DENSE, dl_place, dl_snr, pass1_place, pass2_place
from .errors import InvalidArgument, SwanError
from .phys import LinkBudget, RadioConfig, UserLocation, WaveguideLayout, make_radio_config
from .uplink import conventional_uplink_snr, sa_place, sa_snr, sm_place, sm_snr, ss_place, ss_snr

SWEEP_VARIABLES = ("Dx", "M", "L", "N")
LOSS_CASES = ("lossless", "lossy")
UPLINK_BASELINES = ("conventional",)
DOWNLINK_BASELINES = ("PASS-1", "PASS-2")


@dataclass(frozen=True)
class ServiceRegion:
    """Rectangle ``D_x x D_y`` centred on the origin, below a waveguide at ``height``."""

    side_length: float
    width: float
    height: float = 3.0
    lateral_offset: float = 0.0

    def __post_init__(self) -> None:
        if not (self.side_length > 0.0 and self.width > 0.0 and self.height > 0.0):
            raise InvalidArgument("region sides and waveguide height must be positive")


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(trial,)))


def sample_user(region: ServiceRegion, rng: np.random.Generator) -> UserLocation:
    """Uniform user in the region; consumes exactly two uniforms from ``rng``."""
    a, b = rng.random(2)
    u_x = (a - 0.5) * region.side_length
    u_y = (b - 0.5) * region.width
    return UserLocation(float(u_x), float(u_y), (u_y - region.lateral_offset) ** 2 + region.height**2)


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything needed to run a sweep; all quantities in SI linear units.

    The layout is defined by ``side_length`` together with either
    ``segment_length`` or ``num_segments`` (exactly one of them).
    ``min_spacing=None`` means half a free-space wavelength.
    """

    link: str = "uplink"
    carrier_freq: float = 28e9
    n_eff: float = 1.4
    kappa: float = 0.08
    side_length: float = 100.0
    segment_length: float | None = 1.0
    num_segments: int | None = None
    region_width: float = 20.0
    height: float = 3.0
    lateral_offset: float = 0.0
    min_spacing: float | None = None
    tx_power: float = 0.01
    noise_power: float = 1e-12
    trials: int = 1000
    seed: int = 0
    protocols: tuple[str, ...] = ("SS", "SA", "SM")
    baselines: tuple[str, ...] | None = None
    loss_cases: tuple[str, ...] = ("lossy",)
    dl_counts: str | int = DENSE
    ss_mode: str = "exact"
    fixed_u_x: float | None = None
    fixed_u_y: float | None = None

    def __post_init__(self) -> None:
        if self.link not in ("uplink", "downlink"):
            raise InvalidArgument(f"link must be 'uplink' or 'downlink', got {self.link!r}")
        if int(self.trials) != self.trials or self.trials < 1:
            raise InvalidArgument("trials must be a positive integer")
        if not (0 <= int(self.seed) < 2**64):
            raise InvalidArgument("seed must be a 64-bit unsigned integer")
        if (self.segment_length is None) == (self.num_segments is None):
            raise InvalidArgument("give exactly one of segment_length and num_segments")
        object.__setattr__(self, "protocols", tuple(self.protocols))
        if self.baselines is None:
            object.__setattr__(self, "baselines", UPLINK_BASELINES if self.link == "uplink" else ("PASS-1",))
        object.__setattr__(self, "baselines", tuple(self.baselines))
        object.__setattr__(self, "loss_cases", tuple(self.loss_cases))
        for p in self.protocols:
            if p not in ("SS", "SA", "SM"):
                raise InvalidArgument(f"unknown protocol {p!r}")
        allowed = UPLINK_BASELINES if self.link == "uplink" else DOWNLINK_BASELINES
        for b in self.baselines:
            if b not in allowed:
                raise InvalidArgument(f"baseline {b!r} not available for {self.link}")
        for c in self.loss_cases:
            if c not in LOSS_CASES:
                raise InvalidArgument(f"unknown loss case {c!r}")
        if self.dl_counts != DENSE and (isinstance(self.dl_counts, str) or int(self.dl_counts) < 1):
            raise InvalidArgument("dl_counts must be 'dense' or a positive integer")
        if self.ss_mode not in ("exact", "projection"):
            raise InvalidArgument("ss_mode must be 'exact' or 'projection'")
        if not self.region_width > 0.0:
            raise InvalidArgument("region_width must be positive")
        # validates radio and layout eagerly
        self.radio()
        self.layout()

    def radio(self, case: str = "lossy") -> RadioConfig:
        radio = make_radio_config(self.carrier_freq, self.n_eff, self.kappa)
        return radio.lossless() if case == "lossless" else radio

    def budget(self) -> LinkBudget:
        return LinkBudget(self.tx_power, self.noise_power)

    def layout(self) -> WaveguideLayout:
        D = self.side_length
        if not D > 0.0:
            raise InvalidArgument("side_length must be positive")
        if self.num_segments is not None:
            M = self.num_segments
        else:
            ratio = D / self.segment_length
            M = round(ratio)
            if M < 1 or not math.isclose(ratio, M, rel_tol=1e-9):
                raise InvalidArgument(f"side_length {D!r} is not a multiple of segment_length {self.segment_length!r}")
        spacing = self.min_spacing if self.min_spacing is not None else self.radio().wavelength / 2.0
        return WaveguideLayout.centered(D, M, height=self.height, lateral_offset=self.lateral_offset, min_spacing=spacing)

    def region(self) -> ServiceRegion:
        return ServiceRegion(self.side_length, self.region_width, self.height, self.lateral_offset)

    def with_value(self, sweep: str, value) -> "ScenarioConfig":
        """Copy with one sweep variable set.

        ``Dx`` keeps whichever of ``segment_length``/``num_segments`` is set;
        ``M`` and ``L`` keep ``side_length`` fixed.
        """
        if sweep == "Dx":
            return replace(self, side_length=float(value))
        if sweep == "M":
            if int(value) != value:
                raise InvalidArgument(f"M must be an integer, got {value!r}")
            return replace(self, num_segments=int(value), segment_length=None)
        if sweep == "L":
            return replace(self, segment_length=float(value), num_segments=None)
        if sweep == "N":
            if int(value) != value:
                raise InvalidArgument(f"N must be an integer, got {value!r}")
            return replace(self, dl_counts=int(value))
        raise InvalidArgument(f"unknown sweep variable {sweep!r}; expected one of {SWEEP_VARIABLES}")

    def to_dict(self) -> dict:
        d = asdict(self)
        for k in ("protocols", "baselines", "loss_cases"):
            d[k] = list(d[k])
        return d


@dataclass(frozen=True)
class SweepRecord:
    sweep: str
    value: float
    case: str
    protocol: str
    baseline: str
    mean_rate: float
    mean_snr: float
    stderr_rate: float
    trials: int
    error: str = ""

    @property
    def label(self) -> str:
        return self.baseline if self.baseline else f"SWAN-{self.protocol}"


CSV_COLUMNS = ("sweep", "value", "case", "protocol", "baseline", "mean_rate", "mean_snr", "stderr_rate", "trials", "error")


def fmt(x) -> str:
    """Round-trippable text for CSV cells (17 significant digits for floats)."""
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


@dataclass
class SweepResult:
    records: list[SweepRecord] = field(default_factory=list)

    def select(self, *, case: str | None = None, label: str | None = None) -> list[SweepRecord]:
        return [r for r in self.records if (case is None or r.case == case) and (label is None or r.label == label)]

    def mean_rate(self, label: str, case: str, value) -> float:
        for r in self.records:
            if r.label == label and r.case == case and r.value == value:
                return r.mean_rate
        raise KeyError((label, case, value))

    def to_csv(self) -> str:
        lines = [",".join(CSV_COLUMNS)]
        for r in self.records:
            err = r.error.replace(",", ";").replace("\n", " ")
            row = (r.sweep, r.value, r.case, r.protocol, r.baseline, r.mean_rate, r.mean_snr, r.stderr_rate, r.trials, err)
            lines.append(",".join(fmt(v) for v in row))
        return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- workers

def resolve_workers(requested: int | None = None) -> int:
    """Worker count after applying the ``SWAN_THREADS`` cap (0 or unset means all CPUs)."""
    raw = os.environ.get("SWAN_THREADS", "0").strip() or "0"
    try:
        cap = int(raw)
    except ValueError as exc:
        raise InvalidArgument(f"SWAN_THREADS must be an integer, got {raw!r}") from exc
    if cap < 0:
        raise InvalidArgument("SWAN_THREADS must be >= 0")
    ncpu = os.cpu_count() or 1
    if cap == 0:
        cap = ncpu
    if requested is None or requested == 0:
        return cap
    if requested < 0:
        raise InvalidArgument("worker count must be >= 0")
    return min(requested, cap)


def _labels(cfg: ScenarioConfig) -> list[tuple[str, str]]:
    return [(p, "") for p in cfg.protocols] + [("SS", b) for b in cfg.baselines]


def _user_for(cfg: ScenarioConfig, trial: int) -> UserLocation:
    u = sample_user(cfg.region(), trial_rng(cfg.seed, trial))
    if cfg.fixed_u_x is None and cfg.fixed_u_y is None:
        return u
    u_x = u.u_x if cfg.fixed_u_x is None else float(cfg.fixed_u_x)
    u_y = u.u_y if cfg.fixed_u_y is None else float(cfg.fixed_u_y)
    return UserLocation(u_x, u_y, (u_y - cfg.lateral_offset) ** 2 + cfg.height**2)


def _trial_snrs(cfg: ScenarioConfig, layout: WaveguideLayout, radio: RadioConfig, budget: LinkBudget, user: UserLocation) -> dict:
    out: dict[tuple[str, str], float | str] = {}

    def run(key, fn):
        try:
            out[key] = float(fn())
        except SwanError as exc:
            out[key] = f"{type(exc).__name__}: {exc}"

    if cfg.link == "uplink":
        for p in cfg.protocols:
            if p == "SS":
                run(("SS", ""), lambda: ss_snr(user, ss_place(user, layout, radio, cfg.ss_mode), layout, radio, budget).snr)
            elif p == "SA":
                run(("SA", ""), lambda: sa_snr(user, sa_place(user, layout, radio), layout, radio, budget).snr)
            else:
                run(("SM", ""), lambda: sm_snr(user, sm_place(user, layout), layout, radio, budget).snr)
        if "conventional" in cfg.baselines:
            run(("SS", "conventional"), lambda: conventional_uplink_snr(user, layout, radio, budget).snr)
        return out

    ss_pl = None
    if "SS" in cfg.protocols or "PASS-1" in cfg.baselines:
        try:
            ss_pl = dl_place("SS", user, layout, radio, cfg.dl_counts)
        except SwanError as exc:
            ss_pl = f"{type(exc).__name__}: {exc}"
    for p in cfg.protocols:
        if p == "SS":
            if isinstance(ss_pl, str):
                out[("SS", "")] = ss_pl
            else:
                run(("SS", ""), lambda: dl_snr("SS", user, ss_pl, layout, radio, budget).snr)
        else:
            run((p, ""), lambda p=p: dl_snr(p, user, dl_place(p, user, layout, radio, cfg.dl_counts), layout, radio, budget).snr)
    single = layout.as_single_waveguide()
    if "PASS-1" in cfg.baselines:
        if isinstance(ss_pl, str):
            out[("SS", "PASS-1")] = ss_pl
        else:
            run(("SS", "PASS-1"), lambda: dl_snr("SS", user, pass1_place(user, layout, radio, ss_pl.total_count), single, radio, budget).snr)
    if "PASS-2" in cfg.baselines:
        run(("SS", "PASS-2"), lambda: dl_snr("SS", user, pass2_place(user, layout, radio), single, radio, budget).snr)
    return out


def _run_chunk(cfgs: Sequence[ScenarioConfig], start: int, stop: int):
    """SNR arrays for trials ``[start, stop)`` of every sweep configuration.

    Returns ``{(value_index, case, protocol, baseline): (snr_array, first_error)}``.
    """
    result = {}
    for vi, cfg in enumerate(cfgs):
        if isinstance(cfg, str):
            continue
        layout = cfg.layout()
        budget = cfg.budget()
        labels = _labels(cfg)
        for case in cfg.loss_cases:
            radio = cfg.radio(case)
            arrays = {lab: np.full(stop - start, math.nan) for lab in labels}
            errors: dict = {}
            for t in range(start, stop):
                user = _user_for(cfg, t)
                vals = _trial_snrs(cfg, layout, radio, budget, user)
                for lab in labels:
                    v = vals[lab]
                    if isinstance(v, str):
                        errors.setdefault(lab, v)
                    else:
                        arrays[lab][t - start] = v
            for lab in labels:
                result[(vi, case, lab[0], lab[1])] = (arrays[lab], errors.get(lab, ""))
    return result


def _chunks(n: int, parts: int) -> list[tuple[int, int]]:
    parts = max(1, min(parts, n))
    edges = [n * i // parts for i in range(parts + 1)]
    return [(edges[i], edges[i + 1]) for i in range(parts)]


def _aggregate(snr: np.ndarray) -> tuple[float, float, float]:
    rates = np.log2(1.0 + snr)
    n = rates.size
    mean_rate = math.fsum(rates.tolist()) / n
    mean_snr = math.fsum(snr.tolist()) / n
    if n > 1:
        var = math.fsum(((rates - mean_rate) ** 2).tolist()) / (n - 1)
        stderr = math.sqrt(var / n)
    else:
        stderr = 0.0
    return mean_rate, mean_snr, stderr


def run_sweep(config: ScenarioConfig, sweep: str, values: Iterable, workers: int | None = None) -> SweepResult:
    """Evaluate every protocol and baseline at each sweep value.

    A value whose configuration is invalid (for example a side length that
    is not a multiple of the segment length) yields error records and the
    sweep continues; so does a protocol failing on some trial.
    """
    values = list(values)
    if not values:
        raise InvalidArgument("sweep values must be non-empty")
    if sweep not in SWEEP_VARIABLES:
        raise InvalidArgument(f"unknown sweep variable {sweep!r}; expected one of {SWEEP_VARIABLES}")
    cfgs: list = []
    for v in values:
        try:
            cfgs.append(config.with_value(sweep, v))
        except SwanError as exc:
            cfgs.append(f"{type(exc).__name__}: {exc}")

    n = config.trials
    nworkers = resolve_workers(workers)
    spans = _chunks(n, nworkers * 4 if nworkers > 1 else 1)
    if nworkers == 1 or len(spans) == 1:
        parts = [_run_chunk(cfgs, a, b) for a, b in spans]
    else:
        with ProcessPoolExecutor(max_workers=nworkers) as pool:
            futs = [pool.submit(_run_chunk, cfgs, a, b) for a, b in spans]
            parts = [f.result() for f in futs]

    out = SweepResult()
    labels = _labels(config)
    for vi, (v, cfg) in enumerate(zip(values, cfgs)):
        value = float(v)
        for case in config.loss_cases:
            for proto, base in labels:
                if isinstance(cfg, str):
                    out.records.append(SweepRecord(sweep, value, case, proto, base, math.nan, math.nan, math.nan, 0, cfg))
                    continue
                snr = np.concatenate([p[(vi, case, proto, base)][0] for p in parts])
                err = next((p[(vi, case, proto, base)][1] for p in parts if p[(vi, case, proto, base)][1]), "")
                ok = snr[np.isfinite(snr)]
                if ok.size == 0:
                    out.records.append(SweepRecord(sweep, value, case, proto, base, math.nan, math.nan, math.nan, 0, err))
                    continue
                mr, ms, se = _aggregate(ok)
                out.records.append(SweepRecord(sweep, value, case, proto, base, mr, ms, se, int(ok.size), err))
    return out
