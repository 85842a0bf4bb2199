"""``swan`` command-line interface.

Every subcommand writes its CSV tables and a ``manifest.json`` into
``--out``.  Failures print one JSON error record on stderr and exit with

* 2 usage error (bad option, unknown configuration key)
* 3 configuration error (unparsable or infeasible scenario)
* 4 runtime error
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import time
from dataclasses import replace
from pathlib import Path
from typing import Sequence

from . import __version__
from . import analytics as an
from .downlink import dl_place, dl_snr, pass1_place, pass2_place
from .errors import InfeasibleLayout, InvalidArgument, SwanError
from .figures import FIGURE_TAGS, Table, reproduce
from .kernels import BACKEND
from .phys import UserLocation
from .scenario import ConfigError, UsageError, build_config, load_scenario_file, parse_override
from .simkit import CSV_COLUMNS, DOWNLINK_BASELINES, SWEEP_VARIABLES, UPLINK_BASELINES, ScenarioConfig, run_sweep
from .uplink import conventional_uplink_snr, sa_place, sa_snr, sm_place, sm_snr, ss_place, ss_snr

SCHEMA_VERSION = 1
EXIT_OK, EXIT_USAGE, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3, 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # route argparse failures through the JSON error record
        raise UsageError(message)


def parse_range(text: str, kind=float) -> list:
    """``"1..64"``, ``"11..201:2"``, ``"1,2,5"`` or a single number."""
    out: list = []
    try:
        for part in text.split(","):
            part = part.strip()
            if ".." in part:
                lo, _, rest = part.partition("..")
                hi, _, step = rest.partition(":")
                lo_v, hi_v = kind(lo), kind(hi)
                step_v = kind(step) if step else kind(1)
                if step_v <= 0:
                    raise ValueError("step must be positive")
                n = int(math.floor((hi_v - lo_v) / step_v + 1e-9))
                out.extend(kind(lo_v + i * step_v) for i in range(n + 1))
            elif part:
                out.append(kind(part))
    except ValueError as exc:
        raise UsageError(f"cannot parse range {text!r}: {exc}") from exc
    if not out:
        raise UsageError(f"empty range {text!r}")
    return out


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--scenario", help="TOML scenario file")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                   help="override a scenario key, e.g. layout.segment_length=0.5")
    p.add_argument("--out", default=".", help="output directory (default: current)")
    p.add_argument("--seed", type=int, help="shortcut for --set run.seed=...")
    p.add_argument("--trials", type=int, help="shortcut for --set run.trials=...")
    p.add_argument("--workers", type=int, default=None, help="worker processes (capped by SWAN_THREADS)")
    p.add_argument("--from-manifest", dest="from_manifest", help="re-run the invocation recorded in a manifest")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="swan", description="Segmented waveguide pinching-antenna system toolkit")
    parser.add_argument("--version", action="version", version=f"swan {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gain-curve", help="average SS in-waveguide gain vs M")
    _common(p)
    p.add_argument("--Dx", type=float, default=100.0)
    p.add_argument("--kappa", type=float, help="dB/m (default: scenario value)")
    p.add_argument("--M", default="1..64")

    for name in ("uplink-snr", "downlink-snr"):
        p = sub.add_parser(name, help=f"{name.split('-')[0]} SNR of one user for every protocol")
        _common(p)
        p.add_argument("--ux", type=float, default=0.0)
        p.add_argument("--uy", type=float, default=0.0)
        p.add_argument("--case", choices=("lossless", "lossy"), default="lossy")
        if name == "downlink-snr":
            p.add_argument("--counts", default=None, help="PAs per segment: integer or 'dense'")

    p = sub.add_parser("rate-sweep", help="Monte Carlo average rate over a parameter sweep")
    _common(p)
    p.add_argument("--sweep", choices=SWEEP_VARIABLES, required=True)
    p.add_argument("--values", required=True, help="values, e.g. 20,50,100 or 10..200:10")

    p = sub.add_parser("validate-approx", help="closed form vs exact SNR over a grid of M")
    _common(p)
    p.add_argument("--lemma", choices=("2",), help="shortcut for --variant lemma2")
    p.add_argument("--variant", default=None,
                   choices=("lemma2", "fixed_Dx", "fixed_L", "sm_full", "sm_simplified", "sm_upper", "sm_limit"))
    p.add_argument("--form", choices=an.FORMS, default="derived")
    p.add_argument("--cy", type=float, default=9.0)
    p.add_argument("--L", type=float, default=1.0)
    p.add_argument("--Dx", type=float, default=None, help="fixed side length for the fixed_Dx variant")
    p.add_argument("--M", default="11..201:2")

    p = sub.add_parser("reproduce-figure", help="regenerate the data of one figure")
    _common(p)
    p.add_argument("--fig", required=True, choices=FIGURE_TAGS)
    return parser


# ---------------------------------------------------------------- helpers

def _resolve_config(args) -> ScenarioConfig:
    entries = load_scenario_file(args.scenario) if args.scenario else {}
    overrides = [parse_override(item) for item in args.overrides]
    if args.seed is not None:
        overrides.append(("run.seed", args.seed))
    if args.trials is not None:
        overrides.append(("run.trials", args.trials))
    return build_config(entries, overrides)


def _write_tables(out: Path, tables: Sequence[Table]) -> list[dict]:
    out.mkdir(parents=True, exist_ok=True)
    files = []
    for t in tables:
        path = out / f"{t.name}.csv"
        data = t.to_csv().encode("utf-8")
        path.write_bytes(data)
        files.append({"path": path.name, "rows": len(t.rows), "sha256": hashlib.sha256(data).hexdigest()})
    return files


def _invocation(args) -> dict:
    skip = {"scenario", "overrides", "out", "seed", "trials", "from_manifest", "workers"}
    return {k: v for k, v in vars(args).items() if k not in skip}


# ---------------------------------------------------------------- subcommands

def cmd_gain_curve(args, cfg: ScenarioConfig) -> list[Table]:
    kappa = cfg.kappa if args.kappa is None else args.kappa
    try:
        alpha = cfg.radio().with_kappa(kappa).alpha
    except InvalidArgument as exc:
        raise ConfigError(str(exc)) from exc
    Ms = parse_range(args.M, int)
    pts = an.gain_curve(Ms, args.Dx, alpha)
    rows = [(p.M, p.gain, p.conventional_gain, p.ratio_to_conventional) for p in pts]
    return [Table("gain_curve", ("M", "A_ss", "A_conv", "ratio"), rows)]


def _for_link(cfg: ScenarioConfig, link: str) -> ScenarioConfig:
    """The subcommand fixes the link; baselines of the other link are dropped."""
    if cfg.link == link:
        return cfg
    allowed = UPLINK_BASELINES if link == "uplink" else DOWNLINK_BASELINES
    kept = tuple(b for b in cfg.baselines if b in allowed)
    return replace(cfg, link=link, baselines=kept or None)


def _user(cfg: ScenarioConfig, args) -> UserLocation:
    layout = cfg.layout()
    return UserLocation.on(layout, args.ux, args.uy)


def cmd_uplink_snr(args, cfg: ScenarioConfig) -> list[Table]:
    cfg = _for_link(cfg, "uplink")
    layout, radio, budget = cfg.layout(), cfg.radio(args.case), cfg.budget()
    user = _user(cfg, args)
    snr_rows, pos_rows = [], []
    for proto in cfg.protocols:
        if proto == "SS":
            pl = ss_place(user, layout, radio, cfg.ss_mode)
            rep = ss_snr(user, pl, layout, radio, budget)
        elif proto == "SA":
            pl = sa_place(user, layout, radio)
            rep = sa_snr(user, pl, layout, radio, budget)
        else:
            pl = sm_place(user, layout)
            rep = sm_snr(user, pl, layout, radio, budget)
        snr_rows.append((proto, "", args.case, rep.snr, rep.snr_db, rep.freespace_term, rep.waveguide_gain, rep.noise_scale))
        pos_rows += [(proto, int(m), x, nu) for m, x, nu in zip(pl.segments, pl.positions, pl.shifts)]
    if "conventional" in cfg.baselines:
        rep = conventional_uplink_snr(user, layout, radio, budget)
        snr_rows.append(("SS", "conventional", args.case, rep.snr, rep.snr_db, rep.freespace_term, rep.waveguide_gain, 1))
    cols = ("protocol", "baseline", "case", "snr", "snr_db", "freespace_term", "waveguide_gain", "noise_scale")
    return [Table("uplink_snr", cols, snr_rows), Table("uplink_placement", ("protocol", "segment", "position", "shift"), pos_rows)]


def cmd_downlink_snr(args, cfg: ScenarioConfig) -> list[Table]:
    cfg = _for_link(cfg, "downlink")
    if args.counts is not None:
        cfg = build_config(overrides=[("run.dl_counts", "dense" if args.counts == "dense" else _int(args.counts))], base=cfg)
    layout, radio, budget = cfg.layout(), cfg.radio(args.case), cfg.budget()
    user = _user(cfg, args)
    single = layout.as_single_waveguide()
    snr_rows, pos_rows = [], []
    ss_count = None
    for proto in cfg.protocols:
        pl = dl_place(proto, user, layout, radio, cfg.dl_counts)
        rep = dl_snr(proto, user, pl, layout, radio, budget)
        if proto == "SS":
            ss_count = pl.total_count
        snr_rows.append((proto, "", args.case, pl.total_count, rep.snr, rep.snr_db, rep.freespace_term, rep.waveguide_gain, rep.noise_scale))
        for m, xs, nus in zip(pl.segments, pl.positions, pl.shifts):
            pos_rows += [(proto, "", int(m), x, nu) for x, nu in zip(xs, nus)]
    for base in cfg.baselines:
        if base == "PASS-1":
            n = ss_count if ss_count is not None else dl_place("SS", user, layout, radio, cfg.dl_counts).total_count
            pl = pass1_place(user, layout, radio, n)
        else:
            pl = pass2_place(user, layout, radio)
        rep = dl_snr("SS", user, pl, single, radio, budget)
        snr_rows.append(("SS", base, args.case, pl.total_count, rep.snr, rep.snr_db, rep.freespace_term, rep.waveguide_gain, 1))
        pos_rows += [("SS", base, 1, x, nu) for x, nu in zip(pl.positions[0], pl.shifts[0])]
    cols = ("protocol", "baseline", "case", "num_pas", "snr", "snr_db", "freespace_term", "waveguide_gain", "noise_scale")
    return [Table("downlink_snr", cols, snr_rows),
            Table("downlink_placement", ("protocol", "baseline", "segment", "position", "shift"), pos_rows)]


def _int(text: str) -> int:
    try:
        return int(text)
    except ValueError as exc:
        raise UsageError(f"expected an integer or 'dense', got {text!r}") from exc


def cmd_rate_sweep(args, cfg: ScenarioConfig) -> list[Table]:
    kind = int if args.sweep in ("M", "N") else float
    values = parse_range(args.values, kind)
    res = run_sweep(cfg, args.sweep, values, args.workers)
    rows = [
        (r.sweep, r.value, r.case, r.protocol, r.baseline, r.mean_rate, r.mean_snr, r.stderr_rate, r.trials, r.error)
        for r in res.records
    ]
    return [Table("rate_sweep", CSV_COLUMNS, rows)]


def cmd_validate_approx(args, cfg: ScenarioConfig) -> list[Table]:
    variant = "lemma2" if args.lemma == "2" else (args.variant or "lemma2")
    radio, budget = cfg.radio("lossless"), cfg.budget()
    # closed forms are stated for odd M with a centred user; even values are skipped
    Ms = [M for M in parse_range(args.M, int) if M % 2 == 1]
    if not Ms:
        raise UsageError("no odd M in the requested range")
    rows = []
    for M in Ms:
        if variant == "fixed_Dx" and args.Dx is not None:
            L, D = args.Dx / M, args.Dx
        else:
            L, D = args.L, args.L * M
        p = an.ApproxParams(args.cy, L=L, M=M, D_x=D)
        proto = "SM" if variant.startswith("sm_") else "SA"
        err = ""
        try:
            exact = an.exact_centered_snr(proto, M, L, args.cy, radio, budget)
            if proto == "SA":
                approx = an.sa_uplink_approx(variant, p, budget, radio.eta, form=args.form)
            else:
                approx = an.sm_uplink_approx(variant[3:], p, budget, radio.eta, form=args.form)
            rel = abs(approx - exact) / exact
        except SwanError as exc:
            exact = approx = rel = math.nan
            err = f"{type(exc).__name__}: {exc}".replace(",", ";")
        rows.append((M, exact, approx, rel, err))
    return [Table(f"validate_{variant}", ("M", "exact", "approx", "rel_err", "error"), rows)]


def cmd_reproduce_figure(args, cfg: ScenarioConfig) -> list[Table]:
    return reproduce(args.fig, cfg, args.workers)


COMMANDS = {
    "gain-curve": cmd_gain_curve,
    "uplink-snr": cmd_uplink_snr,
    "downlink-snr": cmd_downlink_snr,
    "rate-sweep": cmd_rate_sweep,
    "validate-approx": cmd_validate_approx,
    "reproduce-figure": cmd_reproduce_figure,
}


def _from_manifest(args, parser) -> tuple[argparse.Namespace, ScenarioConfig]:
    try:
        doc = json.loads(Path(args.from_manifest).read_text(encoding="utf-8"))
        inv = doc["invocation"]
        cfg = ScenarioConfig(**{k: tuple(v) if isinstance(v, list) else v for k, v in doc["config"].items()})
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise ConfigError(f"cannot read manifest {args.from_manifest}: {exc}") from exc
    if inv.get("command") != args.command:
        raise UsageError(f"manifest records {inv.get('command')!r}, not {args.command!r}")
    merged = argparse.Namespace(**{**vars(args), **inv})
    return merged, cfg


def run_command(argv: Sequence[str] | None = None) -> int:
    t0 = time.perf_counter()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.from_manifest:
            args, cfg = _from_manifest(args, parser)
        else:
            cfg = _resolve_config(args)
        tables = COMMANDS[args.command](args, cfg)
        out = Path(args.out)
        files = _write_tables(out, tables)
        manifest = {
            "schema_version": SCHEMA_VERSION,
            "tool": "swan",
            "tool_version": __version__,
            "kernel_backend": BACKEND,
            "invocation": _invocation(args),
            "config": cfg.to_dict(),
            "seed": cfg.seed,
            "files": files,
            "wall_time_s": time.perf_counter() - t0,
        }
        (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        return EXIT_OK
    except UsageError as exc:
        return _fail(EXIT_USAGE, "usage", exc)
    except (ConfigError, InvalidArgument, InfeasibleLayout) as exc:
        return _fail(EXIT_CONFIG, "config", exc)
    except SystemExit:
        raise
    except Exception as exc:  # noqa: BLE001
        return _fail(EXIT_RUNTIME, "runtime", exc)


def _fail(code: int, kind: str, exc: BaseException) -> int:
    record = {"error": {"code": code, "kind": kind, "type": type(exc).__name__, "message": str(exc)}}
    sys.stderr.write(json.dumps(record) + "\n")
    return code


def main(argv: Sequence[str] | None = None) -> int:
    return run_command(argv)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
