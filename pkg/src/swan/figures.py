"""Data behind each reproducible figure, one CSV table per curve family.

=====  ==========================================================
tag    content
=====  ==========================================================
fig5a  SS uplink average in-waveguide gain vs D_x (u_y = 0, L = 1)
fig5b  SS uplink average rate vs D_x (L = 1), SWAN vs conventional
fig6a  SA uplink SNR vs M for several D_x (user at origin, lossless)
fig6b  SA uplink SNR vs D_x for several L (user at origin, lossless)
fig7   average SS in-waveguide gain vs M for several D_x
fig8   SM uplink SNR vs D_x for several L with the closed forms
fig9   uplink average rate of SS/SA/SM vs D_x, both loss cases
fig10  SS downlink average SNR vs M (u_y = 0, D_x = 200), dense fill
fig11  downlink average rate of SS/SA/SM vs D_x with PASS-1/PASS-2
=====  ==========================================================
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

from . import analytics as an
from .downlink import DENSE
from .simkit import ScenarioConfig, SweepResult, _user_for, resolve_workers, run_sweep
from .uplink import conventional_uplink_snr, ss_place, ss_snr

FIGURE_TAGS = ("fig5a", "fig5b", "fig6a", "fig6b", "fig7", "fig8", "fig9", "fig10", "fig11")


@dataclass
class Table:
    name: str
    columns: tuple[str, ...]
    rows: list[tuple]

    def to_csv(self) -> str:
        from .simkit import fmt

        lines = [",".join(self.columns)]
        lines += [",".join(fmt(v) for v in row) for row in self.rows]
        return "\n".join(lines) + "\n"


def _sweep_table(name: str, res: SweepResult) -> Table:
    from .simkit import CSV_COLUMNS

    rows = [
        (r.sweep, r.value, r.case, r.protocol, r.baseline, r.mean_rate, r.mean_snr, r.stderr_rate, r.trials, r.error)
        for r in res.records
    ]
    return Table(name, CSV_COLUMNS, rows)


def fig5a(cfg: ScenarioConfig, workers=None) -> list[Table]:
    cfg = replace(cfg, link="uplink", segment_length=1.0, num_segments=None, fixed_u_y=0.0)
    rows = []
    for D in (10.0, 20.0, 50.0, 100.0, 150.0, 200.0, 300.0, 400.0, 500.0):
        c = replace(cfg, side_length=D)
        layout, radio, budget = c.layout(), c.radio(), c.budget()
        g_exact, g_proj, g_conv = [], [], []
        for t in range(c.trials):
            u = _user_for(c, t)
            g_exact.append(ss_snr(u, ss_place(u, layout, radio, "exact"), layout, radio, budget).waveguide_gain)
            g_proj.append(ss_snr(u, ss_place(u, layout, radio, "projection"), layout, radio, budget).waveguide_gain)
            g_conv.append(conventional_uplink_snr(u, layout, radio, budget).waveguide_gain)
        n = c.trials
        rows.append((
            D,
            math.fsum(g_exact) / n,
            math.fsum(g_proj) / n,
            math.fsum(g_conv) / n,
            an.avg_gain_ss(layout.num_segments, D, radio.alpha),
            an.conventional_avg_gain(D, radio.alpha),
        ))
    return [Table("fig5a_gain_vs_Dx", ("Dx", "exact", "projection", "conventional", "analytic_ss", "analytic_conv"), rows)]


def fig5b(cfg: ScenarioConfig, workers=None) -> list[Table]:
    cfg = replace(cfg, link="uplink", segment_length=1.0, num_segments=None, protocols=("SS",),
                  baselines=("conventional",), loss_cases=("lossless", "lossy"))
    res = run_sweep(cfg, "Dx", [10, 20, 50, 100, 150, 200, 300, 400, 500], workers)
    return [_sweep_table("fig5b_rate_vs_Dx", res)]


def _sa_row(M: int, L: float, c_y: float, radio, budget) -> tuple:
    exact = an.exact_centered_snr("SA", M, L, c_y, radio, budget)
    p = an.ApproxParams(c_y, L=L, M=M)
    return (
        exact,
        an.sa_uplink_approx("lemma2", p, budget, radio.eta),
        an.sa_uplink_approx("fixed_Dx", p, budget, radio.eta),
        an.sa_uplink_approx("fixed_L", p, budget, radio.eta),
        an.sa_uplink_approx("lemma2", p, budget, radio.eta, form="printed"),
        budget.snr_scale * radio.eta / c_y,
    )


_SA_COLS = ("exact", "lemma2", "fixed_Dx", "fixed_L", "lemma2_printed", "conventional")


def fig6a(cfg: ScenarioConfig, workers=None) -> list[Table]:
    radio, budget = cfg.radio("lossless"), cfg.budget()
    c_y = cfg.height**2
    tables = []
    for D in (20.0, 50.0, 100.0):
        rows = [(M, D / M) + _sa_row(M, D / M, c_y, radio, budget) for M in range(1, 42, 2)]
        tables.append(Table(f"fig6a_sa_vs_M_Dx{D:g}", ("M", "L") + _SA_COLS, rows))
    return tables


def fig6b(cfg: ScenarioConfig, workers=None) -> list[Table]:
    radio, budget = cfg.radio("lossless"), cfg.budget()
    c_y = cfg.height**2
    tables = []
    for L in (0.5, 1.0, 2.0):
        Ms = [M for M in range(1, int(500 / L) + 2, 2) if M * L <= 500.0]
        rows = [(M * L, M) + _sa_row(M, L, c_y, radio, budget) for M in Ms[::2]]
        tables.append(Table(f"fig6b_sa_vs_Dx_L{L:g}", ("Dx", "M") + _SA_COLS, rows))
    return tables


def fig7(cfg: ScenarioConfig, workers=None) -> list[Table]:
    alpha = cfg.radio().alpha
    tables = []
    for D in (50.0, 100.0, 200.0):
        pts = an.gain_curve(range(1, 65), D, alpha)
        rows = [(p.M, p.gain, p.conventional_gain, p.ratio_to_conventional) for p in pts]
        tables.append(Table(f"fig7_gain_vs_M_Dx{D:g}", ("M", "A_ss", "A_conv", "ratio"), rows))
    return tables


def fig8(cfg: ScenarioConfig, workers=None) -> list[Table]:
    radio, budget = cfg.radio("lossless"), cfg.budget()
    c_y = cfg.height**2
    tables = []
    for L in (0.5, 1.0, 2.0):
        rows = []
        for M in range(1, int(500 / L) + 2, 4):
            if M * L > 500.0:
                break
            p = an.ApproxParams(c_y, L=L, M=M, D_x=M * L)
            rows.append((
                M * L, M,
                an.exact_centered_snr("SM", M, L, c_y, radio, budget),
                an.sm_uplink_approx("full", p, budget, radio.eta),
                an.sm_uplink_approx("simplified", p, budget, radio.eta),
                an.sm_uplink_approx("upper", p, budget, radio.eta),
                an.sm_uplink_approx("limit", p, budget, radio.eta),
                budget.snr_scale * radio.eta / c_y,
            ))
        tables.append(Table(f"fig8_sm_vs_Dx_L{L:g}",
                            ("Dx", "M", "exact", "full", "simplified", "upper", "limit", "conventional"), rows))
    return tables


def fig9(cfg: ScenarioConfig, workers=None) -> list[Table]:
    cfg = replace(cfg, link="uplink", segment_length=1.0, num_segments=None, protocols=("SS", "SA", "SM"),
                  baselines=("conventional",), loss_cases=("lossless", "lossy"))
    res = run_sweep(cfg, "Dx", [20, 50, 100, 150, 200], workers)
    return [_sweep_table("fig9_uplink_rate_vs_Dx", res)]


def fig10(cfg: ScenarioConfig, workers=None) -> list[Table]:
    cfg = replace(cfg, link="downlink", side_length=200.0, segment_length=None, num_segments=1, fixed_u_y=0.0,
                  protocols=("SS",), baselines=("PASS-1",), loss_cases=("lossless", "lossy"), dl_counts=DENSE)
    Ms = [1, 2, 4, 5, 8, 10, 20, 25, 40, 50, 100, 200]
    res = run_sweep(cfg, "M", Ms, workers)
    layout = cfg.layout()
    approx = []
    for M in Ms:
        L = 200.0 / M
        n = int(math.floor(L / layout.min_spacing)) + 1
        approx.append((M, L, n, an.dl_ss_approx(n, layout.min_spacing, cfg.height**2, cfg.budget(), cfg.radio().eta)))
    return [
        _sweep_table("fig10_dl_ss_vs_M", res),
        Table("fig10_dl_ss_approx", ("M", "L", "N", "approx"), approx),
    ]


def fig11(cfg: ScenarioConfig, workers=None) -> list[Table]:
    cfg = replace(cfg, link="downlink", segment_length=1.0, num_segments=None, protocols=("SS", "SA", "SM"),
                  baselines=("PASS-1", "PASS-2"), loss_cases=("lossless", "lossy"), dl_counts=DENSE)
    res = run_sweep(cfg, "Dx", [20, 50, 100, 150, 200], workers)
    return [_sweep_table("fig11_downlink_rate_vs_Dx", res)]


FIGURES: dict[str, Callable[..., list[Table]]] = {
    "fig5a": fig5a, "fig5b": fig5b, "fig6a": fig6a, "fig6b": fig6b, "fig7": fig7,
    "fig8": fig8, "fig9": fig9, "fig10": fig10, "fig11": fig11,
}


def reproduce(tag: str, cfg: ScenarioConfig, workers: int | None = None) -> list[Table]:
    if tag not in FIGURES:
        from .errors import InvalidArgument

        raise InvalidArgument(f"unknown figure tag {tag!r}; expected one of {FIGURE_TAGS}")
    return FIGURES[tag](cfg, resolve_workers(workers))
