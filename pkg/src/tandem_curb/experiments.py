"""Parameter sweeps and the bundled Hong Kong case study."""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass, replace
from typing import Iterable, List, Optional, Sequence, Tuple

from .classify import Spillover, classify
from .metrics import MetricsReport, metrics
from .params import (ModelParams, ValidationError, format_clock, load_config,
                     parse_clock)
from .pricing import PricingScheme, SingleModePricingError, optimal_pricing, social_optimum_cost
from .solver import EquilibriumSolution, InconsistentOrdering, build_curves, solve

_SWEEPABLE = ("s_curb_rv", "s_curb_pv", "s_highway", "demand", "pv_fixed_cost",
              "cost_gap", "delta_rv", "delta_pv")


def _axis_values(lo: float, hi: float, n: int) -> List[float]:
    if n < 2:
        raise ValueError("grid size must be at least 2 per axis")
    step = (hi - lo) / (n - 1)
    return [lo + step * i for i in range(n)]


def with_value(p: ModelParams, name: str, value: float) -> ModelParams:
    """Copy of the params with one sweepable field changed.

    ``cost_gap`` adjusts the PV fixed cost so that u^P - c^R equals the
    value.  Validation invariants are re-checked.
    """
    if name not in _SWEEPABLE:
        raise ValueError(f"cannot sweep {name!r}; choose one of {_SWEEPABLE}")
    if name == "cost_gap":
        q = replace(p, pv_fixed_cost=p.c_rv + value)
    else:
        q = replace(p, **{name: value})
    _revalidate(q)
    return q


def _revalidate(p: ModelParams) -> None:
    if not p.s_curb_rv < p.s_highway:
        raise ValidationError("requires s_curb_rv < s_highway")
    if not p.s_curb_pv < p.s_highway:
        raise ValidationError("requires s_curb_pv < s_highway")
    if not p.pv_fixed_cost > p.c_rv:
        raise ValidationError("requires pv_fixed_cost > fixed RV cost")
    if p.demand < 0 or p.s_curb_rv <= 0 or p.s_curb_pv <= 0 or p.s_highway <= 0:
        raise ValidationError("requires nonnegative demand and positive rates")


@dataclass(frozen=True)
class SweepSpec:
    """Axis definition for a sweep over one or two parameters."""

    base: ModelParams
    x_param: str
    x_range: Tuple[float, float, int]
    y_param: Optional[str] = None
    y_range: Optional[Tuple[float, float, int]] = None
    spillover: Spillover = Spillover.BIDIRECTIONAL
    priced: bool = True

    def x_values(self) -> List[float]:
        return _axis_values(*self.x_range)

    def y_values(self) -> List[float]:
        if self.y_param is None:
            raise ValueError("spec has no second axis")
        return _axis_values(*self.y_range)


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.10g}"
    return str(x)


def write_csv(path: str, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def sweep_scenario_map(spec: SweepSpec) -> List[Tuple[float, float, str]]:
    """Scenario id over a two-axis grid (status column for invalid points)."""
    rows = []
    for x in spec.x_values():
        for y in spec.y_values():
            try:
                p = with_value(with_value(spec.base, spec.x_param, x), spec.y_param, y)
                rows.append((x, y, classify(p, spec.spillover).value))
            except ValidationError:
                rows.append((x, y, "invalid"))
    return rows


_METRIC_HEADER = ("sc_e", "c_e", "n_rv_e", "sc_o", "c_o", "n_rv_o",
                  "dsc_rel", "dc", "scenario", "status")


def _point_metrics(p: ModelParams, spillover: Spillover, priced: bool) -> Tuple:
    sol = solve(p, spillover)
    rep = metrics(sol, p)
    sc_e, c_e = rep.social_cost, sol.cost_rv
    row = [sc_e, c_e, sol.n_rv]
    if priced:
        try:
            scheme = optimal_pricing(p)
            sc_o = social_optimum_cost(scheme, p)
            row += [sc_o, scheme.so_cost, scheme.so_n_rv,
                    (sc_e - sc_o) / sc_e if sc_e else 0.0, scheme.so_cost - c_e]
        except SingleModePricingError:
            row += ["", "", "", "", ""]
    else:
        row += ["", "", "", "", ""]
    row += [sol.scenario.value, "ok"]
    return tuple(row)


def sweep_metrics(spec: SweepSpec) -> List[Tuple]:
    """No-toll and priced metrics over a two-axis grid."""
    rows = []
    for x in spec.x_values():
        for y in spec.y_values():
            base_row = (x, y)
            try:
                p = with_value(with_value(spec.base, spec.x_param, x), spec.y_param, y)
                rows.append(base_row + _point_metrics(p, spec.spillover, spec.priced))
            except (ValidationError, InconsistentOrdering) as err:
                rows.append(base_row + ("",) * (len(_METRIC_HEADER) - 1)
                            + (f"invalid: {err}",))
    return rows


def sweep_scalar(spec: SweepSpec) -> List[Tuple]:
    """One-axis sweep including per-bottleneck total queuing times."""
    rows = []
    for x in spec.x_values():
        try:
            p = with_value(spec.base, spec.x_param, x)
            sol = solve(p, spec.spillover)
            rep = metrics(sol, p)
            row = [x, rep.social_cost, sol.cost_rv, sol.n_rv,
                   rep.tqt_highway, rep.tqt_curb_rv, rep.tqt_curb_pv]
            if spec.priced:
                try:
                    scheme = optimal_pricing(p)
                    sc_o = social_optimum_cost(scheme, p)
                    row += [sc_o, scheme.so_cost, scheme.so_n_rv]
                except SingleModePricingError:
                    row += ["", "", ""]
            else:
                row += ["", "", ""]
            row += [sol.scenario.value, "ok"]
        except (ValidationError, InconsistentOrdering) as err:
            row = [x] + [""] * 10 + [f"invalid: {err}"]
        rows.append(tuple(row))
    return rows


SCALAR_HEADER = ("x", "sc_e", "c_e", "n_rv_e", "tqt_highway", "tqt_curb_rv",
                 "tqt_curb_pv", "sc_o", "c_o", "n_rv_o", "scenario", "status")
MAP_HEADER = ("x", "y", "scenario")
METRICS_HEADER = ("x", "y") + _METRIC_HEADER


def bundled_config(name: str) -> str:
    return os.path.join(os.path.dirname(__file__), "configs", name)


# Reference results the bundled Hong Kong case study reproduces.
HK_REFERENCE = {
    "scenario": "S5",
    "n_rv": 4027.0,
    "cost": 351.27,
    "social_cost": 2_515_133.79,
    "rv_interval": ("6:35", "7:58"),
    "pv_interval": ("7:29", "7:44"),
    "highway_queue": ("7:29", "8:15"),
    "n_rv_priced": 4173.0,
    "cost_priced": 342.12,
    "social_cost_priced": 1_752_941.70,
    "fee_max_rv": 231.67,
    "fee_max_pv": 141.67,
}


@dataclass(frozen=True)
class CaseStudyReport:
    params: ModelParams
    solution: EquilibriumSolution
    no_toll: MetricsReport
    scheme: PricingScheme
    sc_priced: float
    queue_window: Tuple[float, float]

    def lines(self) -> List[str]:
        p, sol = self.params, self.solution
        ref = HK_REFERENCE
        clock = lambda t: format_clock(t, p.preferred_arrival)

        def row(label, got, want, fmt="{:.2f}"):
            if isinstance(got, str):
                return f"{label:34s} {got:>22s}  ref {want:>12s}"
            dev = (got - want) / want if want else 0.0
            return (f"{label:34s} {fmt.format(got):>22s}  ref "
                    f"{fmt.format(want):>12s}  dev {dev:+.2%}")

        def interval_row(label, lo, hi, want):
            dev = max(abs(lo - (parse_clock(want[0]) - p.preferred_arrival)),
                      abs(hi - (parse_clock(want[1]) - p.preferred_arrival)))
            return (f"{label:34s} {f'[{clock(lo)}, {clock(hi)}]':>22s}  ref "
                    f"[{want[0]}, {want[1]}]  dev {dev * 60:.1f} min")

        out = ["-- no-toll equilibrium --"]
        out.append(row("scenario", sol.scenario.value, ref["scenario"]))
        out.append(row("ride-hailing users", sol.n_rv, ref["n_rv"]))
        out.append(row("individual cost", sol.cost_rv, ref["cost"]))
        out.append(row("social cost", self.no_toll.social_cost, ref["social_cost"]))
        out.append(interval_row("RV departures", sol.t0_rv, sol.t1_rv, ref["rv_interval"]))
        out.append(interval_row("PV departures", sol.t0_pv, sol.t1_pv, ref["pv_interval"]))
        q0, q1 = self.queue_window
        out.append(interval_row("highway queue window", q0, q1, ref["highway_queue"]))
        out.append("-- with optimal pricing --")
        out.append(row("ride-hailing users", self.scheme.so_n_rv, ref["n_rv_priced"]))
        out.append(row("individual cost", self.scheme.so_cost, ref["cost_priced"]))
        out.append(row("social cost", self.sc_priced, ref["social_cost_priced"]))
        out.append(row("max RV fee", self.scheme.fee_at("rv", 0.0), ref["fee_max_rv"]))
        out.append(row("max PV fee", self.scheme.fee_at("pv", 0.0), ref["fee_max_pv"]))
        reduction = 1.0 - self.sc_priced / self.no_toll.social_cost
        out.append(f"{'social-cost reduction':34s} {reduction:>22.1%}")
        return out


def run_case_hk(config_path: Optional[str] = None) -> CaseStudyReport:
    """Solve the bundled Hong Kong case before and after pricing."""
    p = load_config(config_path or bundled_config("hong_kong.toml"))
    sol = solve(p, Spillover.BIDIRECTIONAL)
    cs = build_curves(sol, p)
    rep = metrics(sol, p, curves=cs)
    window = cs.queue_window("highway", threshold=0.5) or (0.0, 0.0)
    scheme = optimal_pricing(p)
    sc_o = social_optimum_cost(scheme, p)
    return CaseStudyReport(params=p, solution=sol, no_toll=rep, scheme=scheme,
                           sc_priced=sc_o, queue_window=window)
