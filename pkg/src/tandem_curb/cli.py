"""Command-line interface: tandem-curb {validate|classify|solve|simulate|price|verify|sweep|case-hk}."""

from __future__ import annotations

import argparse
import sys
from typing import List, Optional

from .classify import Spillover, classify, classify_utilization, initial_phase_regime
from .curves import CurveSet
from .experiments import (MAP_HEADER, METRICS_HEADER, SCALAR_HEADER, SweepSpec,
                          run_case_hk, sweep_metrics, sweep_scalar,
                          sweep_scenario_map, write_csv)
from .late import OutsideL7Regime, solve_l7
from .metrics import Tolerances, metrics, verify_equilibrium
from .params import ModelParams, ValidationError, format_clock, load_config
from .pricing import (SingleModePricingError, optimal_pricing,
                      optimal_pricing_late, social_optimum_cost)
from .simulate import DepartureProfile, simulate
from .solver import InconsistentOrdering, ScenarioMismatch, solve

EXIT_VALIDATION = 1
EXIT_REGIME = 2


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", required=True, help="TOML parameter file")
    sub.add_argument("--spillover", choices=("uni", "bi"), default="bi")
    sub.add_argument("--late", action="store_true", help="late-arrival mode (needs gamma)")
    sub.add_argument("--dt", type=float, default=1e-3, help="oracle step, hours")
    sub.add_argument("--tol", type=float, default=1e-6,
                     help="relative tolerance for closed-form identities")
    sub.add_argument("--oracle-tol", type=float, default=0.01,
                     help="relative tolerance for oracle comparisons")
    sub.add_argument("--out", default=None, help="output CSV path")


def _load(args) -> ModelParams:
    return load_config(args.config, require_gamma=args.late)


def _curves_csv(cs: CurveSet, path: str) -> None:
    times = sorted(set(cs.a_h.times) | set(cs.d_h.times) | set(cs.d_curb_rv.times)
                   | set(cs.d_curb_pv.times))
    rows = []
    for t in times:
        rows.append((t, cs.a_h(t), cs.d_h(t), cs.a_curb_rv(t), cs.d_curb_rv(t),
                     cs.a_curb_pv(t), cs.d_curb_pv(t),
                     cs.a_h(t) - cs.d_h(t),
                     cs.a_curb_rv(t) - cs.d_curb_rv(t),
                     cs.a_curb_pv(t) - cs.d_curb_pv(t)))
    write_csv(path, ("time_h", "A_H", "D_H", "A_CR", "D_CR", "A_CP", "D_CP",
                     "w_H", "w_CR", "w_CP"), rows)


def cmd_validate(args) -> int:
    p = _load(args)
    print("parameters valid")
    print(f"fixed RV cost c^R = {p.c_rv:.4f}; cost gap u^P - c^R = {p.cost_gap:.4f}")
    return 0


def cmd_classify(args) -> int:
    p = _load(args)
    spill = Spillover.parse(args.spillover)
    print(f"scenario:    {classify(p, spill).value}")
    print(f"regime:      {initial_phase_regime(p).value}")
    print(f"utilization: {classify_utilization(p).value}")
    return 0


def cmd_solve(args) -> int:
    p = _load(args)
    spill = Spillover.parse(args.spillover)
    clock = lambda t: format_clock(t, p.preferred_arrival)
    if args.late:
        sol = solve_l7(p, spill)
        print(f"late-arrival equilibrium (ordering case {sol.ordering.value})")
        print(f"RV departures  [{clock(sol.t0_rv)}, {clock(sol.t1_rv)}]  "
              f"on-time at {clock(sol.t_on_time_rv)}")
        print(f"PV departures  [{clock(sol.t0_pv)}, {clock(sol.t1_pv)}]  "
              f"on-time at {clock(sol.t_on_time_pv)}")
        print(f"N^R = {sol.n_rv:.1f}   C = {sol.cost_rv:.4f}")
        print(f"highway queue clears at {clock(sol.t_highway_clear)}")
        dep_rv, dep_pv = sol.dep_rate_rv, sol.dep_rate_pv
    else:
        sol = solve(p, spill)
        print(f"scenario {sol.scenario.value}" +
              (f" (sub-case {sol.sub_case})" if sol.sub_case else ""))
        print(f"RV departures  [{clock(sol.t0_rv)}, {clock(sol.t1_rv)}]")
        if sol.t0_pv is not None:
            print(f"PV departures  [{clock(sol.t0_pv)}, {clock(sol.t1_pv)}]")
        print(f"N^R = {sol.n_rv:.1f}   C = {sol.cost_rv:.4f}")
        for d in sol.diagnostics:
            print(f"note: {d}")
        dep_rv, dep_pv = sol.dep_rate_rv, sol.dep_rate_pv
    args.out = args.out or getattr(args, "curves", None)
    if args.out:
        from .curves import propagate
        cs = propagate(dep_rv, dep_pv, p, bidirectional=spill is Spillover.BIDIRECTIONAL)
        _curves_csv(cs, args.out)
        print(f"curves written to {args.out}")
    return 0


def _read_profile_csv(path: str) -> DepartureProfile:
    import csv as _csv

    segs = {"rv": [], "pv": []}
    with open(path, newline="", encoding="utf-8") as fh:
        for row in _csv.DictReader(fh):
            segs[row["mode"].strip().lower()].append(
                (float(row["start_h"]), float(row["end_h"]), float(row["rate"])))
    return DepartureProfile.from_segments(segs["rv"], segs["pv"])


def cmd_simulate(args) -> int:
    p = _load(args)
    spill = Spillover.parse(args.spillover)
    if args.profile:
        profile = _read_profile_csv(args.profile)
    elif args.late:
        profile = DepartureProfile.from_solution(solve_l7(p, spill))
    else:
        profile = DepartureProfile.from_solution(solve(p, spill))
    sim = simulate(profile, p, dt=args.dt,
                   bidirectional=spill is Spillover.BIDIRECTIONAL)
    print(f"simulated {len(sim.t)} steps at dt = {args.dt} h")
    print(f"max queues (veh): highway {sim.queue_highway.max():.1f}, "
          f"curb RV {sim.queue_curb_rv.max():.1f}, curb PV {sim.queue_curb_pv.max():.1f}")
    if args.out:
        rows = zip(sim.t, sim.queue_highway, sim.queue_curb_rv, sim.queue_curb_pv)
        write_csv(args.out, ("time_h", "q_H", "q_CR", "q_CP"), rows)
        print(f"queue series written to {args.out}")
    return 0


def cmd_price(args) -> int:
    p = _load(args)
    clock = lambda t: format_clock(t, p.preferred_arrival)
    scheme = optimal_pricing_late(p) if args.late else optimal_pricing(p)
    sc = social_optimum_cost(scheme, p)
    print(f"first arrivals: RV {clock(scheme.so_t0_rv)}, PV {clock(scheme.so_t0_pv)}")
    if scheme.late:
        print(f"last arrivals:  RV {clock(scheme.so_t1_rv)}, PV {clock(scheme.so_t1_pv)}")
    print(f"fee at preferred time: RV {scheme.fee_at('rv', 0.0):.2f}, "
          f"PV {scheme.fee_at('pv', 0.0):.2f} (initial fee {scheme.base_fee:.2f})")
    if scheme.theta is not None:
        print(f"share ratio theta = {scheme.theta:.4f}")
    print(f"N^R = {scheme.so_n_rv:.1f}   C = {scheme.so_cost:.4f}   SC = {sc:.2f}")
    if args.out:
        times = sorted({scheme.so_t0_rv, scheme.so_t0_pv, 0.0,
                        scheme.so_t1_rv, scheme.so_t1_pv})
        rows = [(t, scheme.fee_at("rv", t), scheme.fee_at("pv", t)) for t in times]
        write_csv(args.out, ("time_h", "fee_rv", "fee_pv"), rows)
        print(f"fee curves written to {args.out}")
    return 0


def cmd_verify(args) -> int:
    p = _load(args)
    spill = Spillover.parse(args.spillover)
    sol = solve(p, spill)
    tol = Tolerances(rel_cost=args.tol, oracle_rel=args.oracle_tol, dt=args.dt)
    report = verify_equilibrium(sol, p, tol)
    print(report)
    if args.out:
        write_csv(args.out, ("check", "passed", "value", "tolerance"),
                  [(c.name, c.passed, c.value, c.tolerance) for c in report.checks])
    return 0


def cmd_sweep(args) -> int:
    p = _load(args)
    spill = Spillover.parse(args.spillover)
    x_range = _parse_range(args.x_range)
    spec = SweepSpec(base=p, x_param=args.x_param, x_range=x_range,
                     y_param=args.y_param,
                     y_range=_parse_range(args.y_range) if args.y_range else None,
                     spillover=spill)
    if args.mode == "map":
        rows, header = sweep_scenario_map(spec), MAP_HEADER
    elif args.mode == "metrics":
        rows, header = sweep_metrics(spec), METRICS_HEADER
    else:
        rows, header = sweep_scalar(spec), SCALAR_HEADER
    out = args.out or f"sweep_{args.mode}.csv"
    write_csv(out, header, rows)
    print(f"{len(rows)} rows written to {out}")
    return 0


def cmd_case_hk(args) -> int:
    report = run_case_hk(args.config)
    for line in report.lines():
        print(line)
    return 0


def _parse_range(text: str):
    lo, hi, n = text.split(":")
    return (float(lo), float(hi), int(n))


def main(argv: Optional[List[str]] = None) -> int:
    ap = argparse.ArgumentParser(prog="tandem-curb",
                                 description="Bi-modal two-tandem bottleneck toolkit")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, fn in (("validate", cmd_validate), ("classify", cmd_classify),
                     ("solve", cmd_solve), ("simulate", cmd_simulate),
                     ("price", cmd_price), ("verify", cmd_verify)):
        s = sub.add_parser(name)
        _add_common(s)
        if name == "solve":
            s.add_argument("--curves", default=None,
                           help="write the corridor curves to this CSV (same as --out)")
        if name == "simulate":
            s.add_argument("--profile", default=None,
                           help="explicit departure-profile CSV (mode,start_h,end_h,rate)")
        s.set_defaults(func=fn)
    s = sub.add_parser("sweep")
    _add_common(s)
    s.add_argument("--mode", choices=("map", "metrics", "scalar"), required=True)
    s.add_argument("--x-param", required=True)
    s.add_argument("--x-range", required=True, help="lo:hi:n")
    s.add_argument("--y-param", default=None)
    s.add_argument("--y-range", default=None)
    s.set_defaults(func=cmd_sweep)
    s = sub.add_parser("case-hk")
    s.add_argument("--config", default=None, help="override the bundled case config")
    s.set_defaults(func=cmd_case_hk)

    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as err:
        print(f"validation error: {err}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ScenarioMismatch, SingleModePricingError, OutsideL7Regime,
            InconsistentOrdering) as err:
        print(f"scenario/regime error: {err}", file=sys.stderr)
        return EXIT_REGIME


if __name__ == "__main__":
    raise SystemExit(main())
