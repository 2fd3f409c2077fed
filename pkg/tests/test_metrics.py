import dataclasses

import pytest

from tandem_curb import (DepartureProfile, build_curves, compare_uni_bi,
                         metrics, metrics_from_simulation, simulate, solve,
                         verify_equilibrium)
from tandem_curb.curves import StepFunction
from tandem_curb.metrics import Tolerances

from conftest import make_params, rel_err, scenario_params


def test_social_cost_is_demand_times_cost(hk_params):
    sol = solve(hk_params)
    rep = metrics(sol, hk_params)
    assert rep.social_cost == pytest.approx(hk_params.demand * sol.cost_rv, rel=1e-12)
    assert rep.n_rv + rep.n_pv == pytest.approx(hk_params.demand)
    assert rep.tqt_highway > 0 and rep.tqt_curb_rv > 0 and rep.tqt_curb_pv > 0


def test_zero_demand_metrics():
    p = make_params(demand=0, gap=8.0)
    rep = metrics(solve(p), p)
    assert rep.social_cost == 0.0
    assert rep.tqt_total == 0.0


def test_metric_consistency_closed_form_vs_oracle():
    for name in ("S1", "S2", "S3", "S4", "S5", "S6", "S7", "S8"):
        p = scenario_params(name)
        sol = solve(p)
        closed = metrics(sol, p)
        sim = simulate(DepartureProfile.from_solution(sol), p, dt=1e-3)
        oracle = metrics_from_simulation(sim, p)
        assert rel_err(oracle.social_cost, closed.social_cost) < 0.01, name
        assert rel_err(oracle.tqt_total, max(closed.tqt_total, 1e-9)) < 0.01 \
            or abs(oracle.tqt_total - closed.tqt_total) < 1.0, name


def test_tqt_decomposition_matches_travel_time():
    """Summed queue integrals equal total travel-time cost over alpha."""
    for name in ("S3", "S5", "S8"):
        p = scenario_params(name)
        sol = solve(p)
        rep = metrics(sol, p)
        # per-commuter waits: equilibrium cost minus schedule delay and fixed
        # cost, divided by each mode's time valuation, integrated exactly
        cs = build_curves(sol, p)
        import numpy as np
        total_wait = 0.0
        for mode, dep in (("rv", sol.dep_rate_rv), ("pv", sol.dep_rate_pv)):
            for seg in dep:
                ts = np.linspace(seg.start, seg.end, 200)
                waits = [cs.cbd_arrival_time(mode, float(t)) - t for t in ts]
                total_wait += seg.rate * float(np.trapezoid(waits, ts))
        assert rel_err(rep.tqt_total, total_wait) < 0.01, name


def test_verification_fails_for_shifted_solution():
    p = scenario_params("S5")
    sol = solve(p)
    shift = 0.1
    moved = dataclasses.replace(
        sol,
        t0_rv=sol.t0_rv + shift, t1_rv=sol.t1_rv + shift,
        t0_pv=sol.t0_pv + shift, t1_pv=sol.t1_pv + shift,
        dep_rate_rv=StepFunction([(s.start + shift, s.end + shift, s.rate)
                                  for s in sol.dep_rate_rv]),
        dep_rate_pv=StepFunction([(s.start + shift, s.end + shift, s.rate)
                                  for s in sol.dep_rate_pv]),
    )
    rep = verify_equilibrium(moved, p, run_oracle=False)
    assert not rep.passed
    late_check = rep.check("arrivals end by the preferred time")
    assert not late_check.passed and late_check.value > 0.09


def test_compare_uni_bi_hong_kong(hk_params):
    cmp = compare_uni_bi(hk_params)
    assert cmp.all_orderings_hold
    assert cmp.total_bi < cmp.total_uni
    assert cmp.arr_curb_rv_bi < cmp.arr_curb_rv_uni
    assert cmp.arr_curb_pv_bi > cmp.arr_curb_pv_uni


def test_compare_uni_bi_zero_delta_pv_is_exactly_equal():
    p = dataclasses.replace(scenario_params("S5"), delta_pv=0.0)
    cmp = compare_uni_bi(p)
    assert cmp.total_bi == pytest.approx(cmp.total_uni, rel=1e-14)
    assert cmp.arr_curb_rv_bi == pytest.approx(cmp.arr_curb_rv_uni, rel=1e-14)
    assert cmp.arr_curb_pv_bi == pytest.approx(cmp.arr_curb_pv_uni, rel=1e-14)


def test_compare_uni_bi_late_reference_point_no_late_mode(late_reference_params):
    p = dataclasses.replace(late_reference_params, gamma=None)
    cmp = compare_uni_bi(p)
    assert cmp.all_orderings_hold


def test_compare_uni_bi_rejects_separated():
    with pytest.raises(ValueError, match="overlapping"):
        compare_uni_bi(scenario_params("S2"))


def test_verify_report_formatting(hk_params):
    sol = solve(hk_params)
    rep = verify_equilibrium(sol, hk_params, Tolerances(dt=2e-3))
    text = str(rep)
    assert "overall: pass" in text
    assert rep.check("equal cost within rv").passed
