import numpy as np
import pytest

from tandem_curb import (DepartureProfile, build_curves, experienced_cost,
                         simulate, solve)

from conftest import make_params, scenario_params


def test_under_capacity_inflow_no_queue():
    p = make_params()
    prof = DepartureProfile.from_segments([(-1.0, 0.0, 1200.0)])
    sim = simulate(prof, p, dt=1e-3)
    assert sim.queue_highway.max() == pytest.approx(0.0, abs=1e-9)
    assert sim.queue_curb_rv.max() == pytest.approx(0.0, abs=1e-9)


def test_triangle_queue_at_curb():
    """Inflow at twice the curb rate for T: peak queue s*T at T, gone by 2T."""
    p = make_params(s_curb_rv=1000.0, s_highway=2500.0)
    T = 0.5
    prof = DepartureProfile.from_segments([(0.0, T, 2000.0)])
    sim = simulate(prof, p, dt=1e-3)
    q = sim.queue_curb_rv
    i_peak = int(np.argmax(q))
    assert sim.t[i_peak] == pytest.approx(T, abs=3e-3)
    assert q[i_peak] == pytest.approx(1000.0 * T, abs=5.0)
    i_done = np.nonzero(q > 0.5)[0][-1]
    assert sim.t[i_done] == pytest.approx(2 * T, abs=3e-3)


def test_dt_guard():
    p = make_params(demand=10)
    prof = DepartureProfile.from_segments([(0.0, 1.0, 10.0)])
    with pytest.raises(ValueError, match="dt too coarse"):
        simulate(prof, p, dt=2.0)
    with pytest.raises(ValueError, match="dt must be positive"):
        simulate(prof, p, dt=0.0)


def test_conservation_within_one_step():
    p = scenario_params("S5")
    sol = solve(p)
    sim = simulate(DepartureProfile.from_solution(sol), p, dt=1e-3)
    out = sim.cum_out_curb_rv[-1] + sim.cum_out_curb_pv[-1]
    assert abs(out - p.demand) <= p.s_highway * sim.dt


def test_fifo_mode_split_never_overtakes():
    p = scenario_params("S8")
    sol = solve(p)
    sim = simulate(DepartureProfile.from_solution(sol), p, dt=1e-3)
    assert np.all(np.diff(sim.cum_out_highway_rv) >= -1e-9)
    assert np.all(np.diff(sim.cum_out_highway_pv) >= -1e-9)
    assert np.all(sim.cum_out_highway_rv <= sim.cum_dep_rv + 1e-6)
    assert np.all(sim.cum_out_highway_pv <= sim.cum_dep_pv + 1e-6)
    assert np.all(sim.queue_highway >= -1e-9)
    assert np.all(sim.queue_curb_rv >= -1e-9)
    assert np.all(sim.queue_curb_pv >= -1e-9)


def test_refinement_convergence_first_order():
    """Halving dt roughly halves the worst queue deviation from the exact curves."""
    p = scenario_params("S5")
    sol = solve(p)
    cs = build_curves(sol, p)
    devs = {}
    for dt in (4e-3, 2e-3, 1e-3, 5e-4):
        sim = simulate(DepartureProfile.from_solution(sol), p, dt=dt)
        worst = 0.0
        for series, curve in ((sim.queue_highway, cs.queue_highway),
                              (sim.queue_curb_rv, cs.queue_curb_rv),
                              (sim.queue_curb_pv, cs.queue_curb_pv)):
            exact = np.array([curve(t) for t in sim.t])
            worst = max(worst, float(np.abs(series - exact).max()))
        devs[dt] = worst
    # first-order scheme: two halvings cut the deviation to about a quarter
    # (single halvings can be masked by grid-phase effects)
    assert devs[1e-3] <= 0.35 * devs[4e-3]
    assert devs[5e-4] <= 0.35 * devs[2e-3]


def test_first_rv_cost_is_pure_schedule_delay():
    p = scenario_params("S2")
    sol = solve(p)
    sim = simulate(DepartureProfile.from_solution(sol), p, dt=5e-4)
    c = experienced_cost(sim, p, "rv", sol.t0_rv + 1e-6)
    assert c == pytest.approx(p.beta * (-sol.t0_rv) + p.c_rv, rel=1e-3)


def test_experienced_cost_outside_horizon():
    p = scenario_params("S1")
    sol = solve(p)
    sim = simulate(DepartureProfile.from_solution(sol), p, dt=1e-3)
    with pytest.raises(ValueError, match="horizon"):
        experienced_cost(sim, p, "rv", sim.t[-1] + 1.0)


def test_hong_kong_queue_window_matches_curves(hk_params):
    sol = solve(hk_params)
    cs = build_curves(sol, hk_params)
    sim = simulate(DepartureProfile.from_solution(sol), hk_params, dt=1e-3)
    lo, hi = cs.queue_window("highway", threshold=0.5)
    qz = sim.queue_highway > 0.5
    assert sim.t[qz][0] == pytest.approx(lo, abs=2e-3)   # within 2 steps
    assert sim.t[qz][-1] == pytest.approx(hi, abs=2e-3)


def test_hong_kong_oracle_costs_within_one_percent(hk_params):
    """Every simulated departure inside the equilibrium windows costs
    within 1% of the closed-form equilibrium cost."""
    sol = solve(hk_params)
    sim = simulate(DepartureProfile.from_solution(sol), hk_params, dt=1e-3)
    for mode, lo, hi in (("rv", sol.t0_rv, sol.t1_rv), ("pv", sol.t0_pv, sol.t1_pv)):
        ts = np.linspace(lo + (hi - lo) * 0.01, hi - (hi - lo) * 0.01, 60)
        for t in ts:
            c = experienced_cost(sim, hk_params, mode, float(t))
            assert abs(c - sol.cost_rv) / sol.cost_rv < 0.01
