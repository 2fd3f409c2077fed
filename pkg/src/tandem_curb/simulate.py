"""Discrete-time point-queue oracle for the two-tandem corridor.

Forward-in-time simulation on a fixed grid, independent of the closed
forms: the highway serves at capacity with FIFO mode splitting; each
curbside bottleneck serves vehicles at the (possibly spillover-discounted)
rate tagged at their own arrival step.  The discount for one mode engages
only while the other mode is both arriving and queued, so a queue-free
schedule stays queue-free.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .curves import StepFunction
from .params import ModelParams


@dataclass(frozen=True)
class DepartureProfile:
    """Per-mode piecewise-constant home-departure rates."""

    rv: StepFunction
    pv: StepFunction

    @classmethod
    def from_solution(cls, sol) -> "DepartureProfile":
        return cls(sol.dep_rate_rv, sol.dep_rate_pv)

    @classmethod
    def from_segments(cls, rv: Sequence[Tuple[float, float, float]],
                      pv: Sequence[Tuple[float, float, float]] = ()) -> "DepartureProfile":
        return cls(StepFunction(rv), StepFunction(pv))

    @property
    def span(self) -> Tuple[float, float]:
        segs = list(self.rv) + list(self.pv)
        if not segs:
            return (0.0, 0.0)
        return min(s.start for s in segs), max(s.end for s in segs)


@dataclass(frozen=True)
class SimulationResult:
    """Grid times, cumulative curves, and queue series from one run."""

    t: np.ndarray
    dt: float
    cum_dep_rv: np.ndarray
    cum_dep_pv: np.ndarray
    cum_out_highway: np.ndarray
    cum_out_highway_rv: np.ndarray
    cum_out_highway_pv: np.ndarray
    cum_out_curb_rv: np.ndarray
    cum_out_curb_pv: np.ndarray

    @property
    def queue_highway(self) -> np.ndarray:
        return self.cum_dep_rv + self.cum_dep_pv - self.cum_out_highway

    @property
    def queue_curb_rv(self) -> np.ndarray:
        return self.cum_out_highway_rv - self.cum_out_curb_rv

    @property
    def queue_curb_pv(self) -> np.ndarray:
        return self.cum_out_highway_pv - self.cum_out_curb_pv

    def _first_time_at(self, curve: np.ndarray, level: float) -> float:
        i = int(np.searchsorted(curve, level))
        if i == 0:
            return float(self.t[0])
        if i >= len(curve):
            return float(self.t[-1])
        c0, c1 = curve[i - 1], curve[i]
        if c1 <= c0:
            return float(self.t[i])
        return float(self.t[i - 1] + self.dt * (level - c0) / (c1 - c0))

    def cbd_arrival_time(self, mode: str, t_dep: float) -> float:
        """CBD arrival of a vehicle departing home at t_dep (FIFO inversion)."""
        cum_dep = self.cum_dep_rv + self.cum_dep_pv
        n_total = float(np.interp(t_dep, self.t, cum_dep))
        t_curb = max(t_dep, self._first_time_at(self.cum_out_highway, n_total))
        if mode == "rv":
            n_mode = float(np.interp(t_curb, self.t, self.cum_out_highway_rv))
            return max(t_curb, self._first_time_at(self.cum_out_curb_rv, n_mode))
        n_mode = float(np.interp(t_curb, self.t, self.cum_out_highway_pv))
        return max(t_curb, self._first_time_at(self.cum_out_curb_pv, n_mode))


def simulate(profile: DepartureProfile, p: ModelParams, dt: float = 1e-3,
             bidirectional: bool = True, tail: float = 2.0) -> SimulationResult:
    """Run the oracle at step dt (hours) until all queues clear."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    if any(s.rate < 0 for s in profile.rv) or any(s.rate < 0 for s in profile.pv):
        raise ValueError("departure profile has negative rates "
                         "(solution outside its validity region)")
    peak_rate = max([s.rate for s in profile.rv] + [s.rate for s in profile.pv] + [0.0])
    if p.demand > 0 and peak_rate * dt > p.demand:
        raise ValueError("dt too coarse: one step would move more than the whole demand")
    t_lo, t_hi = profile.span
    total = profile.rv.total + profile.pv.total
    drain = total / min(p.s_curb_rv, p.s_curb_pv, p.s_highway) if total else 0.0
    n = int(np.ceil((t_hi - t_lo + drain + tail) / dt)) + 2
    t = t_lo - dt + dt * np.arange(n)

    a_rv_curve = profile.rv.cumulative()
    a_pv_curve = profile.pv.cumulative()
    cum_rv = np.array([a_rv_curve(x) for x in t])
    cum_pv = np.array([a_pv_curve(x) for x in t])
    cum_tot = cum_rv + cum_pv

    s_h = p.s_highway
    out_h = np.zeros(n)
    for i in range(n - 1):
        inflow = cum_tot[i + 1] - cum_tot[i]
        queue = cum_tot[i] - out_h[i]
        if queue <= 1e-12 and inflow <= s_h * dt * (1 + 1e-12):
            out_h[i + 1] = out_h[i] + inflow
        else:
            out_h[i + 1] = min(out_h[i] + s_h * dt, cum_tot[i + 1])

    # FIFO mode split of the highway outflow
    out_h_rv = np.interp(out_h, cum_tot, cum_rv)
    out_h_pv = out_h - out_h_rv

    d_r = p.delta_rv
    d_p = p.delta_pv if bidirectional else 0.0
    arr_r = np.diff(out_h_rv) / dt
    arr_p = np.diff(out_h_pv) / dt

    out_cr = np.zeros(n)
    out_cp = np.zeros(n)
    tag_r = np.empty(n - 1)
    tag_p = np.empty(n - 1)
    head_r = head_p = -1
    rem_r = rem_p = 0.0
    q_eps = 1e-6 * max(1.0, p.demand)
    rate_eps = 1e-9
    for i in range(n - 1):
        q_r = out_h_rv[i] - out_cr[i]
        q_p = out_h_pv[i] - out_cp[i]
        both = arr_r[i] > rate_eps and arr_p[i] > rate_eps
        # discount gated on the source queue being (or this step becoming) positive
        gate_r_src = q_r > q_eps
        gate_p_src = q_p > q_eps
        for _ in range(2):
            tr = arr_r[i] / (arr_r[i] + d_p * arr_p[i]) * p.s_curb_rv \
                if both and d_p > 0 and gate_p_src else p.s_curb_rv
            tp = arr_p[i] / (arr_p[i] + d_r * arr_r[i]) * p.s_curb_pv \
                if both and d_r > 0 and gate_r_src else p.s_curb_pv
            ng_r = gate_r_src or (q_r <= q_eps and arr_r[i] > tr * (1 + 1e-9) + rate_eps)
            ng_p = gate_p_src or (q_p <= q_eps and arr_p[i] > tp * (1 + 1e-9) + rate_eps)
            if (ng_r, ng_p) == (gate_r_src, gate_p_src):
                break
            gate_r_src, gate_p_src = ng_r, ng_p
        tag_r[i] = tr
        tag_p[i] = tp
        out_cr[i + 1], head_r, rem_r = _discharge_step(
            out_cr[i], out_h_rv[i + 1], arr_r, tag_r, head_r, rem_r, i, dt)
        out_cp[i + 1], head_p, rem_p = _discharge_step(
            out_cp[i], out_h_pv[i + 1], arr_p, tag_p, head_p, rem_p, i, dt)

    return SimulationResult(t=t, dt=dt, cum_dep_rv=cum_rv, cum_dep_pv=cum_pv,
                            cum_out_highway=out_h, cum_out_highway_rv=out_h_rv,
                            cum_out_highway_pv=out_h_pv, cum_out_curb_rv=out_cr,
                            cum_out_curb_pv=out_cp)


def _discharge_step(served: float, avail_next: float, arr: np.ndarray, tags: np.ndarray,
                    head: int, rem: float, i: int, dt: float) -> Tuple[float, int, float]:
    """Serve one step of a work-conserving queue with arrival-tagged rates.

    head/rem track the oldest arrival cohort with unserved vehicles; head
    starts at -1 with nothing loaded.
    """
    budget = dt
    out = 0.0
    avail = avail_next - served
    while budget > 1e-15 and out < avail - 1e-12:
        if rem <= 1e-12:
            if head >= i:
                break
            head += 1
            rem = arr[head] * dt
            continue
        rate = tags[head]
        if rate <= 1e-12:
            break
        take = min(budget * rate, rem, avail - out)
        out += take
        rem -= take
        budget -= take / rate
    if avail - out < 1e-12:
        out = max(avail, 0.0)
    return served + out, head, rem


def experienced_cost(result: SimulationResult, p: ModelParams, mode: str,
                     t_dep: float, late: bool = False,
                     fee: Optional[float] = None) -> float:
    """Generalized cost realized in the simulation for one departure time.

    Fees are not simulated; pass one to add it analytically.
    """
    if not result.t[0] <= t_dep <= result.t[-1]:
        raise ValueError("departure time outside the simulated horizon")
    t_cbd = result.cbd_arrival_time(mode, t_dep)
    wait = t_cbd - t_dep
    if late:
        if p.gamma is None:
            raise ValueError("late cost evaluation requires gamma")
        sched = p.beta * max(-t_cbd, 0.0) + p.gamma * max(t_cbd, 0.0)
    else:
        sched = p.beta * (-t_cbd)
    base = (p.alpha + p.pi) * wait + sched + p.c_rv if mode == "rv" \
        else p.alpha * wait + sched + p.pv_fixed_cost
    return base + (fee or 0.0)
