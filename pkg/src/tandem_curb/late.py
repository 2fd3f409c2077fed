"""Late-arrival equilibrium for the L7-type pattern.

With a finite late-arrival penalty the co-departure stage splits into three
segments: both modes early, RVs early while PVs late, and both late.  The
late segments reuse the early-arrival rate formulas with the early-arrival
value replaced by the negative late-arrival value.  Only this pattern (the one
the reference example exhibits) is solved in closed form; other late scenarios raise
OutsideL7Regime with a hint at the cell of the late-scenario taxonomy they
appear to fall in.

The reference example's parameters put the initial queue at both
bottlenecks rather than the curb alone; the solver therefore supports both
onsets, applying the first-private-vehicle highway-wait correction exactly
as in the no-late both-queued scenarios.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional, Tuple

from .classify import Spillover
from .curves import StepFunction
from .params import ModelParams
from .solver import co_stage_rates_late, initial_rate


class OrderingCase(enum.Enum):
    """Relationship between on-time departures and the PV interval."""
    RV_ALL_LATE = "a"        # on-time RV departs before the first PV
    RV_BEFORE_PV = "b"       # on-time RV inside the PV interval, before on-time PV
    PV_BEFORE_RV = "c"       # on-time PV before on-time RV, both inside PV interval


class OutsideL7Regime(RuntimeError):
    """Solved times violate the L7 ordering or queue pattern."""

    def __init__(self, message: str, candidate: Optional["LateSolution"] = None,
                 hint: Optional[str] = None):
        super().__init__(message + (f" ({hint})" if hint else ""))
        self.candidate = candidate
        self.hint = hint


@dataclass(frozen=True)
class LateSolution:
    """L7 equilibrium: critical times, on-time departures, rate schedule."""

    t0_rv: float
    t1_rv: float
    t0_pv: float
    t1_pv: float
    t_on_time_rv: float      # departure arriving exactly at the preferred time
    t_on_time_pv: float
    n_rv: float
    n_pv: float
    cost_rv: float
    cost_pv: float
    entry_wait_pv: float     # highway wait of the first PV
    wait_highway_last_pv: float
    t_highway_clear: float   # interior time the highway queue dissipates
    both_queued_onset: bool
    dep_rate_rv: StepFunction
    dep_rate_pv: StepFunction
    diagnostics: Tuple[str, ...] = ()

    def dep_rate_total(self) -> StepFunction:
        segs = [(s.start, s.end, s.rate) for s in self.dep_rate_rv]
        segs += [(s.start, s.end, s.rate) for s in self.dep_rate_pv]
        pts = sorted({t for seg in segs for t in (seg[0], seg[1])})
        out = []
        for t0, t1 in zip(pts, pts[1:]):
            mid = 0.5 * (t0 + t1)
            r = self.dep_rate_rv.rate_at(mid) + self.dep_rate_pv.rate_at(mid)
            if r > 0:
                out.append((t0, t1, r))
        return StepFunction(out)

    @property
    def ordering(self) -> OrderingCase:
        return classify_ordering(self)

    def scheduled_arrival(self, p: ModelParams, mode: str, t_dep: float) -> float:
        """Workplace arrival time the equilibrium construction assigns to a
        departure: piecewise-affine in the departure time, anchored at the
        first departure and pivoting at the on-time departure."""
        a, b, g, pi = p.alpha, p.beta, p.gamma, p.pi
        if mode == "rv":
            if t_dep <= self.t_on_time_rv:
                return self.t0_rv + (t_dep - self.t0_rv) * (a + pi) / (a + pi - b)
            return (t_dep - self.t_on_time_rv) * (a + pi) / (a + pi + g)
        if t_dep <= self.t_on_time_pv:
            return (self.t0_pv + self.entry_wait_pv
                    + (t_dep - self.t0_pv) * a / (a - b))
        return (t_dep - self.t_on_time_pv) * a / (a + g)

    def construction_cost(self, p: ModelParams, mode: str, t_dep: float) -> float:
        """Generalized cost implied by the construction's waits."""
        arr = self.scheduled_arrival(p, mode, t_dep)
        wait = arr - t_dep
        sched = p.beta * max(-arr, 0.0) + p.gamma * max(arr, 0.0)
        if mode == "rv":
            return (p.alpha + p.pi) * wait + sched + p.c_rv
        return p.alpha * wait + sched + p.pv_fixed_cost


def classify_ordering(sol, t1_pv: Optional[float] = None,
                      t_on_rv: Optional[float] = None,
                      t_on_pv: Optional[float] = None) -> OrderingCase:
    """Which of the three departure-interval relationships holds.

    Accepts a LateSolution, or the four times (t0_pv, t1_pv, on-time RV,
    on-time PV) directly.  Boundaries go to the earlier-listed case.
    """
    if t1_pv is None:
        t0_pv, t1_pv = sol.t0_pv, sol.t1_pv
        t_on_rv, t_on_pv = sol.t_on_time_rv, sol.t_on_time_pv
    else:
        t0_pv = sol
    if t_on_rv <= t0_pv:
        return OrderingCase.RV_ALL_LATE
    if t_on_rv <= t_on_pv:
        return OrderingCase.RV_BEFORE_PV
    if t_on_rv < t1_pv:
        return OrderingCase.PV_BEFORE_RV
    raise OutsideL7Regime(
        "on-time RV departure after the last PV departure is impossible at equilibrium")


def solve_l7(p: ModelParams, spillover: Spillover = Spillover.BIDIRECTIONAL,
             strict: bool = True) -> LateSolution:
    """Closed-form L7-type equilibrium (both modes, overlap, late arrivals).

    With strict=True, violations of the required ordering or queue pattern
    raise OutsideL7Regime carrying the candidate solution; strict=False
    returns the candidate with diagnostics instead.
    """
    if p.gamma is None:
        raise ValueError("solve_l7 requires gamma (late-arrival value)")
    a, b, g, pi = p.alpha, p.beta, p.gamma, p.pi
    gap, n, s_h = p.cost_gap, p.demand, p.s_highway
    seg_early, seg_mixed, seg_late = (
        co_stage_rates_late(p, spillover, b, b),
        co_stage_rates_late(p, spillover, b, -g),
        co_stage_rates_late(p, spillover, -g, -g),
    )
    r1 = initial_rate(p)
    r_final = (a + pi) * p.s_curb_rv / (a + pi + g)
    both_onset = r1 > s_h * (1 + 1e-12)
    if both_onset:
        beta8 = a - (a - b) * r1 / s_h
        d_shift = gap / beta8
        w0 = (r1 / s_h - 1.0) * d_shift
    else:
        d_shift = gap / b
        w0 = 0.0

    # Unknowns: X = t* - t0_rv and C3 = t1_pv - on-time-RV departure.
    # Segment lengths (linear in X, C3):
    #   A = (beta(X - d_shift) ... both-early),  B = mixed,  C3 = both-late.
    def residuals(x: float, c3: float) -> Tuple[float, float]:
        seg_a = (a - b) * (x - d_shift - w0) / a
        t_star_minus_on_pv = (b * (x - d_shift) + (a - b) * w0) / a
        seg_b = t_star_minus_on_pv - b * x / (a + pi)
        w_h_last = w0 + ((seg_early.total - s_h) * seg_a + (seg_mixed.total - s_h) * seg_b
                         + (seg_late.total - s_h) * c3) / s_h
        e_last_pv = (b * (x - d_shift) + (a - b) * w0
                     - (a + g) * w_h_last - g * (c3 - b * x / (a + pi)))
        tail = b * x / g - c3 + b * x / (a + pi)
        e_pop = n - (r1 * d_shift + seg_early.total * seg_a + seg_mixed.total * seg_b
                     + seg_late.total * c3 + r_final * tail)
        return e_last_pv, e_pop

    f00 = residuals(0.0, 0.0)
    fx = residuals(1.0, 0.0)
    fc = residuals(0.0, 1.0)
    a11, a12 = fx[0] - f00[0], fc[0] - f00[0]
    a21, a22 = fx[1] - f00[1], fc[1] - f00[1]
    det = a11 * a22 - a12 * a21
    if abs(det) < 1e-12:
        raise OutsideL7Regime("degenerate late-equilibrium system")
    x = (-f00[0] * a22 + f00[1] * a12) / det
    c3 = (-a11 * f00[1] + a21 * f00[0]) / det

    t0_rv = -x
    t0_pv = t0_rv + d_shift
    t_on_rv = -b * x / (a + pi)
    t_on_pv = -(b * (x - d_shift) + (a - b) * w0) / a
    t1_pv = t_on_rv + c3
    t1_rv = b * x / g
    seg_a = (a - b) * (x - d_shift - w0) / a
    seg_b = (b * (x - d_shift) + (a - b) * w0) / a - b * x / (a + pi)
    w_h_last = w0 + ((seg_early.total - s_h) * seg_a + (seg_mixed.total - s_h) * seg_b
                     + (seg_late.total - s_h) * c3) / s_h
    t_clear = t1_pv + s_h * w_h_last / (s_h - r_final) if s_h > r_final else t1_rv
    n_pv = (seg_early.dep_pv * seg_a + seg_mixed.dep_pv * seg_b + seg_late.dep_pv * c3)
    cost = b * x + p.c_rv

    diagnostics = []
    try:
        dep_rv = StepFunction([
            (t0_rv, t0_pv, r1),
            (t0_pv, t_on_pv, seg_early.dep_rv),
            (t_on_pv, t_on_rv, seg_mixed.dep_rv),
            (t_on_rv, t1_pv, seg_late.dep_rv),
            (t1_pv, t1_rv, r_final),
        ])
        dep_pv = StepFunction([
            (t0_pv, t_on_pv, seg_early.dep_pv),
            (t_on_pv, t_on_rv, seg_mixed.dep_pv),
            (t_on_rv, t1_pv, seg_late.dep_pv),
        ])
    except ValueError:
        dep_rv = StepFunction([])
        dep_pv = StepFunction([])
        diagnostics.append("departure times out of sequence: no rate schedule built")
    if not (t0_rv < t0_pv < t_on_pv < t_on_rv < t1_pv < t1_rv):
        diagnostics.append("L7 ordering violated: "
                           + _ordering_hint(t0_rv, t0_pv, t_on_pv, t_on_rv, t1_pv, t1_rv))
    if seg_early.total <= s_h:
        diagnostics.append("no highway queue during co-departure: not an L7 pattern "
                           "(late-taxonomy row 'curb only')")
    if w_h_last < -1e-9:
        diagnostics.append("highway queue would be negative at the last PV departure")
    if t_clear > t1_rv + 1e-9:
        diagnostics.append("highway queue does not dissipate before the last RV departs")
    for name, rates in (("RV", (seg_early.dep_rv, seg_mixed.dep_rv, seg_late.dep_rv)),
                        ("PV", (seg_early.dep_pv, seg_mixed.dep_pv, seg_late.dep_pv))):
        if min(rates) < -1e-9:
            diagnostics.append(f"negative {name} co-departure rate: outside validity range")
    sol = LateSolution(
        t0_rv=t0_rv, t1_rv=t1_rv, t0_pv=t0_pv, t1_pv=t1_pv,
        t_on_time_rv=t_on_rv, t_on_time_pv=t_on_pv,
        n_rv=n - n_pv, n_pv=n_pv, cost_rv=cost, cost_pv=cost,
        entry_wait_pv=w0, wait_highway_last_pv=w_h_last, t_highway_clear=t_clear,
        both_queued_onset=both_onset, dep_rate_rv=dep_rv, dep_rate_pv=dep_pv,
        diagnostics=tuple(diagnostics),
    )
    if strict and diagnostics:
        raise OutsideL7Regime("outside L7 regime: " + "; ".join(diagnostics), candidate=sol)
    return sol


def _ordering_hint(t0r, t0p, t_on_p, t_on_r, t1p, t1r) -> str:
    if t_on_r < t0p:
        return "pattern suggests ordering case (a) (taxonomy column 1)"
    if t_on_r < t_on_p:
        return "pattern suggests ordering case (b) (taxonomy column 2)"
    if t1p >= t1r:
        return "PV interval not contained in the RV interval"
    return "departure times out of sequence"
