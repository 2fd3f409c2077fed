"""Closed-form no-toll user equilibria for the eight scenarios.

All times are hours relative to the preferred arrival time.  The solutions
follow the closed forms of the source model; the overlapping scenarios are
solved through a common reduction: at equilibrium each mode's workplace
(CBD) arrival time is an affine function of its home-departure time, so the
whole system collapses to two linear equations in the RV mode split and the
first RV departure time.  Both orderings of the last departures are solved
and the self-consistent one is kept.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import List, Optional, Tuple

from .classify import PhaseRegime, Scenario, Spillover, classify, initial_phase_regime
from .curves import CurveSet, StepFunction, propagate
from .params import ModelParams

_REL = 1e-9


class ScenarioMismatch(ValueError):
    """Solver called for parameters whose scenario it does not cover."""


class InconsistentOrdering(RuntimeError):
    """Neither last-departure ordering is self-consistent."""

    def __init__(self, message: str, candidates):
        super().__init__(message)
        self.candidates = candidates


@dataclass(frozen=True)
class CoStageRates:
    """Constants of the co-departure stage."""
    dep_rv: float          # home-departure rate of RVs
    dep_pv: float          # home-departure rate of PVs
    mix_rv: float          # RV share of curbside arrivals
    s_tilde_rv: float      # discounted curb service rate for RVs
    s_tilde_pv: float      # discounted curb service rate for PVs

    @property
    def total(self) -> float:
        return self.dep_rv + self.dep_pv


def k_rv(p: ModelParams) -> float:
    """Early-arrival system-time expansion factor for RVs."""
    return (p.alpha + p.pi) / (p.alpha + p.pi - p.beta)


def k_pv(p: ModelParams) -> float:
    return p.alpha / (p.alpha - p.beta)


def initial_rate(p: ModelParams) -> float:
    """Home-departure rate while only RVs depart (both queue regimes)."""
    return k_rv(p) * p.s_curb_rv


def initial_phase_rates(p: ModelParams) -> Tuple[float, float]:
    """(home-departure rate, curbside arrival rate) at the start of the peak."""
    dep = initial_rate(p)
    if initial_phase_regime(p) is PhaseRegime.CURB_ONLY:
        return dep, dep
    return dep, p.s_highway


def co_stage_rates_late(p: ModelParams, spillover: Spillover,
                        v_rv: float, v_pv: float) -> CoStageRates:
    """Co-departure rates with given schedule-delay slopes per mode.

    v is the early-arrival value for commuters arriving early and the
    negated late-arrival value for those arriving late; the early/early case
    reproduces the no-late co-departure rates.
    """
    a, pi = p.alpha, p.pi
    d_r = p.delta_rv
    d_p = p.delta_pv if spillover is Spillover.BIDIRECTIONAL else 0.0
    dd = 1.0 - d_r * d_p
    total = (a * (1 - d_p) * p.s_curb_pv / (a - v_pv)
             + (a + pi) * (1 - d_r) * p.s_curb_rv / (a + pi - v_rv)) / dd
    num = (a + pi) * (a - v_pv) * p.s_curb_rv - a * (a + pi - v_rv) * d_p * p.s_curb_pv
    den = ((a + pi) * (a - v_pv) * (1 - d_r) * p.s_curb_rv
           + a * (a + pi - v_rv) * (1 - d_p) * p.s_curb_pv)
    mix = num / den
    dep_rv = total * mix
    dep_pv = total - dep_rv
    s_t_rv = mix * p.s_curb_rv / (mix + d_p * (1 - mix)) if mix > 0 else p.s_curb_rv
    s_t_pv = (1 - mix) * p.s_curb_pv / ((1 - mix) + d_r * mix) if mix < 1 else p.s_curb_pv
    return CoStageRates(dep_rv, dep_pv, mix, s_t_rv, s_t_pv)


def co_stage_rates(p: ModelParams, spillover: Spillover) -> CoStageRates:
    """Equilibrium rates while both modes depart together (all early)."""
    return co_stage_rates_late(p, spillover, p.beta, p.beta)


@dataclass(frozen=True)
class EquilibriumSolution:
    """No-toll equilibrium: critical times, mode split, and rate schedules."""

    scenario: Scenario
    spillover: Spillover
    t0_rv: float
    t1_rv: float
    n_rv: float
    cost_rv: float
    n_pv: float = 0.0
    t0_pv: Optional[float] = None
    t1_pv: Optional[float] = None
    cost_pv: Optional[float] = None
    sub_case: Optional[str] = None        # "t1p<=t1r" or "t1p>t1r" when overlapping
    entry_wait_pv: float = 0.0            # highway wait of the first PV
    dep_rate_rv: StepFunction = StepFunction([])
    dep_rate_pv: StepFunction = StepFunction([])
    arr_rate_curb_rv: StepFunction = StepFunction([])   # realized curb arrivals
    arr_rate_curb_pv: StepFunction = StepFunction([])
    s_tilde_rv: Optional[float] = None    # co-stage discounted curb rates
    s_tilde_pv: Optional[float] = None
    diagnostics: Tuple[str, ...] = ()

    def dep_rate_total(self) -> StepFunction:
        segs = [(s.start, s.end, s.rate) for s in self.dep_rate_rv]
        segs += [(s.start, s.end, s.rate) for s in self.dep_rate_pv]
        # merge overlapping by resampling on the union of breakpoints
        pts = sorted({t for s in segs for t in (s[0], s[1])})
        out = []
        for t0, t1 in zip(pts, pts[1:]):
            mid = 0.5 * (t0 + t1)
            r = self.dep_rate_rv.rate_at(mid) + self.dep_rate_pv.rate_at(mid)
            if r > 0:
                out.append((t0, t1, r))
        return StepFunction(out)


def build_curves(sol: EquilibriumSolution, p: ModelParams) -> CurveSet:
    """Exact corridor curves for a solved equilibrium's departure schedule."""
    return propagate(sol.dep_rate_rv, sol.dep_rate_pv, p,
                     bidirectional=sol.spillover is Spillover.BIDIRECTIONAL)


def arrival_rate_steps(sol: EquilibriumSolution, p: ModelParams
                       ) -> Tuple[StepFunction, StepFunction]:
    """Realized curbside arrival-rate schedules (slopes of the exact curves)."""
    cs = build_curves(sol, p)

    def steps(curve) -> StepFunction:
        out = []
        for i in range(len(curve.times) - 1):
            dt = curve.times[i + 1] - curve.times[i]
            if dt <= 0:
                continue
            r = (curve.values[i + 1] - curve.values[i]) / dt
            if out and abs(out[-1][2] - r) < 1e-6 and abs(out[-1][1] - curve.times[i]) < 1e-12:
                out[-1] = (out[-1][0], curve.times[i + 1], out[-1][2])
            elif r > 1e-9:
                out.append((curve.times[i], curve.times[i + 1], r))
        return StepFunction(out)

    return steps(cs.a_curb_rv), steps(cs.a_curb_pv)


def _attach_arrivals(sol: EquilibriumSolution, p: ModelParams) -> EquilibriumSolution:
    """Fill the curb arrival-rate fields from the exact propagation."""
    if sol.diagnostics and any("negative" in d for d in sol.diagnostics):
        return sol
    if sol.dep_rate_rv.total == 0 and sol.dep_rate_pv.total == 0:
        return sol
    arr_rv, arr_pv = arrival_rate_steps(sol, p)
    return replace(sol, arr_rate_curb_rv=arr_rv, arr_rate_curb_pv=arr_pv)


# ---------------------------------------------------------------------------

def solve_single_mode(p: ModelParams, spillover: Spillover = Spillover.BIDIRECTIONAL
                      ) -> EquilibriumSolution:
    """Scenarios 1 and 6: every commuter rides (classic single-mode peak)."""
    sc = classify(p, spillover)
    if not sc.single_mode:
        raise ScenarioMismatch(f"parameters classify to {sc.value}, not S1/S6")
    n = p.demand
    if n == 0:
        return EquilibriumSolution(sc, spillover, 0.0, 0.0, 0.0, p.c_rv)
    t0 = -n / p.s_curb_rv
    t1 = -p.beta * n / ((p.alpha + p.pi) * p.s_curb_rv)
    dep = StepFunction([(t0, t1, initial_rate(p))])
    cost = p.beta * (-t0) + p.c_rv
    return _attach_arrivals(
        EquilibriumSolution(sc, spillover, t0, t1, n, cost, dep_rate_rv=dep), p)


def solve_separated(p: ModelParams, spillover: Spillover = Spillover.BIDIRECTIONAL
                    ) -> EquilibriumSolution:
    """Scenarios 2, 4, 7: both modes used, departure intervals disjoint."""
    sc = classify(p, spillover)
    if not sc.separated:
        raise ScenarioMismatch(f"parameters classify to {sc.value}, not S2/S4/S7")
    a, b, n, gap = p.alpha, p.beta, p.demand, p.cost_gap
    diagnostics: List[str] = []

    def separated_times(n_rv):
        t0r = -n_rv / p.s_curb_rv
        t1r = -b * n_rv / ((a + p.pi) * p.s_curb_rv)
        t0p = -(n - n_rv) / p.s_curb_pv
        t1p = -b * (n - n_rv) / (a * p.s_curb_pv)
        return t0r, t1r, t0p, t1p

    if sc in (Scenario.S2, Scenario.S4):
        n_rv = (n * b + gap * p.s_curb_pv) * p.s_curb_rv / (b * (p.s_curb_rv + p.s_curb_pv))
        t0r, t1r, t0p, t1p = separated_times(n_rv)
        w0 = 0.0
        sub = None
    else:
        # S7: the first PV may enter behind the residual RV highway queue.
        n_rv1 = n * p.s_highway * p.s_curb_rv / (
            p.s_highway * (p.s_curb_rv + p.s_curb_pv) - p.s_curb_rv * p.s_curb_pv)
        t0r1 = -n_rv1 / p.s_curb_rv
        t_clear = t0r1 + n_rv1 / p.s_highway          # last RV leaves the highway
        t_shift = (gap + (a - b) * n_rv1 / p.s_highway) / a
        t0p1 = t0r1 + t_shift
        n_rv2 = (n * b + gap * p.s_curb_pv) * p.s_curb_rv / (b * (p.s_curb_rv + p.s_curb_pv))
        t0p2 = -(n - n_rv2) / p.s_curb_pv
        t_clear2 = -n_rv2 / p.s_curb_rv + n_rv2 / p.s_highway
        tol = _REL * max(1.0, abs(t_clear))
        if t0p1 <= t_clear + tol:
            n_rv = n_rv1
            t0r, t1r, _, _ = separated_times(n_rv)
            t0p = t0p1
            w0 = n_rv / p.s_highway - t_shift
            t1p = t0p + (n - n_rv) * (a - b) / (a * p.s_curb_pv)
            sub = "queued-entry"
        elif t0p2 > t_clear2 - tol:
            n_rv = n_rv2
            t0r, t1r, t0p, t1p = separated_times(n_rv)
            w0 = 0.0
            sub = "clear-entry"
        else:
            raise InconsistentOrdering(
                "neither S7 entry sub-case is self-consistent",
                candidates=((n_rv1, t0p1, t_clear), (n_rv2, t0p2, t_clear2)))

    n_rv, diag = _clamp_split(n_rv, n)
    diagnostics += diag
    dep_rv = StepFunction([(t0r, t1r, initial_rate(p))])
    dep_pv = StepFunction([(t0p, t1p, k_pv(p) * p.s_curb_pv)])
    cost = b * (-t0r) + p.c_rv
    return _attach_arrivals(
        EquilibriumSolution(sc, spillover, t0r, t1r, n_rv, cost, n_pv=n - n_rv,
                            t0_pv=t0p, t1_pv=t1p, cost_pv=cost,
                            sub_case=sub, entry_wait_pv=w0,
                            dep_rate_rv=dep_rv, dep_rate_pv=dep_pv,
                            diagnostics=tuple(diagnostics)), p)


def solve_overlapping(p: ModelParams, spillover: Spillover = Spillover.BIDIRECTIONAL
                      ) -> EquilibriumSolution:
    """Scenarios 3, 5, 8: both modes used with a co-departure stage.

    Solves both last-departure orderings and keeps the self-consistent one
    (ties prefer t1_pv <= t1_rv).  Under delta_pv = 0 the results coincide
    with the unidirectional closed forms term by term.
    """
    sc = classify(p, spillover)
    if not sc.overlapping:
        raise ScenarioMismatch(f"parameters classify to {sc.value}, not S3/S5/S8")
    a, b, n, gap = p.alpha, p.beta, p.demand, p.cost_gap
    kr, kp = k_rv(p), k_pv(p)
    G = kr / kp
    co = co_stage_rates(p, spillover)
    scr, st_r, st_p = p.s_curb_rv, co.s_tilde_rv, co.s_tilde_pv
    r1 = initial_rate(p)

    if sc is Scenario.S8:
        beta8 = a - (a - b) * r1 / p.s_highway
        d_shift = gap / beta8
        w0 = (r1 / p.s_highway - 1.0) * d_shift
    else:
        d_shift = gap / b
        w0 = 0.0
    dw = d_shift + w0

    def last_pv_time(x):
        # Ex^P(t1_pv) = t*: the first PV's highway wait shifts the PV window
        return -(b * (x - d_shift) + (a - b) * w0) / a

    # ordering A: t1_pv <= t1_rv (RVs depart last)
    xa = (n + st_p * dw - (scr - st_r) * G * dw) / (st_p + scr - (scr - st_r) * G)
    nra = scr * xa - (scr - st_r) * G * (xa - dw)
    t1pa = last_pv_time(xa)
    t1ra = -b * xa / (a + p.pi)
    # ordering B: t1_pv > t1_rv (PVs depart last)
    coef_b = st_r + p.s_curb_pv - (p.s_curb_pv - st_p) * kp / kr
    xb = (n - kr * (scr - st_r) * d_shift + p.s_curb_pv * dw
          - (p.s_curb_pv - st_p) * kp * d_shift) / coef_b
    nrb = st_r * xb + kr * (scr - st_r) * d_shift
    t1pb = last_pv_time(xb)
    t1rb = -b * xb / (a + p.pi)

    tol = _REL * max(1.0, abs(t1ra))
    ok_a = t1pa <= t1ra + tol
    ok_b = t1pb > t1rb - tol
    if ok_a:
        x, n_rv, t1p, t1r, sub = xa, nra, t1pa, t1ra, "t1p<=t1r"
    elif ok_b:
        x, n_rv, t1p, t1r, sub = xb, nrb, t1pb, t1rb, "t1p>t1r"
    else:
        raise InconsistentOrdering(
            "neither last-departure ordering is self-consistent",
            candidates=({"x": xa, "n_rv": nra, "t1_pv": t1pa, "t1_rv": t1ra},
                        {"x": xb, "n_rv": nrb, "t1_pv": t1pb, "t1_rv": t1rb}))

    n_rv, diagnostics = _clamp_split(n_rv, n)
    if min(co.dep_rv, co.dep_pv) < -1e-9:
        diagnostics.append("negative co-departure rate: parameters lie outside "
                           "the overlap construction's validity region")
    t0r = -x
    t0p = t0r + d_shift
    cost = b * x + p.c_rv
    if sub == "t1p<=t1r":
        dep_rv = StepFunction([(t0r, t0p, r1), (t0p, t1p, co.dep_rv), (t1p, t1r, r1)])
        dep_pv = StepFunction([(t0p, t1p, co.dep_pv)])
    else:
        dep_rv = StepFunction([(t0r, t0p, r1), (t0p, t1r, co.dep_rv)])
        dep_pv = StepFunction([(t0p, t1r, co.dep_pv), (t1r, t1p, kp * p.s_curb_pv)])
    return _attach_arrivals(
        EquilibriumSolution(sc, spillover, t0r, t1r, n_rv, cost, n_pv=n - n_rv,
                            t0_pv=t0p, t1_pv=t1p, cost_pv=cost,
                            sub_case=sub, entry_wait_pv=w0,
                            dep_rate_rv=dep_rv, dep_rate_pv=dep_pv,
                            s_tilde_rv=st_r, s_tilde_pv=st_p,
                            diagnostics=tuple(diagnostics)), p)


def solve(p: ModelParams, spillover: Spillover = Spillover.BIDIRECTIONAL
          ) -> EquilibriumSolution:
    """Dispatch to the scenario-appropriate closed form."""
    sc = classify(p, spillover)
    if sc.single_mode:
        return solve_single_mode(p, spillover)
    if sc.separated:
        return solve_separated(p, spillover)
    return solve_overlapping(p, spillover)


def _clamp_split(n_rv: float, n: float) -> Tuple[float, List[str]]:
    if n_rv < -1e-9 * max(1.0, n):
        return 0.0, ["mode split clamped to 0: parameters lie outside the scenario's validity region"]
    if n_rv > n * (1 + 1e-12) + 1e-9:
        return n, ["mode split clamped to demand: parameters lie outside the scenario's validity region"]
    return min(max(n_rv, 0.0), n), []
