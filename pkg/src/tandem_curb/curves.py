"""Piecewise-linear cumulative curves and exact point-queue propagation.

Given per-mode piecewise-constant home-departure rates, this module
propagates the flow through the highway bottleneck and the two coupled
curbside bottlenecks exactly (event-driven, no time grid):

* the highway serves FIFO at its capacity whenever a queue exists;
* its outflow carries the mode mix of the departure cohort at the queue
  head, so curbside arrival curves follow by inverting the cumulative count;
* each curbside bottleneck serves FIFO, with every vehicle's service rate
  fixed at its own arrival instant: the full curb rate normally, or the
  spillover-discounted rate when both modes are arriving simultaneously and
  the other mode's queue is nonempty (a queue that is about to form in the
  same instant counts as nonempty, so discounts engage exactly when
  co-departure congestion starts and never at a queue-free optimum).
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

from .params import ModelParams

_TTOL = 1e-12


@dataclass(frozen=True)
class Segment:
    """Constant-rate piece of a departure or arrival schedule."""
    start: float
    end: float
    rate: float


class StepFunction:
    """Piecewise-constant nonnegative rate; zero outside its segments."""

    def __init__(self, segments: Sequence[Tuple[float, float, float]]):
        segs = [Segment(s, e, r) for (s, e, r) in segments if e > s + _TTOL]
        segs.sort(key=lambda s: s.start)
        for a, b in zip(segs, segs[1:]):
            if b.start < a.end - 1e-9:
                raise ValueError("overlapping rate segments")
        self.segments: List[Segment] = segs

    def __iter__(self):
        return iter(self.segments)

    @property
    def total(self) -> float:
        return sum((s.end - s.start) * s.rate for s in self.segments)

    def rate_at(self, t: float) -> float:
        for s in self.segments:
            if s.start - _TTOL <= t < s.end - _TTOL:
                return s.rate
        return 0.0

    def breakpoints(self) -> List[float]:
        pts = []
        for s in self.segments:
            pts.extend((s.start, s.end))
        return sorted(set(pts))

    def cumulative(self) -> "PiecewiseCurve":
        if not self.segments:
            return PiecewiseCurve([0.0], [0.0])
        ts = [self.segments[0].start]
        vs = [0.0]
        for s in self.segments:
            if s.start > ts[-1] + _TTOL:
                ts.append(s.start)
                vs.append(vs[-1])
            ts.append(s.end)
            vs.append(vs[-1] + (s.end - s.start) * s.rate)
        return PiecewiseCurve(ts, vs)


class PiecewiseCurve:
    """Continuous piecewise-linear function given by breakpoints."""

    def __init__(self, times: Sequence[float], values: Sequence[float]):
        if len(times) != len(values) or not times:
            raise ValueError("times and values must be equal-length and nonempty")
        ts: List[float] = [float(times[0])]
        vs: List[float] = [float(values[0])]
        for t, v in zip(times[1:], values[1:]):
            if t < ts[-1] - _TTOL:
                raise ValueError("breakpoint times must be nondecreasing")
            if t <= ts[-1] + _TTOL:
                vs[-1] = float(v)
                continue
            ts.append(float(t))
            vs.append(float(v))
        self.times = ts
        self.values = vs

    @property
    def start(self) -> float:
        return self.times[0]

    @property
    def end(self) -> float:
        return self.times[-1]

    @property
    def final(self) -> float:
        return self.values[-1]

    def __call__(self, t: float) -> float:
        if t <= self.times[0]:
            return self.values[0]
        if t >= self.times[-1]:
            return self.values[-1]
        i = bisect.bisect_right(self.times, t) - 1
        t0, t1 = self.times[i], self.times[i + 1]
        v0, v1 = self.values[i], self.values[i + 1]
        return v0 + (v1 - v0) * (t - t0) / (t1 - t0)

    def first_time_at(self, y: float) -> float:
        """Earliest time the (nondecreasing) curve reaches level y."""
        if y <= self.values[0]:
            return self.times[0]
        if y > self.values[-1]:
            raise ValueError(f"level {y} above the curve's final value {self.values[-1]}")
        i = bisect.bisect_left(self.values, y)
        if self.values[i] == y:
            # step back over any flat stretch at this level
            while i > 0 and self.values[i - 1] >= y - 1e-12:
                i -= 1
            if self.values[i] >= y - 1e-12:
                return self.times[i]
            i += 1
        t0, t1 = self.times[i - 1], self.times[i]
        v0, v1 = self.values[i - 1], self.values[i]
        return t0 + (t1 - t0) * (y - v0) / (v1 - v0)

    def minus(self, other: "PiecewiseCurve") -> "PiecewiseCurve":
        ts = sorted(set(self.times) | set(other.times))
        return PiecewiseCurve(ts, [self(t) - other(t) for t in ts])

    def integral(self) -> float:
        """Integral over the breakpoint span (exact for piecewise-linear)."""
        total = 0.0
        for i in range(len(self.times) - 1):
            total += 0.5 * (self.values[i] + self.values[i + 1]) * (self.times[i + 1] - self.times[i])
        return total

    def max_value(self) -> float:
        return max(self.values)

    def min_value(self) -> float:
        return min(self.values)


# ---------------------------------------------------------------------------
# highway stage

def serve_fifo(arrivals: PiecewiseCurve, capacity: float) -> PiecewiseCurve:
    """Cumulative departures from a point queue with fixed capacity."""
    ts = [arrivals.start]
    ds = [arrivals(arrivals.start)]
    bps = list(arrivals.times)
    i = 0
    t, d = ts[0], ds[0]
    while True:
        # inflow rate on (t, next breakpoint)
        nxt = None
        for j in range(i, len(bps)):
            if bps[j] > t + _TTOL:
                nxt = bps[j]
                i = j
                break
        if nxt is None:
            # arrivals finished; drain remaining queue
            q = arrivals.final - d
            if q > 1e-12:
                t_end = t + q / capacity
                ts.append(t_end)
                ds.append(arrivals.final)
            break
        a = (arrivals(nxt) - arrivals(t)) / (nxt - t)
        q = arrivals(t) - d
        if q <= 1e-9 and a <= capacity + 1e-9:
            t, d = nxt, arrivals(nxt)
        else:
            # serving at capacity; может empty before nxt
            if a < capacity:
                t_zero = t + q / (capacity - a)
                if t_zero < nxt - _TTOL:
                    d += capacity * (t_zero - t)
                    t = t_zero
                    ts.append(t)
                    ds.append(d)
                    continue
            d += capacity * (nxt - t)
            t = nxt
        ts.append(t)
        ds.append(d)
    return PiecewiseCurve(ts, ds)


def split_fifo(total_arrivals: PiecewiseCurve, mode_arrivals: PiecewiseCurve,
               total_departures: PiecewiseCurve) -> PiecewiseCurve:
    """One mode's share of FIFO departures: D_m(t) = A_m(A^-1(D(t)))."""
    cohort_levels = [total_arrivals(t) for t in total_arrivals.times]
    ts = set(total_departures.times)
    for level in cohort_levels:
        if level <= total_departures.final + 1e-9:
            ts.add(total_departures.first_time_at(min(level, total_departures.final)))
    ts = sorted(ts)
    vals = []
    for t in ts:
        served = total_departures(t)
        tau = total_arrivals.first_time_at(min(served, total_arrivals.final))
        vals.append(mode_arrivals(tau))
    return PiecewiseCurve(ts, vals)


# ---------------------------------------------------------------------------
# coupled curbside stage

@dataclass
class _Tagged:
    """Arrival sub-segment with the service rate tagged at arrival time."""
    start: float
    end: float
    rate: float
    cum0: float
    tag: float

    @property
    def cum_end(self) -> float:
        return self.cum0 + self.rate * (self.end - self.start)


@dataclass
class _CurbState:
    arrivals: PiecewiseCurve
    cap: float
    served: float = 0.0
    segs: List[_Tagged] = field(default_factory=list)
    head: int = 0
    out_t: List[float] = field(default_factory=list)
    out_v: List[float] = field(default_factory=list)

    def queue(self, t: float) -> float:
        return self.arrivals(t) - self.served

    def head_tag(self) -> float:
        while (self.head < len(self.segs) - 1
               and self.served >= self.segs[self.head].cum_end
               - 1e-9 * max(1.0, self.segs[self.head].cum_end)):
            self.head += 1
        return self.segs[self.head].tag if self.segs else self.cap

    def head_cum_end(self) -> float:
        return self.segs[self.head].cum_end if self.head < len(self.segs) else float("inf")


def _discount(rate_self: float, rate_other: float, delta_other: float, cap: float,
              engaged: bool) -> float:
    if engaged and rate_self > 1e-12 and rate_other > 1e-12 and delta_other > 0.0:
        return rate_self / (rate_self + delta_other * rate_other) * cap
    return cap


def serve_coupled_curbs(arr_rv: PiecewiseCurve, arr_pv: PiecewiseCurve,
                        p: ModelParams, delta_pv: float) -> Tuple[PiecewiseCurve, PiecewiseCurve]:
    """Exact discharge curves for the two curbside bottlenecks.

    delta_pv is passed explicitly so the unidirectional variant can force it
    to zero without touching the params object.
    """
    bps = sorted(set(arr_rv.times) | set(arr_pv.times))
    t = bps[0]
    R = _CurbState(arr_rv, p.s_curb_rv)
    P = _CurbState(arr_pv, p.s_curb_pv)
    for st in (R, P):
        st.out_t.append(t)
        st.out_v.append(0.0)
    qtol = 1e-7 * max(1.0, p.demand)
    for _guard in range(200000):
        a_r = _rate_after(arr_rv, t)
        a_p = _rate_after(arr_pv, t)
        q_r = R.queue(t)
        q_p = P.queue(t)
        done_arrivals = t >= bps[-1] - _TTOL
        if done_arrivals and q_r <= qtol and q_p <= qtol:
            break
        # Gates: the discount of one curb engages when the other mode's queue
        # is positive, or becomes positive within this very interval.  The
        # mutual dependence settles in at most two passes (gates only switch
        # on).
        gate_r_src = q_r > qtol   # RV queue present -> discount PV service
        gate_p_src = q_p > qtol
        tag_r = tag_p = d_r = d_p = 0.0
        for _ in range(3):
            tag_r = _discount(a_r, a_p, delta_pv, R.cap, gate_p_src)
            tag_p = _discount(a_p, a_r, p.delta_rv, P.cap, gate_r_src)
            d_r = R.head_tag() if q_r > qtol else min(a_r, tag_r)
            d_p = P.head_tag() if q_p > qtol else min(a_p, tag_p)
            new_r = gate_r_src or a_r > d_r * (1 + 1e-9) + 1e-9
            new_p = gate_p_src or a_p > d_p * (1 + 1e-9) + 1e-9
            if (new_r, new_p) == (gate_r_src, gate_p_src):
                break
            gate_r_src, gate_p_src = new_r, new_p
        # next event
        cands = []
        j = bisect.bisect_right(bps, t + _TTOL)
        if j < len(bps):
            cands.append(bps[j])
        for st, q, a, d in ((R, q_r, a_r, d_r), (P, q_p, a_p, d_p)):
            if q > qtol:
                if d > a + 1e-9 * st.cap:
                    cands.append(t + q / (d - a))           # queue empties
                ce = st.head_cum_end()
                if d > 1e-12 and ce != float("inf"):         # head cohort boundary passes
                    cands.append(t + max(ce - st.served, 0.0) / d)
        t_next = min(c for c in cands if c > t + _TTOL)
        # record tagged arrival sub-segments over (t, t_next)
        for st, a, tag in ((R, a_r, tag_r), (P, a_p, tag_p)):
            if a > 1e-12:
                last = st.segs[-1] if st.segs else None
                if (last is not None and last.end >= t - _TTOL
                        and abs(last.rate - a) < 1e-9 and abs(last.tag - tag) < 1e-9):
                    st.segs[-1] = _Tagged(last.start, t_next, a, last.cum0, tag)
                else:
                    st.segs.append(_Tagged(t, t_next, a, st.arrivals(t), tag))
        for st, d in ((R, d_r), (P, d_p)):
            st.served = min(st.served + d * (t_next - t), st.arrivals(t_next))
            st.out_t.append(t_next)
            st.out_v.append(st.served)
        t = t_next
    else:
        raise RuntimeError("curbside propagation failed to terminate")
    for st in (R, P):
        # serve the sub-tolerance remainder so the curves conserve exactly
        short = st.arrivals.final - st.served
        if short > 0.0:
            st.out_t.append(t + short / st.cap)
            st.out_v.append(st.arrivals.final)
    return (PiecewiseCurve(R.out_t, R.out_v), PiecewiseCurve(P.out_t, P.out_v))


def _rate_after(curve: PiecewiseCurve, t: float) -> float:
    """Right-hand slope of a piecewise-linear curve at time t."""
    if t >= curve.end - _TTOL:
        return 0.0
    i = bisect.bisect_right(curve.times, t + _TTOL) - 1
    i = max(0, min(i, len(curve.times) - 2))
    dt = curve.times[i + 1] - curve.times[i]
    return (curve.values[i + 1] - curve.values[i]) / dt if dt > 0 else 0.0


def _fifo_exit(arrivals: PiecewiseCurve, departures: PiecewiseCurve, t: float) -> float:
    """Exit time of a vehicle entering at t; instant when the queue is idle."""
    backlog = arrivals(t) - departures(t)
    if backlog <= 1e-9:
        return t
    return max(t, departures.first_time_at(min(arrivals(t), departures.final)))


# ---------------------------------------------------------------------------
# full corridor

@dataclass(frozen=True)
class CurveSet:
    """Cumulative and queue curves for the whole corridor."""
    a_h: PiecewiseCurve
    d_h: PiecewiseCurve
    a_curb_rv: PiecewiseCurve
    d_curb_rv: PiecewiseCurve
    a_curb_pv: PiecewiseCurve
    d_curb_pv: PiecewiseCurve

    @property
    def queue_highway(self) -> PiecewiseCurve:
        return self.a_h.minus(self.d_h)

    @property
    def queue_curb_rv(self) -> PiecewiseCurve:
        return self.a_curb_rv.minus(self.d_curb_rv)

    @property
    def queue_curb_pv(self) -> PiecewiseCurve:
        return self.a_curb_pv.minus(self.d_curb_pv)

    def highway_exit_time(self, t_dep: float) -> float:
        return _fifo_exit(self.a_h, self.d_h, t_dep)

    def cbd_arrival_time(self, mode: str, t_dep: float) -> float:
        t_curb = self.highway_exit_time(t_dep)
        a, d = ((self.a_curb_rv, self.d_curb_rv) if mode == "rv"
                else (self.a_curb_pv, self.d_curb_pv))
        return _fifo_exit(a, d, t_curb)

    def queue_window(self, which: str, threshold: float = 0.5) -> Optional[Tuple[float, float]]:
        """First/last time the chosen queue exceeds the threshold (vehicles)."""
        q = {"highway": self.queue_highway, "curb_rv": self.queue_curb_rv,
             "curb_pv": self.queue_curb_pv}[which]
        lo = hi = None
        for i in range(len(q.times) - 1):
            for t0, t1, v0, v1 in [(q.times[i], q.times[i + 1], q.values[i], q.values[i + 1])]:
                if max(v0, v1) <= threshold:
                    continue
                enter = t0 if v0 > threshold else t0 + (t1 - t0) * (threshold - v0) / (v1 - v0)
                leave = t1 if v1 > threshold else t0 + (t1 - t0) * (threshold - v0) / (v1 - v0)
                lo = enter if lo is None else lo
                hi = leave
        return None if lo is None else (lo, hi)


def propagate(dep_rv: StepFunction, dep_pv: StepFunction, p: ModelParams,
              bidirectional: bool = True) -> CurveSet:
    """Exact corridor response to a pair of home-departure schedules."""
    a_rv = dep_rv.cumulative()
    a_pv = dep_pv.cumulative()
    start = min(a_rv.start, a_pv.start)
    ts = sorted(set(a_rv.times) | set(a_pv.times) | {start})
    a_h = PiecewiseCurve(ts, [a_rv(t) + a_pv(t) for t in ts])
    d_h = serve_fifo(a_h, p.s_highway)
    a_curb_rv = split_fifo(a_h, a_rv, d_h)
    a_curb_pv = split_fifo(a_h, a_pv, d_h)
    delta_pv = p.delta_pv if bidirectional else 0.0
    d_curb_rv, d_curb_pv = serve_coupled_curbs(a_curb_rv, a_curb_pv, p, delta_pv)
    return CurveSet(a_h, d_h, a_curb_rv, d_curb_rv, a_curb_pv, d_curb_pv)


def generalized_cost(cs: CurveSet, p: ModelParams, mode: str, t_dep: float,
                     late: bool = False) -> float:
    """Travel-time + schedule-delay + fixed cost for one departure time."""
    t_cbd = cs.cbd_arrival_time(mode, t_dep)
    wait = t_cbd - t_dep
    if late:
        if p.gamma is None:
            raise ValueError("late cost evaluation requires gamma")
        sched = p.beta * max(-t_cbd, 0.0) + p.gamma * max(t_cbd, 0.0)
    else:
        sched = p.beta * (-t_cbd)
    if mode == "rv":
        return (p.alpha + p.pi) * wait + sched + p.c_rv
    return p.alpha * wait + sched + p.pv_fixed_cost
