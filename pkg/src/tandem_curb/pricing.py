"""Optimal time-varying congestion pricing and the resulting social optimum.

Curbside fees for ride-hailing drop-offs plus parking fees for private
vehicles, rising at the early-arrival value before the preferred time (and
falling at the late-arrival value after it, when late arrival is allowed),
eliminate all queues.  The optimal initial-fee difference between modes is
zero; during co-departure arrivals the fee gap equals the fixed-cost gap.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

from .classify import UtilizationClass, classify_utilization
from .curves import StepFunction
from .params import ModelParams


class SingleModePricingError(ValueError):
    """Pricing for RV-only parameter ranges is out of scope."""


@dataclass(frozen=True)
class PricingScheme:
    """Piecewise-linear fees per mode plus the social-optimum pattern."""

    base_fee: float                  # f0, paid by each mode's first arrival
    delta_f: float                   # optimal initial-fee difference (zero)
    so_t0_rv: float                  # social-optimum first arrivals
    so_t0_pv: float
    so_n_rv: float
    so_cost: float                   # equal generalized cost incl. base fee
    late: bool
    s_co_rv: float                   # arrival rates during the co-arrival stage
    s_co_pv: float
    theta: Optional[float] = None    # PV share ratio when curb capacity exceeds highway
    so_t1_rv: float = 0.0            # last arrivals (preferred time unless late mode)
    so_t1_pv: float = 0.0
    beta_slope: float = 0.0          # fee slope before the preferred time
    gamma_slope: float = 0.0         # downward slope after it (late mode)
    s_rv_solo: float = 0.0           # RV arrival rate outside the co-arrival stage

    def fee_at(self, mode: str, t: float) -> float:
        """Fee charged on arrival at time t (flat at f0 outside the window)."""
        t0, t1 = (self.so_t0_rv, self.so_t1_rv) if mode == "rv" else (self.so_t0_pv, self.so_t1_pv)
        if t <= t0 or (self.late and t > t1):
            return self.base_fee
        if t <= 0.0:
            return self.base_fee + self.beta_slope * (t - t0)
        if not self.late:
            return self.base_fee + self.beta_slope * (0.0 - t0)
        return self.base_fee + self.gamma_slope * (t1 - t)

    def departure_profile(self) -> Tuple[StepFunction, StepFunction]:
        """Queue-free departure (= arrival) schedules at the optimum."""
        rv_segs = [(self.so_t0_rv, self.so_t0_pv, self.s_rv_solo),
                   (self.so_t0_pv, self.so_t1_pv, self.s_co_rv)]
        if self.late and self.so_t1_rv > self.so_t1_pv:
            rv_segs.append((self.so_t1_pv, self.so_t1_rv, self.s_rv_solo))
        pv_segs = [(self.so_t0_pv, self.so_t1_pv, self.s_co_pv)]
        return StepFunction(rv_segs), StepFunction(pv_segs)


def optimal_pricing(p: ModelParams) -> PricingScheme:
    """No-late-arrival optimal scheme; everyone arrives by the preferred time."""
    if p.demand == 0:
        return PricingScheme(base_fee=p.base_fee, delta_f=0.0, so_t0_rv=0.0,
                             so_t0_pv=0.0, so_n_rv=0.0, so_cost=p.c_rv + p.base_fee,
                             late=False, s_co_rv=p.s_curb_rv, s_co_pv=p.s_curb_pv,
                             beta_slope=p.beta, s_rv_solo=p.s_curb_rv)
    if classify_utilization(p) is UtilizationClass.RV_ONLY:
        raise SingleModePricingError("single-mode pricing out of scope")
    b, gap, n = p.beta, p.cost_gap, p.demand
    f0 = p.base_fee
    if p.s_curb_rv + p.s_curb_pv <= p.s_highway:
        t0r = -(n * b + gap * p.s_curb_pv) / (b * (p.s_curb_rv + p.s_curb_pv))
        t0p = -(n * b - gap * p.s_curb_rv) / (b * (p.s_curb_rv + p.s_curb_pv))
        n_rv = (n * b + gap * p.s_curb_pv) * p.s_curb_rv / (b * (p.s_curb_rv + p.s_curb_pv))
        cost = (n * b + p.pv_fixed_cost * p.s_curb_pv + p.c_rv * p.s_curb_rv) \
            / (p.s_curb_rv + p.s_curb_pv) + f0
        theta = None
        co_rv, co_pv = p.s_curb_rv, p.s_curb_pv
    else:
        t0r = -(n * b + gap * (p.s_highway - p.s_curb_rv)) / (b * p.s_highway)
        t0p = -(n * b - gap * p.s_curb_rv) / (b * p.s_highway)
        n_rv = (b * n + gap * (p.s_highway - p.s_curb_rv)) * p.s_curb_rv / (b * p.s_highway)
        cost = (n * b + p.pv_fixed_cost * p.s_highway - gap * p.s_curb_rv) / p.s_highway + f0
        theta = (p.s_highway - p.s_curb_rv) / p.s_curb_pv   # share ratio at delta_f = 0
        co_rv, co_pv = p.s_curb_rv, p.s_highway - p.s_curb_rv
    return PricingScheme(base_fee=f0, delta_f=0.0, so_t0_rv=t0r, so_t0_pv=t0p,
                         so_n_rv=n_rv, so_cost=cost, late=False, theta=theta,
                         s_co_rv=co_rv, s_co_pv=co_pv,
                         beta_slope=b, s_rv_solo=p.s_curb_rv)


def optimal_pricing_late(p: ModelParams) -> PricingScheme:
    """Late-arrival optimal scheme: tent-shaped fees peaking at the preferred time."""
    if p.gamma is None:
        raise ValueError("optimal_pricing_late requires gamma")
    if classify_utilization(p) is UtilizationClass.RV_ONLY:
        raise SingleModePricingError("single-mode pricing out of scope")
    b, g, gap, n = p.beta, p.gamma, p.cost_gap, p.demand
    if p.s_curb_rv + p.s_curb_pv > p.s_highway:
        span = n / p.s_highway + gap * (b + g) * (p.s_highway - p.s_curb_rv) / (b * g * p.s_highway)
        co_rv, co_pv = p.s_curb_rv, p.s_highway - p.s_curb_rv
        theta = (p.s_highway - p.s_curb_rv) / p.s_curb_pv
    else:
        span = (n + gap * (b + g) * p.s_curb_pv / (b * g)) / (p.s_curb_rv + p.s_curb_pv)
        co_rv, co_pv = p.s_curb_rv, p.s_curb_pv
        theta = None
    t0r = -g * span / (b + g)
    t1r = b * span / (b + g)
    t0p = t0r + gap / b
    t1p = t1r - gap / g
    n_rv = n - co_pv * (t1p - t0p)
    cost = b * (-t0r) + p.c_rv + p.base_fee
    return PricingScheme(base_fee=p.base_fee, delta_f=0.0, so_t0_rv=t0r, so_t0_pv=t0p,
                         so_n_rv=n_rv, so_cost=cost, late=True, theta=theta,
                         s_co_rv=co_rv, s_co_pv=co_pv, so_t1_rv=t1r, so_t1_pv=t1p,
                         beta_slope=b, gamma_slope=g, s_rv_solo=p.s_curb_rv)


def fee_at(scheme: PricingScheme, mode: str, t: float) -> float:
    return scheme.fee_at(mode, t)


def social_optimum_cost(scheme: PricingScheme, p: ModelParams) -> float:
    """Total social cost at the optimum, excluding fee transfers."""
    dep_rv, dep_pv = scheme.departure_profile()
    total = 0.0
    for mode, steps in (("rv", dep_rv), ("pv", dep_pv)):
        fixed = p.c_rv if mode == "rv" else p.pv_fixed_cost
        for seg in steps:
            total += fixed * seg.rate * (seg.end - seg.start)
            total += seg.rate * _schedule_delay_integral(p, seg.start, seg.end, scheme.late)
    return total


def _schedule_delay_integral(p: ModelParams, t0: float, t1: float, late: bool) -> float:
    """Integral of the schedule-delay cost over an arrival window."""
    early_hi = min(t1, 0.0)
    total = 0.0
    if t0 < 0.0:
        total += p.beta * 0.5 * (t0 ** 2 - early_hi ** 2)
    if late and t1 > 0.0:
        lo = max(t0, 0.0)
        total += p.gamma * 0.5 * (t1 ** 2 - lo ** 2)
    return total


def social_cost_at_delta_f(p: ModelParams, delta_f: float) -> float:
    """Social cost of the queue-free pattern for a given initial-fee gap.

    Defined for the regime where the curbs jointly exceed the highway, with
    the share ratio tied to delta_f; nondecreasing in delta_f on its
    admissible range, so zero is optimal.
    """
    if p.s_curb_rv + p.s_curb_pv <= p.s_highway:
        raise ValueError("delta_f analysis applies when curb capacity exceeds the highway")
    b, gap, n = p.beta, p.cost_gap, p.demand
    theta = (p.s_highway - p.s_curb_rv) * (delta_f / gap + 1.0) / p.s_curb_pv
    shift = (gap + delta_f) / b
    t_first_pv = -(n - p.s_curb_rv * shift) / p.s_highway
    t_first_rv = t_first_pv - shift
    rate_pv = theta * p.s_curb_pv
    rate_rv_co = p.s_highway - rate_pv
    n_pv = rate_pv * (-t_first_pv)
    n_rv = n - n_pv
    sc = (p.c_rv * n_rv + p.pv_fixed_cost * n_pv
          + p.s_curb_rv * _schedule_delay_integral(p, t_first_rv, t_first_pv, False)
          + rate_rv_co * _schedule_delay_integral(p, t_first_pv, 0.0, False)
          + rate_pv * _schedule_delay_integral(p, t_first_pv, 0.0, False))
    return sc


def delta_f_upper_bound(p: ModelParams) -> float:
    """Admissible initial-fee gap span in the high-curb-capacity regime."""
    return p.cost_gap * (p.s_curb_rv + p.s_curb_pv - p.s_highway) / (p.s_highway - p.s_curb_rv)
