"""Scenario classification from parameters alone.

The eight no-toll equilibrium scenarios are distinguished by (i) whether the
highway bottleneck queues from the start of the peak or only after private
vehicles enter, (ii) whether both modes are used, and (iii) whether the two
modes' home-departure intervals overlap.
"""

from __future__ import annotations

import enum

from .params import ModelParams

# relative tolerance for boundary comparisons; boundaries go to the
# non-strict side of each printed inequality
EPS = 1e-9


class Spillover(enum.Enum):
    UNIDIRECTIONAL = "uni"   # PV queue has no effect on RVs (delta_pv treated as 0)
    BIDIRECTIONAL = "bi"

    @classmethod
    def parse(cls, text: str) -> "Spillover":
        return {"uni": cls.UNIDIRECTIONAL, "bi": cls.BIDIRECTIONAL}[str(text)]


class PhaseRegime(enum.Enum):
    CURB_ONLY = "curb-only"
    CURB_AND_HIGHWAY = "curb-and-highway"


class UtilizationClass(enum.Enum):
    RV_ONLY = "rv-only"
    BOTH_SEPARATED = "both-separated"
    BOTH_OVERLAPPING = "both-overlapping"


class Scenario(enum.Enum):
    S1 = "S1"
    S2 = "S2"
    S3 = "S3"
    S4 = "S4"
    S5 = "S5"
    S6 = "S6"
    S7 = "S7"
    S8 = "S8"
    L7 = "L7"

    @property
    def single_mode(self) -> bool:
        return self in (Scenario.S1, Scenario.S6)

    @property
    def separated(self) -> bool:
        return self in (Scenario.S2, Scenario.S4, Scenario.S7)

    @property
    def overlapping(self) -> bool:
        return self in (Scenario.S3, Scenario.S5, Scenario.S8)


def _leq(x: float, y: float) -> bool:
    """x <= y with relative slack so exact boundaries land on the <= side."""
    return x <= y + EPS * max(1.0, abs(x), abs(y))


def _geq(x: float, y: float) -> bool:
    return y <= x + EPS * max(1.0, abs(x), abs(y))


def initial_phase_regime(p: ModelParams) -> PhaseRegime:
    """Where queues form at the start of the peak (Proposition-1 ratio test)."""
    if _leq(p.s_curb_rv / p.s_highway, (p.alpha + p.pi - p.beta) / (p.alpha + p.pi)):
        return PhaseRegime.CURB_ONLY
    return PhaseRegime.CURB_AND_HIGHWAY


def rv_only_threshold(p: ModelParams) -> float:
    """Cost gap at or above which only ride-hailing is used."""
    return p.beta * p.demand / p.s_curb_rv


def separation_threshold(p: ModelParams) -> float:
    """Cost gap at or above which the two modes' departure intervals separate."""
    a, b, pi = p.alpha, p.beta, p.pi
    if initial_phase_regime(p) is PhaseRegime.CURB_ONLY:
        return p.demand * b * (a + pi - b) / (b * p.s_curb_pv + (a + pi) * p.s_curb_rv)
    num = p.demand * (a * (a + pi - b) * p.s_highway - (a + pi) * (a - b) * p.s_curb_rv)
    den = (a + pi) * (p.s_highway * (p.s_curb_rv + p.s_curb_pv) - p.s_curb_rv * p.s_curb_pv)
    return num / den


def co_departure_total_rate(p: ModelParams, spillover: Spillover) -> float:
    """Total home-departure rate while both modes depart together."""
    a, b, pi = p.alpha, p.beta, p.pi
    d_r = p.delta_rv
    d_p = p.delta_pv if spillover is Spillover.BIDIRECTIONAL else 0.0
    dd = 1.0 - d_r * d_p
    return ((a + pi) * (1 - d_r) * p.s_curb_rv / (a + pi - b)
            + a * (1 - d_p) * p.s_curb_pv / (a - b)) / dd


def classify_utilization(p: ModelParams) -> UtilizationClass:
    gap = p.cost_gap
    if _geq(gap, rv_only_threshold(p)):
        return UtilizationClass.RV_ONLY
    if _geq(gap, separation_threshold(p)):
        return UtilizationClass.BOTH_SEPARATED
    return UtilizationClass.BOTH_OVERLAPPING


def classify(p: ModelParams, spillover: Spillover = Spillover.BIDIRECTIONAL) -> Scenario:
    """Map parameters to the unique no-toll equilibrium scenario.

    The curb-only/both-queued split follows the Proposition-1 ratio; within
    it, the cost gap selects single-mode, separated, or overlapping use.  The
    S3/S5 boundary compares the highway capacity against the co-departure
    total rate, which under unidirectional spillover reduces to the printed
    capacity-ratio condition.  Remaining thresholds are reused unchanged for
    the bidirectional case (the conditions coincide at delta_pv = 0; the
    spillover terms do not enter them).
    """
    regime = initial_phase_regime(p)
    util = classify_utilization(p)
    if regime is PhaseRegime.CURB_ONLY:
        if util is UtilizationClass.RV_ONLY:
            return Scenario.S1
        if util is UtilizationClass.BOTH_SEPARATED:
            ratio = p.s_curb_pv / p.s_highway
            return Scenario.S2 if _leq(ratio, (p.alpha - p.beta) / p.alpha) else Scenario.S4
        # overlapping: no highway queue at all <=> capacity covers co-departure
        if _geq(p.s_highway, co_departure_total_rate(p, spillover)):
            return Scenario.S3
        return Scenario.S5
    if util is UtilizationClass.RV_ONLY:
        return Scenario.S6
    if util is UtilizationClass.BOTH_SEPARATED:
        return Scenario.S7
    return Scenario.S8
