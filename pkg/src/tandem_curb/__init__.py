"""Bi-modal two-tandem bottleneck toolkit.

Closed-form morning-commute equilibria for a ride-hailing / private-vehicle
corridor with a highway bottleneck feeding two coupled curbside bottlenecks,
plus optimal time-varying pricing, an independent point-queue simulation
oracle, and sweep/case-study runners.
"""

from .classify import (PhaseRegime, Scenario, Spillover, UtilizationClass,
                       classify, classify_utilization, initial_phase_regime)
from .curves import CurveSet, PiecewiseCurve, StepFunction, generalized_cost, propagate
from .late import LateSolution, OrderingCase, OutsideL7Regime, classify_ordering, solve_l7
from .metrics import (MetricsReport, SpilloverComparison, Tolerances,
                      VerificationReport, compare_uni_bi, metrics,
                      metrics_from_simulation, verify_equilibrium)
from .params import (ModelParams, ValidationError, build_parameters,
                     fixed_cost_rv, format_clock, load_config)
from .pricing import (PricingScheme, SingleModePricingError, delta_f_upper_bound,
                      fee_at, optimal_pricing, optimal_pricing_late,
                      social_cost_at_delta_f, social_optimum_cost)
from .simulate import DepartureProfile, SimulationResult, experienced_cost, simulate
from .solver import (EquilibriumSolution, InconsistentOrdering, ScenarioMismatch,
                     build_curves, co_stage_rates, initial_phase_rates, solve,
                     solve_overlapping, solve_separated, solve_single_mode)

__version__ = "1.0.0"

__all__ = [name for name in dir() if not name.startswith("_")]
