"""Parameter containers, validation, and unit conventions.

Internal time base is hours as floats, with the preferred arrival time at
t = 0 (negative times are before it).  All rates are per hour; money units
are whatever the config uses (HKD in the bundled case study).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace
from typing import Mapping, Optional

MINUTES_PER_HOUR = 60.0


class ValidationError(ValueError):
    """A model assumption was violated; the message names the assumption."""


def per_minute_to_per_hour(rate: float) -> float:
    return rate * MINUTES_PER_HOUR


def per_hour_to_per_minute(rate: float) -> float:
    return rate / MINUTES_PER_HOUR


def fixed_cost_rv(lambda_dist: float, trip_length: float, rv_flag_fee: float) -> float:
    """Fixed ride-hailing charge: distance fare plus flag fee."""
    if lambda_dist < 0 or trip_length < 0 or rv_flag_fee < 0:
        raise ValidationError("fixed_cost_rv requires nonnegative inputs")
    return lambda_dist * trip_length + rv_flag_fee


def parse_clock(value) -> float:
    """Clock time -> hours since midnight.  Accepts 'H:MM[:SS]' or a number."""
    if isinstance(value, (int, float)):
        return float(value)
    parts = str(value).strip().split(":")
    if not 1 <= len(parts) <= 3:
        raise ValidationError(f"cannot parse clock time {value!r}")
    h = float(parts[0])
    m = float(parts[1]) if len(parts) > 1 else 0.0
    s = float(parts[2]) if len(parts) > 2 else 0.0
    return h + m / 60.0 + s / 3600.0


def format_clock(hours_rel: float, preferred_arrival: float) -> str:
    """Render a model time (hours relative to t*) as H:MM:SS on the clock."""
    total = (preferred_arrival + hours_rel) * 3600.0
    total = round(total)
    h, rem = divmod(int(total), 3600)
    m, s = divmod(rem, 60)
    return f"{h}:{m:02d}:{s:02d}"


@dataclass(frozen=True)
class ModelParams:
    """Validated corridor, cost, demand, and spillover parameters."""

    alpha: float            # value of travel time, money/h
    beta: float             # value of early-arrival time, money/h
    pi: float               # ride-hailing per-time fare rate, money/h
    lambda_dist: float      # ride-hailing per-distance fare rate, money/km
    trip_length: float      # corridor length, km
    rv_flag_fee: float      # fixed ride-hailing fee, money
    pv_fixed_cost: float    # daily fixed private-vehicle cost, money
    demand: float           # total commuters, veh
    s_highway: float        # highway bottleneck service rate, veh/h
    s_curb_rv: float        # curbside service rate for RVs, veh/h
    s_curb_pv: float        # main-road service rate for PVs, veh/h
    delta_rv: float         # spillover intensity of the RV queue on PVs
    delta_pv: float         # spillover intensity of the PV queue on RVs
    preferred_arrival: float = 9.0   # clock hours
    gamma: Optional[float] = None    # value of late-arrival time, money/h
    base_fee: float = 0.0            # pricing initial fee f0
    c_rv: float = 0.0                # fixed RV cost; derived unless overridden

    @property
    def cost_gap(self) -> float:
        """Fixed-cost difference between driving and ride-hailing (u^P - c^R)."""
        return self.pv_fixed_cost - self.c_rv

    def with_late_arrival(self, gamma: float) -> "ModelParams":
        return replace(self, gamma=gamma)

    def without_pv_spillover(self) -> "ModelParams":
        """Copy with delta_pv = 0 (unidirectional spillover)."""
        return replace(self, delta_pv=0.0)


_REQUIRED = (
    "alpha", "beta", "pi", "lambda_dist", "trip_length", "rv_flag_fee",
    "pv_fixed_cost", "demand", "s_highway", "s_curb_rv", "s_curb_pv",
    "delta_rv", "delta_pv",
)
_OPTIONAL = ("preferred_arrival", "gamma", "base_fee", "c_rv_override", "pi_per_minute")


def build_parameters(raw: Mapping[str, object], require_gamma: bool = False) -> ModelParams:
    """Validate raw config values and return ModelParams.

    ``pi`` may be given per hour, or per minute via ``pi_per_minute``
    (normalised at ingestion).  ``c_rv_override`` replaces the derived
    fixed RV cost lambda*L + flag fee.  Unknown keys are rejected.
    """
    unknown = set(raw) - set(_REQUIRED) - set(_OPTIONAL)
    if unknown:
        raise ValidationError(f"unknown config keys: {sorted(unknown)}")
    missing = [k for k in _REQUIRED if k not in raw and not (k == "pi" and "pi_per_minute" in raw)]
    if missing:
        raise ValidationError(f"missing config keys: {missing}")
    if "pi" in raw and "pi_per_minute" in raw:
        raise ValidationError("give either pi or pi_per_minute, not both")

    def num(key, default=None):
        v = raw.get(key, default)
        return None if v is None else float(v)

    pi = num("pi") if "pi" in raw else per_minute_to_per_hour(num("pi_per_minute"))
    alpha, beta = num("alpha"), num("beta")
    gamma = num("gamma")
    if require_gamma and gamma is None:
        raise ValidationError("late-arrival mode requires gamma")
    s_h, s_cr, s_cp = num("s_highway"), num("s_curb_rv"), num("s_curb_pv")
    d_r, d_p = num("delta_rv"), num("delta_pv")
    demand = num("demand")
    lam, length, flag = num("lambda_dist"), num("trip_length"), num("rv_flag_fee")
    u_p = num("pv_fixed_cost")
    c_r = num("c_rv_override") if "c_rv_override" in raw else fixed_cost_rv(lam, length, flag)

    if not 0.0 < beta < alpha:
        raise ValidationError("requires 0 < beta < alpha (value of early arrival below value of time)")
    if pi < 0:
        raise ValidationError("requires pi >= 0")
    if demand < 0:
        raise ValidationError("requires demand >= 0")
    if s_h <= 0 or s_cr <= 0 or s_cp <= 0:
        raise ValidationError("requires positive service rates")
    if not s_cr < s_h:
        raise ValidationError("requires s_curb_rv < s_highway (curb space below highway capacity)")
    if not s_cp < s_h:
        raise ValidationError("requires s_curb_pv < s_highway (main road below highway capacity)")
    if not u_p > c_r:
        raise ValidationError("requires pv_fixed_cost > fixed RV cost (u^P > c^R)")
    if not 0.0 <= d_r < 1.0:
        raise ValidationError("requires delta_rv in [0, 1)")
    if d_r == 0.0:
        warnings.warn("delta_rv = 0 leaves the model's stated range (0, 1); accepted for testing")
    if not 0.0 <= d_p < 1.0:
        raise ValidationError("requires delta_pv in [0, 1); 0 means unidirectional spillover")
    if gamma is not None:
        if gamma <= 0:
            raise ValidationError("requires gamma > 0 when present")
        if gamma <= beta:
            warnings.warn("gamma <= beta: late arrival cheaper than early; allowed but unusual")

    clock = parse_clock(raw.get("preferred_arrival", 9.0))
    return ModelParams(
        alpha=alpha, beta=beta, pi=pi, lambda_dist=lam, trip_length=length,
        rv_flag_fee=flag, pv_fixed_cost=u_p, demand=demand,
        s_highway=s_h, s_curb_rv=s_cr, s_curb_pv=s_cp,
        delta_rv=d_r, delta_pv=d_p, preferred_arrival=clock,
        gamma=gamma, base_fee=num("base_fee", 0.0), c_rv=c_r,
    )


def load_config(path: str, require_gamma: bool = False) -> ModelParams:
    """Read a TOML config file (one key per parameter) into ModelParams."""
    try:
        import tomllib
    except ImportError:  # Python < 3.11
        import tomli as tomllib

    with open(path, "rb") as fh:
        raw = tomllib.load(fh)
    return build_parameters(raw, require_gamma=require_gamma)
