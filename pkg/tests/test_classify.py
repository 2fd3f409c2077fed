import dataclasses

import pytest

from tandem_curb import (PhaseRegime, Scenario, Spillover, UtilizationClass,
                         classify, classify_utilization, initial_phase_regime)
from tandem_curb.classify import rv_only_threshold, separation_threshold

from conftest import SCENARIO_POINTS, make_params, scenario_params


def test_regime_hong_kong(hk_params):
    # 1800/5700 = 0.3158 <= 134/234 = 0.5726
    assert initial_phase_regime(hk_params) is PhaseRegime.CURB_ONLY


def test_regime_boundary_goes_to_curb_only():
    # exactly on the capacity-ratio boundary: assigned to the curb-only branch
    p = make_params(s_curb_rv=2500 * 10.5 / 14.4, s_curb_pv=900)
    assert initial_phase_regime(p) is PhaseRegime.CURB_ONLY


def test_regime_high_curb_capacity():
    p = make_params(s_curb_rv=2400, s_curb_pv=900)
    # 0.96 > 10.5/14.4 = 0.729
    assert initial_phase_regime(p) is PhaseRegime.CURB_AND_HIGHWAY


def test_utilization_hong_kong(hk_params_table3):
    p = hk_params_table3
    assert rv_only_threshold(p) == pytest.approx(100 * 7158 / 1800)
    assert separation_threshold(p) == pytest.approx(151.96, rel=1e-3)
    assert classify_utilization(p) is UtilizationClass.BOTH_OVERLAPPING


def test_utilization_boundary_is_rv_only():
    p = make_params(gap=3.9 * 3000 / 1500)  # exactly beta N / s_curb_rv
    assert classify_utilization(p) is UtilizationClass.RV_ONLY


def test_utilization_separated_band():
    # moderate cost gaps separate the intervals in both queueing regimes
    assert classify_utilization(scenario_params("S4")) is UtilizationClass.BOTH_SEPARATED
    assert classify_utilization(scenario_params("S7")) is UtilizationClass.BOTH_SEPARATED


def test_classify_hong_kong_is_s5(hk_params):
    assert classify(hk_params, Spillover.BIDIRECTIONAL) is Scenario.S5


def test_classify_rv_only_curb_regime_is_s1():
    p = scenario_params("S1")
    assert classify(p) is Scenario.S1


@pytest.mark.parametrize("name", sorted(SCENARIO_POINTS))
def test_representative_points_classify(name):
    assert classify(scenario_params(name)) is Scenario[name]


def test_partition_never_unclassified():
    base = make_params(gap=2.0)
    step = 2480.0 / 199
    for i in range(200):
        for j in range(200):
            p = dataclasses.replace(base, s_curb_rv=10.0 + i * step,
                                    s_curb_pv=10.0 + j * step)
            assert classify(p) in Scenario


def test_bidirectional_reduces_to_unidirectional_at_zero_delta_pv():
    for name in SCENARIO_POINTS:
        p = dataclasses.replace(scenario_params(name), delta_pv=0.0)
        assert classify(p, Spillover.BIDIRECTIONAL) is classify(p, Spillover.UNIDIRECTIONAL)


def test_case1_ray_monotone_s3_s5_s8():
    """Increasing curb capacity for RVs walks S3 -> S5 -> S8 (low cost gap)."""
    order = {"S3": 0, "S5": 1, "S8": 2}
    for s_cp in (200.0, 700.0, 1300.0):
        seen = []
        for s_cr in range(100, 2500, 50):
            p = make_params(s_curb_rv=float(s_cr), s_curb_pv=s_cp, gap=2.0)
            seen.append(classify(p).value)
        assert all(s in order for s in seen)
        ranks = [order[s] for s in seen]
        assert ranks == sorted(ranks)
        assert ranks[-1] == 2  # reaches S8 at high RV curb capacity
