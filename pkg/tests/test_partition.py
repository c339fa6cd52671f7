import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import toy_pair
from coedge import fixtures
from coedge.cost import total_costs
from coedge.errors import PlanInvalid, RepairFailed
from coedge.model import ModelDescriptor, conv, fc
from coedge.partition import (
    PLANNERS,
    build_p2,
    fallback_full_offload,
    layer1_threshold,
    plan_coedge,
    plan_document,
    plan_from_rows,
    plan_local,
    plan_modnn,
    plan_musical_chair,
    plan_violations,
    relaxed_optimum,
    round_plan,
    run_planner,
    select_aggregator,
    solve_p2,
    validate_plan,
)
from coedge.resources import BandwidthMatrix, Cluster, DeviceProfile
from coedge.scenario import Scenario

PI = DeviceProfile("pi", 615e3, 1.2e9, 204800, 3.0, 0.1)
PC = DeviceProfile("pc", 282e3, 3.6e9, 8388608, 12.0, 0.5)


def single(scenario, k):
    return scenario.with_cluster(scenario.cluster.prefix(k))


# -- threshold and rounding ---------------------------------------------------


def test_threshold_scales_halo_through_strides():
    m = ModelDescriptor("m", (64, 8, 1), (conv(3, 1, 1, 2, 1), conv(3, 1, 1, 2, 1), conv(5, 1, 1, 1, 2), fc(1, 2)))
    # halos 1, 1, 2 behind strides 1, 2, 4
    assert layer1_threshold(m) == 8


def test_bundled_thresholds():
    assert [layer1_threshold(fixtures.model(n)) for n in fixtures.MODELS] == [24, 16, 8, 8]


@pytest.mark.parametrize("lam, h, th, rows", [
    ([0.5, 0.5], 10, 0, [5, 5]),
    ([1 / 3, 2 / 3], 10, 0, [3, 7]),
    ([0.04, 0.96], 100, 5, [5, 95]),
])
def test_round_plan_examples(lam, h, th, rows):
    assert round_plan(lam, h, th).tolist() == rows


def test_round_plan_repair_failure():
    with pytest.raises(RepairFailed):
        round_plan([0.5, 0.5], 10, 6)


def test_round_plan_rejects_bad_fractions():
    with pytest.raises(ValueError):
        round_plan([0.7, 0.7], 10)


@settings(max_examples=300)
@given(st.lists(st.floats(0, 1), min_size=1, max_size=8).filter(lambda v: sum(v) > 1e-3), st.integers(1, 500))
def test_round_plan_preserves_height(w, h):
    lam = np.array(w) / sum(w)
    a = round_plan(lam, h)
    assert a.sum() == h
    assert np.all(a >= 0)
    assert np.all(np.abs(a - lam * h) < 1 + 1e-9)


# -- relaxation ----------------------------------------------------------------


def test_p2_row_counts(alexnet6):
    prob = build_p2(alexnet6)
    n, L = alexnet6.n, alexnet6.model.n_layers
    assert prob.A_ub.shape == (2 * n * L + 1 + n, n + L)
    assert prob.A_eq.shape == (1, n + L)
    kinds = prob.labels["kinds"]
    assert kinds.count("epigraph") == kinds.count("memory") == n * L
    assert kinds.count("deadline") == 1 and kinds.count("sign") == n


def test_p2_single_device_forces_full_share():
    sc = single(fixtures.scenario("alexnet"), 1).with_deadline(1.0)
    sol = solve_p2(sc)
    assert sol.ok and sol.lam.tolist() == [1.0]
    assert sol.objective == pytest.approx(total_costs(sc, [sc.height]).energy, rel=1e-9)
    assert not solve_p2(sc.with_deadline(0.2)).ok


def test_p2_shifts_work_to_jetson_as_deadline_tightens(case_study):
    # with the bundled powers offloading is cheaper as well as faster, so the
    # Jetson already takes everything; a power-hungry Jetson shows the trade-off
    pi, jet = case_study.cluster.devices
    hungry = Cluster((pi, DeviceProfile(jet.name, jet.rho, jet.f, jet.m, 40.0, jet.p_x)), case_study.cluster.bandwidth)
    for sc, strict in ((case_study, False), (case_study.with_cluster(hungry), True)):
        shares = [solve_p2(sc.with_deadline(d)).lam[1] for d in (0.3, 0.25, 0.2, 0.15)]
        assert all(b >= a - 1e-9 for a, b in zip(shares, shares[1:]))
        assert (shares[-1] > shares[0]) if strict else shares == [1.0] * 4


def test_p2_lower_bounds_rounded_plan(alexnet6):
    for d in (0.1, 0.2, 0.5):
        sc = alexnet6.with_deadline(d)
        lp = relaxed_optimum(sc)
        plan = plan_coedge(sc)
        if lp.ok and not plan.is_fallback:
            assert lp.objective <= total_costs(sc, plan.rows, plan.aggregator).energy + 1e-12


def test_p2_non_increasing_in_deadline(alexnet6):
    vals = [relaxed_optimum(alexnet6.with_deadline(d)).objective for d in (0.1, 0.15, 0.2, 0.3, 0.5, 1.0)]
    assert all(b <= a + 1e-12 for a, b in zip(vals, vals[1:]))


# -- planners ----------------------------------------------------------------


def test_single_device_loose_deadline():
    m = ModelDescriptor("m", (16, 8, 1), (conv(3, 1, 2, 1, 1), fc(2, 4)))
    sc = Scenario(m, Cluster((PI,), BandwidthMatrix.uniform(1, 1e6)), 10.0)
    plan = plan_coedge(sc)
    assert plan.lam == (1.0,) and plan.rows == (16,)


def test_coedge_prefers_pc_and_ignores_extra_pis():
    base = fixtures.scenario("alexnet").with_deadline(0.5)
    plan = plan_coedge(base)
    assert plan.rows[2] / base.height > 0.5
    with_pc = relaxed_optimum(single(base, 3)).objective
    one_more = relaxed_optimum(single(base, 4)).objective
    assert abs(one_more - with_pc) <= 0.01 * with_pc


def test_recursions_bounded(alexnet6):
    for d in (0.075, 0.1, 0.5):
        assert plan_coedge(alexnet6.with_deadline(d)).recursions <= alexnet6.n


def test_fallback_picks_fastest_device(alexnet6):
    plan = fallback_full_offload(alexnet6)
    assert plan.rows == (0, 0, 160, 0, 0, 0)
    assert plan.is_fallback


def test_fallback_single_device_is_local():
    sc = single(fixtures.scenario("alexnet"), 1)
    assert fallback_full_offload(sc).rows == plan_local(sc).rows


def test_fallback_tie_goes_to_lowest_index():
    sc = toy_pair()
    assert fallback_full_offload(sc).rows == (12, 0)


def test_unreachable_deadline_falls_back(alexnet6):
    plan = plan_coedge(alexnet6.with_deadline(0.001))
    assert plan.is_fallback


def test_aggregator_single_and_tie(toy):
    assert select_aggregator(toy, [0, 12]) == 1
    m = ModelDescriptor("m", (12, 4, 1), (conv(1, 1, 2), fc(2, 3)))
    sc = Scenario(m, Cluster((PI,) * 3, BandwidthMatrix.uniform(3, 1e6)), 1.0)
    assert select_aggregator(sc, [4, 4, 4]) == 0


def test_aggregator_prefers_pc_when_classifier_dominates():
    m = ModelDescriptor("m", (16, 8, 1), (conv(1, 1, 4), fc(4, 4096), fc(4096, 4096)))
    sc = Scenario(m, Cluster((PI, PC), BandwidthMatrix.uniform(2, 1e6)), 1.0)
    a = [8, 8]
    t = {j: total_costs(sc, a, j).t_total for j in (0, 1)}
    assert select_aggregator(sc, a) == min(t, key=t.get) == 1


def test_baselines_on_identical_devices():
    sc = toy_pair()
    assert plan_modnn(sc).rows == plan_musical_chair(sc).rows == (6, 6)


def test_modnn_capability_share():
    m = ModelDescriptor("m", (150, 8, 1), (conv(1, 1, 1),))
    pi = DeviceProfile("pi", 615, 1.2e9, 1e6, 3.0, 0.1)
    pc = DeviceProfile("pc", 282, 3.6e9, 1e6, 12.0, 0.5)
    sc = Scenario(m, Cluster((pi, pc), BandwidthMatrix.uniform(2, 1e6)), 1.0)
    plan = plan_modnn(sc)
    assert plan.lam[1] == pytest.approx(0.867, abs=5e-4)
    assert plan.rows == (20, 130)


def test_local_misses_alexnet_deadline(alexnet6):
    plan = plan_local(alexnet6)
    assert plan.rows[0] == alexnet6.height
    assert total_costs(alexnet6, plan.rows).t_total > 0.1


def test_baseline_drops_device_when_repair_fails():
    # 60 rows over six devices leaves 10 each, below the threshold of 24
    m = ModelDescriptor("m", (60, 8, 1), (conv(3, 1, 1, 2, 1), conv(3, 1, 1, 2, 1), conv(3, 1, 1, 2, 1),
                                          conv(7, 1, 1, 1, 3)))
    sc = Scenario(m, Cluster((PI,) * 6, BandwidthMatrix.uniform(6, 1e6)), 1.0)
    plan = plan_musical_chair(sc)
    assert not plan_violations(sc, plan)
    assert len(plan.active) == 2


def test_baseline_respects_memory():
    small = DeviceProfile("small", 615e3, 1.2e9, 0.5, 3.0, 0.1)
    m = ModelDescriptor("m", (32, 32, 1), (conv(3, 1, 1, 1, 1),))
    sc = Scenario(m, Cluster((PI, small), BandwidthMatrix.uniform(2, 1e6)), 1.0)
    plan = plan_musical_chair(sc)
    assert plan.rows == (32, 0)


def test_baseline_without_any_valid_split():
    tiny = DeviceProfile("tiny", 615e3, 1.2e9, 0.01, 3.0, 0.1)
    m = ModelDescriptor("m", (32, 32, 1), (conv(3, 1, 1, 1, 1),))
    sc = Scenario(m, Cluster((tiny, tiny), BandwidthMatrix.uniform(2, 1e6)), 1.0)
    with pytest.raises(PlanInvalid):
        plan_modnn(sc)


@pytest.mark.parametrize("name", fixtures.MODELS)
def test_every_planner_valid_on_fixtures(name):
    sc = fixtures.scenario(name)
    for planner in PLANNERS:
        validate_plan(sc, run_planner(planner, sc))


def test_unknown_planner():
    with pytest.raises(ValueError, match="unknown planner"):
        run_planner("greedy", toy_pair())


def test_plan_document_fields(alexnet6):
    doc = plan_document(alexnet6, plan_coedge(alexnet6))
    assert set(doc) >= {"planner", "lambda", "rows", "aggregator", "objective_energy_j", "predicted_latency_s"}
    assert sum(doc["rows"]) == 160 and doc["deadline_met"]


def test_violations_reported():
    sc = fixtures.scenario("alexnet")
    bad = plan_from_rows(sc, [10, 150, 0, 0, 0, 0], "manual")
    assert any("threshold" in v for v in plan_violations(sc, bad))
    with pytest.raises(PlanInvalid):
        validate_plan(sc, bad)


# -- solver shortcuts and repairs ---------------------------------------------


def test_single_member_shortcut_matches_simplex():
    from coedge.generate import random_scenario
    from coedge.lp import solve

    rng = np.random.default_rng(77)
    for _ in range(60):
        sc = random_scenario(rng, max_devices=3)
        for d in range(sc.n):
            fast = solve_p2(sc, [d], aggregator=d)
            ref = solve(build_p2(sc, [d], d))
            assert fast.status is ref.status
            if ref.ok:
                assert fast.objective == pytest.approx(ref.objective, rel=1e-9)


def test_green_device_takes_everything_and_aggregates():
    # the master is faster but twice as power hungry per KB
    from coedge.oracle import ilp_oracle

    model = ModelDescriptor("one", (14, 4, 1), (conv(3, 1, 8, 1, 1),))
    hot = DeviceProfile("hot", 9e5, 2.2e9, 1e6, 5.6, 0.44)
    green = DeviceProfile("green", 1.8e6, 3.6e9, 1e6, 2.4, 0.75)
    cluster = Cluster((hot, green), BandwidthMatrix.uniform(2, 4e6))
    sc = Scenario(model, cluster, 0.35, elem_bytes=2, result_bytes=0.0)
    plan = plan_coedge(sc)
    assert plan.rows == (0, 14) and plan.aggregator == 1
    best, best_costs, _ = ilp_oracle(sc)
    assert total_costs(sc, plan.rows, plan.aggregator).energy == pytest.approx(best_costs.energy)


def test_shift_rows_recovers_deadline(toy):
    from coedge.partition import _shift_rows

    # the aggregator stays put while rows move, so pin it for the reference too
    splits = [[k, 12 - k] for k in range(1, 12)]
    lat = [total_costs(toy, a, 0).t_total for a in splits]
    sc = toy.with_deadline(min(lat) * (1 + 1e-9))
    worst = splits[int(np.argmax(lat))]
    fixed = _shift_rows(sc, plan_from_rows(sc, worst, "coedge", aggregator=0), 1)
    assert fixed is not None and sum(fixed.rows) == 12
    assert total_costs(sc, fixed.rows, fixed.aggregator).t_total <= sc.deadline
    # no single-row move beats the fastest split, so a tighter deadline gives up
    best = splits[int(np.argmin(lat))]
    assert _shift_rows(toy.with_deadline(min(lat) * 0.5), plan_from_rows(toy, best, "coedge", aggregator=0), 1) is None
