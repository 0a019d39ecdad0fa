import random

import pytest

from pyrebal.error import *
from pyrebal.domain import Configuration
from pyrebal.encoding import check_semantic, check_linearized_any, enumerate_feasible
from pyrebal.metrics import NormalizationBounds, components, weighted_objective
from pyrebal.solver import *
import pyrebal.constants as constants

from instances import make_instance, random_population

identity = NormalizationBounds.identity()

def test_options_validation():
    with pytest.raises(OptionError):
        SolveOptions(weights=(0.5, 0.5, 0.5))
    with pytest.raises(OptionError):
        SolveOptions(weights=(1.5, -0.5, 0.0))
    with pytest.raises(OptionError):
        SolveOptions(weights=(0.5, 0.5))
    with pytest.raises(OptionError):
        SolveOptions(time_limit=0)
    with pytest.raises(OptionError):
        SolveOptions(gap_target=1.5)
    assert SolveOptions(weights=(0, 1, 0)).weights == (0.0, 1.0, 0.0)

def test_single_task():
    instance = make_instance([3])
    res = solve(instance, 5, identity)
    assert res.status == OPTIMAL
    assert res.incumbent == Configuration((1,), (1,), (1,))
    assert res.gap == 0.0
    assert res.lower_bound == res.objective
    assert res.raise_for_status() is res

def test_even_split():
    instance = make_instance([4, 4, 2, 2], num_stations=1, num_workers=2, cycle_time=6)
    res = solve(instance, 6, identity, SolveOptions(weights=(0, 1, 0)))
    assert res.status == OPTIMAL
    assert res.report.delta_l == 0
    assert sorted(res.report.loads.values()) == [6, 6]

def test_result_as_dict():
    res = SolveResult(INFEASIBLE, cycle_time=4, num_workers=2)
    d = res.as_dict()
    assert d["objective"] is None
    assert d["gap"] is None
    assert d["status"] == "Infeasible"

def test_raise_for_status():
    with pytest.raises(InfeasibleError) as err:
        SolveResult(INFEASIBLE, cycle_time=4, num_workers=2, diagnosis="cycle-time: x").raise_for_status()
    assert err.value.exit_code == EXIT_INFEASIBLE
    assert err.value.diagnosis == "cycle-time: x"
    with pytest.raises(NoSolutionError) as err:
        SolveResult(NO_SOLUTION_TIMEOUT).raise_for_status()
    assert err.value.exit_code == EXIT_NO_SOLUTION
    SolveResult(FEASIBLE_TIMEOUT).raise_for_status()

def test_infeasible_long_task():
    instance = make_instance([3, 9], num_stations=1, num_workers=2)
    res = solve(instance, 8, identity)
    assert res.status == INFEASIBLE
    assert res.incumbent is None
    assert res.diagnosis.startswith("cycle-time:")
    assert "task 2" in res.diagnosis

def test_infeasible_total_work():
    instance = make_instance([5, 5, 5], num_stations=1, num_workers=2)
    assert diagnose(instance, 7).startswith("cycle-time: total work 15")

def test_infeasible_work_area():
    # every 8-8 split of {5,5,3,3} pairs an internal with an external task
    instance = make_instance([5, 5, 3, 3], areas=[1, 1, 0, 0], num_stations=1, num_workers=2, cycle_time=8)
    res = solve(instance, 8, identity)
    print(res.diagnosis)
    assert res.status == INFEASIBLE
    assert res.diagnosis.startswith("work-area:")
    assert enumerate_feasible(instance, 8) == set()

def test_infeasible_precedence():
    # both short tasks before both long ones: station 1 overflows
    instance = make_instance([5, 5, 3, 3], preds={1: [3, 4], 2: [3, 4]}, num_stations=2, num_workers=2, cycle_time=8)
    res = solve(instance, 8, identity)
    assert res.status == INFEASIBLE
    assert res.diagnosis.startswith("precedence:")

def test_infeasible_packing():
    instance = make_instance([6, 6, 6], num_stations=2, num_workers=2)
    res = solve(instance, 10, identity)
    assert res.status == INFEASIBLE
    assert res.diagnosis.startswith("staffing:")
    with pytest.raises(InfeasibleError):
        res.raise_for_status()

def test_nonempty_workers_infeasible():
    instance = make_instance([1, 1], num_stations=1, num_workers=3)
    options = SolveOptions(require_nonempty_workers=True)
    res = solve(instance, 10, identity, options)
    assert res.status == INFEASIBLE
    assert res.diagnosis.startswith("nonempty-worker:")

def test_warm_start_keeps_current():
    current = Configuration((1, 1, 2, 2), (1, 2, 3, 3), (1, 1, 2))
    instance = make_instance([2, 2, 1, 1], areas=[1, 1, 0, 0], num_stations=2, num_workers=3,
                             current=current)
    # similarity only: the current configuration itself is optimal
    res = solve(instance, 10, identity, SolveOptions(weights=(1, 0, 0)))
    assert res.status == OPTIMAL
    assert res.objective == 0.0
    assert res.report.msf == 1.0

def _check_incumbent(res, instance, ct, require_nonempty_workers=False):
    assert not check_semantic(res.incumbent, instance, ct, require_nonempty_workers)
    assert not check_linearized_any(res.incumbent, instance, ct, require_nonempty_workers)

def _agree(seed, count, sizes, require_nonempty_workers=False, weights=constants.equal_weights):
    checked = infeasible = 0
    rng = random.Random(seed)
    for instance in random_population(seed, count, sizes=sizes, stations=[1, 2], workers=[1, 2, 3]):
        ct = instance.cycle_time
        options = SolveOptions(weights=weights, time_limit=300, random_seed=rng.randint(0, 99),
                               require_nonempty_workers=require_nonempty_workers)
        try:
            bounds = compute_normalization(instance, ct, options)
        except InfeasibleError:
            oracle = enumerate_optimal(instance, ct, identity, weights, require_nonempty_workers)
            assert oracle.status == INFEASIBLE
            infeasible += 1
            continue
        assert all(u <= n for u, n in zip(bounds.utopia, bounds.nadir))

        res = solve(instance, ct, bounds, options)
        oracle = enumerate_optimal(instance, ct, bounds, weights, require_nonempty_workers)
        print("instance T=%d S=%d W=%d: %s %r oracle %r" % (
            instance.num_tasks, instance.num_stations, instance.num_workers,
            res.status, res.objective, oracle.objective))
        assert res.status == OPTIMAL
        assert oracle.status == OPTIMAL
        assert abs(res.objective - oracle.objective) <= 1e-10
        _check_incumbent(res, instance, ct, require_nonempty_workers)
        checked += 1
    print("checked", checked, "infeasible", infeasible)
    return checked

def test_matches_exhaustive_optimum():
    assert _agree(21, 50, [4, 5, 6, 7, 7, 8]) > 0

def test_matches_exhaustive_optimum_balance_only():
    _agree(22, 15, [4, 5, 6], weights=(0.0, 0.5, 0.5))

def test_matches_exhaustive_optimum_nonempty_workers():
    _agree(23, 15, [4, 5, 6], require_nonempty_workers=True)

def test_single_objective_is_utopia():
    for instance in random_population(31, 10, sizes=[5, 6], stations=[2], workers=[2, 3]):
        ct = instance.cycle_time
        try:
            bounds = compute_normalization(instance, ct)
        except InfeasibleError:
            continue
        for k, which in enumerate(constants.components):
            best, comps = solve_single_objective(instance, ct, which)
            assert best == bounds.utopia[k]
            assert comps[k] == best

def _normalization_matches_enumeration(population):
    checked = 0
    for instance in population:
        ct = instance.cycle_time
        feasible = [Configuration(z, x, y) for x, y, z in enumerate_feasible(instance, ct)]
        try:
            bounds = compute_normalization(instance, ct)
        except InfeasibleError:
            assert feasible == []
            continue
        assert feasible
        values = [components(instance, c, instance.current) for c in feasible]
        for k in range(3):
            true_min = min(v[k] for v in values)
            assert abs(bounds.utopia[k] - true_min) <= 1e-9, (k, bounds.utopia, true_min)
        for v in values:
            w = weighted_objective(v, bounds)
            assert -1e-9 <= w <= 1 + 1e-9
        checked += 1
    print("checked", checked)
    return checked

def test_normalization_matches_enumeration():
    assert _normalization_matches_enumeration(
        random_population(61, 25, sizes=[3, 4, 5], stations=[1, 2], workers=[2, 3])) > 0

def test_normalization_matches_enumeration_three_stations():
    assert _normalization_matches_enumeration(
        random_population(62, 5, sizes=[3, 4], stations=[3], workers=[3, 4])) > 0

def test_single_objective_unknown():
    with pytest.raises(OptionError):
        solve_single_objective(make_instance([1]), 5, "makespan")

def test_deterministic():
    compared = 0
    for instance in random_population(41, 5, sizes=[7], stations=[2], workers=[3]):
        ct = instance.cycle_time
        try:
            bounds = compute_normalization(instance, ct)
        except InfeasibleError:
            continue
        first = solve(instance, ct, bounds, SolveOptions(random_seed=7))
        again = solve(instance, ct, bounds, SolveOptions(random_seed=7))
        assert first.incumbent == again.incumbent
        assert first.nodes_explored == again.nodes_explored
        compared += 1
    assert compared > 0

def test_gap_target():
    for instance in random_population(51, 10, sizes=[6, 7], stations=[2], workers=[3]):
        ct = instance.cycle_time
        options = SolveOptions(gap_target=0.5)
        try:
            bounds = compute_normalization(instance, ct, options)
        except InfeasibleError:
            continue
        res = solve(instance, ct, bounds, options)
        assert res.status in (OPTIMAL, FEASIBLE_GAP_MET)
        assert res.gap <= 0.5 + 1e-9
        assert res.lower_bound <= res.objective
        _check_incumbent(res, instance, ct)

def test_time_limit():
    # 17 unit tasks never split evenly over 3..5 workers, so every
    # configuration has delta_h >= 1 and the search cannot close the gap
    instance = make_instance([1] * 17, num_stations=3, num_workers=5, cycle_time=6)
    res = solve(instance, 6, identity, SolveOptions(weights=(0, 0, 1), time_limit=1e-6))
    print(res.as_dict())
    assert res.status == FEASIBLE_TIMEOUT
    assert res.nodes_explored >= 256
    _check_incumbent(res, instance, 6)
    assert res.lower_bound <= res.objective
    assert res.gap >= 0.0
    assert res.raise_for_status() is res

def test_evaluate():
    instance = make_instance([4, 6], num_stations=1, num_workers=2)
    bounds = NormalizationBounds((0.0, 0.0, 0.0), (0.0, 10.0, 10.0))
    value = evaluate(instance, Configuration((1, 1), (1, 2), (1, 1)), 10, bounds, (0, 1, 0))
    assert value == pytest.approx(0.2)
    with pytest.raises(ValidationError):
        evaluate(instance, Configuration((1, 1), (1, 1), (1, 1)), 9, bounds)

def test_enumerate_optimal_guard():
    with pytest.raises(GuardError):
        enumerate_optimal(make_instance([1] * 9), 10, identity)

def test_find_min_workers_small():
    instance = make_instance([4, 4, 4], num_stations=1, num_workers=1)
    assert find_min_workers(instance, 8) == 2
    assert find_min_workers(instance, 12) == 1
    with pytest.raises(InfeasibleError) as err:
        find_min_workers(instance, 3)
    assert err.value.diagnosis.startswith("cycle-time:")

def test_find_min_workers_matches_enumeration():
    swept = 0
    for instance in random_population(71, 30, sizes=[3, 4], stations=[1, 2], workers=[2],
                                      with_current=False):
        ct = instance.cycle_time - 2
        if max(instance.times) > ct:
            continue
        w = find_min_workers(instance, ct)
        print("ct=%d times=%r -> %d workers" % (ct, instance.times, w))
        if w <= constants.feasible_guard["workers"]:
            assert enumerate_feasible(instance.with_workers(w), ct)
            swept += 1
        if instance.num_stations <= w - 1 <= constants.feasible_guard["workers"]:
            assert not enumerate_feasible(instance.with_workers(w-1), ct)
    assert swept > 0

@pytest.mark.slow
def test_matches_exhaustive_optimum_study():
    assert _agree(97, 200, [5, 6, 7, 8]) > 0
