import random
import dataclasses

import pytest

from pyrebal.error import *
from pyrebal.domain import Configuration
from pyrebal.encoding import *
import pyrebal.constants as constants

from instances import make_instance, random_population

def test_feasible_single_station():
    instance = make_instance([3, 4], num_stations=1, num_workers=1)
    config = Configuration((1, 1), (1, 1), (1,))
    sem = check_semantic(config, instance, 10)
    assert sem.feasible
    assert str(sem) == "semantic: feasible"
    assert check_linearized_any(config, instance, 10).feasible

def test_precedence():
    instance = make_instance([1, 1], preds={2: [1]}, num_stations=2, num_workers=2)
    config = Configuration((2, 1), (2, 1), (1, 2))
    for violations in (check_semantic(config, instance, 10), check_linearized_any(config, instance, 10)):
        print(violations)
        assert violations.tags() == {"precedence"}
        (v,) = list(violations)
        assert v.indices == (1, 2)

def test_cycle_time():
    instance = make_instance([6, 5], num_stations=1, num_workers=1)
    config = Configuration((1, 1), (1, 1), (1,))
    sem = check_semantic(config, instance, 10)
    assert sem.tags() == {"cycle-time"}
    assert check_semantic(config, instance, 11).feasible

def test_staffing():
    instance = make_instance([1, 1], num_stations=2, num_workers=3)
    # bounds are [1,2]; station 2 is empty
    config = Configuration((1, 1), (1, 2), (1, 1, 1))
    sem = check_semantic(config, instance, 10)
    assert "staffing" in sem.tags()
    assert any(v.indices == (2,) for v in sem if v.tag == "staffing")

def test_work_area_shared_station():
    instance = make_instance([1, 1], areas=[1, 0], num_stations=1, num_workers=2)
    config = Configuration((1, 1), (1, 1), (1, 1))
    sem = check_semantic(config, instance, 10)
    assert sem.tags() == {"work-area"}
    lin = check_linearized_any(config, instance, 10)
    print(lin)
    assert not lin.feasible
    assert lin.tags() <= {"area-internal", "area-external"}
    assert find_aux(config, instance) is None

def test_work_area_solo_worker_may_mix():
    instance = make_instance([1, 1], areas=[1, 0], num_stations=2, num_workers=2)
    config = Configuration((1, 1), (1, 1), (1, 2))
    assert check_semantic(config, instance, 10).feasible
    aux = find_aux(config, instance)
    assert aux is not None
    assert aux.solo_flag[(1, 1)]
    assert check_linearized(config, aux, instance, 10).feasible

def test_split_areas_in_shared_station():
    instance = make_instance([1, 1], areas=[1, 0], num_stations=1, num_workers=2)
    config = Configuration((1, 1), (1, 2), (1, 1))
    assert check_semantic(config, instance, 10).feasible
    aux = derive_aux(config, instance)
    assert aux.area_flag == (True, False)
    assert aux.station_shared == (True,)
    assert check_linearized(config, aux, instance, 10).feasible

def test_nonempty_workers():
    instance = make_instance([1, 1], num_stations=1, num_workers=3)
    config = Configuration((1, 1), (1, 2), (1, 1, 1))
    assert check_semantic(config, instance, 10).feasible
    sem = check_semantic(config, instance, 10, require_nonempty_workers=True)
    assert sem.tags() == {"nonempty-worker"}
    assert [v.indices for v in sem] == [(3,)]

def test_unassigned_holder_is_structure():
    instance = make_instance([1, 1], num_stations=1, num_workers=2)
    config = Configuration((1, 1), (1, 2), (1, 0))
    for violations in (check_semantic(config, instance, 10), check_linearized_any(config, instance, 10)):
        assert "structure" in violations.tags()
        assert "consistency" not in violations.tags() or violations.encoding == constants.LINEARIZED

def test_out_of_range_stops_early():
    instance = make_instance([1, 1], num_stations=1, num_workers=1)
    config = Configuration((1, 2), (1, 1), (1,))
    sem = check_semantic(config, instance, 10)
    assert sem.tags() == {"structure"}
    assert check_linearized_any(config, instance, 10).tags() == {"structure"}

def _rebalanced():
    current = Configuration((1, 1, 2), (1, 1, 2), (1, 2))
    instance = make_instance([1, 1, 1], areas=[1, 1, 0], num_stations=2, num_workers=3, current=current)
    proposed = Configuration((1, 1, 2), (1, 2, 3), (1, 1, 2))
    return instance, proposed

def test_derive_aux():
    instance, proposed = _rebalanced()
    aux = derive_aux(proposed, instance)
    assert aux.area_flag == (True, True, False)
    assert aux.solo_flag[(2, 3)]
    assert not aux.solo_flag[(1, 1)]
    assert aux.coassign[(1, 2, 1)]
    assert not aux.coassign[(1, 2, 2)]
    assert check_linearized(proposed, aux, instance, 10).feasible

def test_derive_aux_infeasible():
    instance, proposed = _rebalanced()
    with pytest.raises(ValidationError):
        derive_aux(proposed, instance, new_cycle_time=0)

def test_broken_aux():
    instance, proposed = _rebalanced()
    aux = derive_aux(proposed, instance)

    bad = dataclasses.replace(aux, coassign=dict(aux.coassign))
    bad.coassign[(1, 2, 2)] = True
    tags = check_linearized(proposed, bad, instance, 10).tags()
    assert {"coassign-a", "coassign-b"} <= tags

    bad = dataclasses.replace(aux, coassign=dict(aux.coassign))
    bad.coassign[(1, 2, 1)] = False
    assert check_linearized(proposed, bad, instance, 10).tags() == {"coassign-c"}

    solo = dict(aux.solo_flag)
    solo[(1, 1)] = True
    assert "solo-link" in check_linearized(proposed, dataclasses.replace(aux, solo_flag=solo), instance, 10).tags()

    bad = dataclasses.replace(aux, station_shared=(False, False))
    assert "shared-station" in check_linearized(proposed, bad, instance, 10).tags()

    bad = dataclasses.replace(aux, area_flag=(False, True, False))
    violations = check_linearized(proposed, bad, instance, 10)
    assert violations.tags() == {"area-internal"}
    assert [v.indices for v in violations] == [(1, 1, 1)]

def test_violations_as_dict():
    instance = make_instance([6, 5], num_stations=1, num_workers=1)
    d = check_semantic(Configuration((1, 1), (1, 1), (1,)), instance, 10).as_dict()
    assert d["encoding"] == "semantic"
    assert d["feasible"] is False
    assert d["violations"][0]["tag"] == "cycle-time"
    assert d["violations"][0]["indices"] == [1]

def test_enumerate_small():
    instance = make_instance([1, 1], num_stations=2, num_workers=2)
    feasible = enumerate_feasible(instance, 10)
    # one worker per station, each task with either worker
    assert len(feasible) == 8
    instance = make_instance([1, 1], preds={2: [1]}, num_stations=2, num_workers=2)
    assert len(enumerate_feasible(instance, 10)) == 6
    assert enumerate_feasible(instance, 10, constants.LINEARIZED) == enumerate_feasible(instance, 10)

def test_enumerate_tight_cycle_time():
    instance = make_instance([2, 2], num_stations=1, num_workers=1)
    assert enumerate_feasible(instance, 3) == set()
    assert len(enumerate_feasible(instance, 4)) == 1

def test_guard():
    instance = make_instance([1] * 7)
    with pytest.raises(GuardError):
        enumerate_feasible(instance, 10)
    with pytest.raises(GuardError):
        check_guard(make_instance([1], num_stations=1, num_workers=5), constants.feasible_guard)
    check_guard(instance, constants.optimal_guard)

def test_unknown_encoding():
    with pytest.raises(OptionError):
        enumerate_feasible(make_instance([1]), 10, "quadratic")

def test_candidates_are_structural():
    instance = make_instance([1, 1, 1], num_stations=2, num_workers=2)
    seen = set()
    for config in structural_candidates(instance):
        assert config.problems(3, 2) == []
        seen.add(config.triple())
    # 8 worker placements with >= 1 worker, tasks over assigned workers
    assert len(seen) == 2 * 1 + 2 * 1 + 4 * 8

def _equivalent(seed, count, sizes, require_nonempty_workers=False, independent_stations=False):
    mismatches = 0
    total = 0
    for instance in random_population(seed, count, sizes=sizes, stations=[1, 2], workers=[1, 2, 3]):
        ct = instance.cycle_time
        sem = enumerate_feasible(instance, ct, constants.SEMANTIC, require_nonempty_workers,
                                 independent_stations=independent_stations)
        lin = enumerate_feasible(instance, ct, constants.LINEARIZED, require_nonempty_workers,
                                 independent_stations=independent_stations)
        total += len(sem)
        if sem != lin:
            mismatches += 1
            print("instance", instance)
            print("semantic only", sorted(sem - lin))
            print("linearized only", sorted(lin - sem))
    print("feasible triples", total)
    return mismatches

def test_encodings_agree():
    assert _equivalent(3, 40, [2, 3, 4]) == 0

def test_encodings_agree_nonempty_workers():
    assert _equivalent(5, 20, [2, 3, 4], require_nonempty_workers=True) == 0

def test_candidates_with_independent_stations():
    instance = make_instance([1, 1, 1], num_stations=2, num_workers=2)
    configs = list(structural_candidates(instance, independent_stations=True))
    # one assigned worker: 4 placements x 2^3 stations; two: 4 x 4^3
    assert len(configs) == 4 * 8 + 4 * 64
    assert len({c.triple() for c in configs}) == len(configs)
    assert any(c.consistency_problems() for c in configs)

def test_encodings_agree_with_independent_stations():
    assert _equivalent(7, 12, [2, 3, 4], independent_stations=True) == 0

def test_inconsistent_stations_rejected_by_both():
    rng = random.Random(11)
    inconsistent = 0
    for instance in random_population(13, 60, sizes=[3, 4, 5, 6], stations=[2, 3], workers=[2, 3, 4]):
        ct = instance.cycle_time
        for _ in range(20):
            ws = tuple(rng.randint(1, instance.num_stations) for _ in range(instance.num_workers))
            tw = tuple(rng.randint(1, instance.num_workers) for _ in range(instance.num_tasks))
            ts = tuple(rng.randint(1, instance.num_stations) for _ in range(instance.num_tasks))
            config = Configuration(ts, tw, ws)
            sem = check_semantic(config, instance, ct)
            lin = check_linearized_any(config, instance, ct)
            assert sem.feasible == lin.feasible, (config, str(sem), str(lin))
            if config.consistency_problems():
                inconsistent += 1
                assert "consistency" in sem.tags()
                assert "consistency" in lin.tags()
    print("inconsistent configurations", inconsistent)
    assert inconsistent > 0

@pytest.mark.slow
def test_encodings_agree_study():
    assert _equivalent(17, 200, [3, 4, 5]) == 0
