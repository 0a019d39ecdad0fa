# small hand-made and random instances shared by the test files

import random

from pyrebal.domain import Task, Instance, Configuration, PrecedenceGraph, check_instance

def make_instance(times, ergos=None, areas=None, preds=None, num_stations=1, num_workers=1,
                  cycle_time=10, current=None, current_cycle_time=None):
    n = len(times)
    ergos = ergos or [1] * n
    areas = areas or [0] * n
    tasks = tuple(Task(i+1, t, e, a) for i, (t, e, a) in enumerate(zip(times, ergos, areas)))
    if current is not None and current_cycle_time is None:
        current_cycle_time = cycle_time
    instance = Instance(tasks, PrecedenceGraph(n, preds or {}), num_stations, num_workers,
                        cycle_time, current, current_cycle_time)
    return check_instance(instance)

def random_current(rng, instance, num_workers):
    # structurally valid configuration; every station staffed by at least one worker
    S = instance.num_stations
    ws = [s for s in range(1, S+1)] + [rng.randint(1, S) for _ in range(num_workers - S)]
    rng.shuffle(ws)
    tw = [rng.randint(1, num_workers) for _ in range(instance.num_tasks)]
    config = Configuration(tuple(ws[w-1] for w in tw), tuple(tw), tuple(ws))
    loads = [0] * (num_workers+1)
    for t, w in zip(instance.tasks, tw):
        loads[w] += t.processing_time
    return config, max(max(loads), 1)

def random_instance(rng, num_tasks, num_stations, num_workers, cycle_time=None, with_current=True,
                    max_time=7, max_preds=2):
    times = [rng.randint(1, max_time) for _ in range(num_tasks)]
    ergos = [rng.randint(1, 5) for _ in range(num_tasks)]
    areas = [rng.randint(0, 1) for _ in range(num_tasks)]
    preds = {}
    for j in range(2, num_tasks+1):
        k = rng.randint(0, min(max_preds, j-1))
        if k:
            preds[j] = rng.sample(range(1, j), k)
    if cycle_time is None:
        # a little above the capacity bound, so most instances are feasible
        cycle_time = max(max(times), -(-sum(times) // num_workers)) + rng.randint(0, 4)
    instance = make_instance(times, ergos, areas, preds, num_stations, num_workers, cycle_time)
    if with_current:
        current, ct = random_current(rng, instance, rng.randint(num_stations, num_workers))
        instance = check_instance(instance.with_current(current, ct))
    return instance

def random_population(seed, count, sizes, stations, workers, **kw):
    rng = random.Random(seed)
    for _ in range(count):
        T = rng.choice(sizes)
        S = rng.choice(stations)
        W = rng.choice([w for w in workers if w >= S])
        yield random_instance(rng, T, S, W, **kw)
