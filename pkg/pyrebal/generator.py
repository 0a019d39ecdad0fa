#!/usr/bin/env python3

# Synthetic instances and their current configurations.
#
# Each instance draws its data from its own random.Random seeded with the
# instance seed, so a seed reproduces the same instance document.

import os
import json
import math
import random
import logging
from dataclasses import dataclass, replace, asdict
from typing import FrozenSet, Optional, Tuple

logger = logging.getLogger("pyrebal.generator")

from pyrebal.error import *
import pyrebal.constants as constants
from pyrebal.domain import Task, Instance, PrecedenceGraph, check_instance, dump_instance
from pyrebal.solver import SolveOptions, solve, compute_normalization, find_min_workers

__all__ = [ "GeneratorParams",

            "default_num_stations",
            "generate_instance",
            "generate_baseline",
            "write_suite",
            "instance_id",
          ]

@dataclass(frozen=True)
class GeneratorParams:
    num_tasks: int
    time_range: Tuple[int, int] = constants.default_time_range
    ergo_range: Tuple[int, int] = constants.default_ergo_range
    internal_probability: float = constants.default_internal_probability
    max_predecessors: int = constants.default_max_predecessors
    target_cycle_time: int = constants.default_target_cycle_time
    baseline_cycle_times: FrozenSet[int] = constants.default_baseline_cycle_times
    # None picks default_num_stations()
    num_stations: Optional[int] = None
    seed: int = 0
    scenario: str = constants.OPTIMAL_START

    def __post_init__(self):
        object.__setattr__(self, "baseline_cycle_times", frozenset(self.baseline_cycle_times))
        errs = []
        if self.num_tasks < 1:
            errs.append("num_tasks %r must be >= 1" % (self.num_tasks,))
        for name in ("time_range", "ergo_range"):
            lo, hi = getattr(self, name)
            if lo > hi:
                errs.append("%s %r is empty" % (name, (lo, hi)))
        if self.time_range[0] < 1:
            errs.append("time_range must start at 1 or above")
        if not set(range(self.ergo_range[0], self.ergo_range[1]+1)) <= constants.ergonomic_indices:
            errs.append("ergo_range %r leaves 1..5" % (self.ergo_range,))
        if not 0.0 <= self.internal_probability <= 1.0:
            errs.append("internal_probability %r must be within [0,1]" % (self.internal_probability,))
        if self.max_predecessors < 0:
            errs.append("max_predecessors %r must be >= 0" % (self.max_predecessors,))
        if self.target_cycle_time < 1:
            errs.append("target_cycle_time %r must be >= 1" % (self.target_cycle_time,))
        if not self.baseline_cycle_times:
            errs.append("baseline_cycle_times is empty")
        if self.target_cycle_time in self.baseline_cycle_times:
            errs.append("target_cycle_time %d is among the baseline cycle times" % self.target_cycle_time)
        if self.num_stations is not None and self.num_stations < 1:
            errs.append("num_stations %r must be >= 1" % (self.num_stations,))
        if self.scenario not in constants.scenarios:
            errs.append("unknown scenario %r" % (self.scenario,))
        if errs:
            raise OptionError(msg="; ".join(errs))

    def as_dict(self):
        d = asdict(self)
        d["baseline_cycle_times"] = sorted(self.baseline_cycle_times)
        d["time_range"] = list(self.time_range)
        d["ergo_range"] = list(self.ergo_range)
        return d

def default_num_stations(total_time, cycle_time):
    """Roughly two workers per station, never fewer than two stations.

    >>> default_num_stations(38, 20)
    2
    >>> default_num_stations(100, 20)
    3
    """
    # round half up; round() would round 2.5 down to 2
    return max(2, int(math.floor(total_time / (2 * cycle_time) + 0.5)))

def instance_id(params):
    return "t%02d_s%03d" % (params.num_tasks, params.seed)

def generate_instance(params):
    """A random instance at the target cycle time without a current
    configuration. num_workers is the capacity bound max(|S|,
    ceil(sum(tau)/CT)); find_min_workers() sizes it properly."""
    rng = random.Random(params.seed)
    tasks = []
    preds = {}
    for j in range(1, params.num_tasks+1):
        tau = rng.randint(*params.time_range)
        ergo = rng.randint(*params.ergo_range)
        area = constants.INTERNAL if rng.random() < params.internal_probability else constants.EXTERNAL
        tasks.append(Task(j, tau, ergo, area))
        # predecessors only among earlier tasks keeps the relation acyclic
        k = rng.randint(0, min(params.max_predecessors, j-1))
        if k:
            preds[j] = rng.sample(range(1, j), k)

    total = sum(t.processing_time for t in tasks)
    ct = params.target_cycle_time
    S = params.num_stations or default_num_stations(total, ct)
    W = max(S, -(-total // ct))
    instance = Instance(tuple(tasks), PrecedenceGraph(params.num_tasks, preds), S, W, ct)
    return check_instance(instance, instance_id(params))

def _baseline_cycle_times(params):
    # first choice uniform over the set, the others as fallbacks
    rng = random.Random("%d:baseline" % params.seed)
    order = sorted(params.baseline_cycle_times)
    rng.shuffle(order)
    return order

def generate_baseline(instance, params, options=SolveOptions()):
    """Attach a current configuration solved at a baseline cycle time with
    the similarity weight at zero. The suboptimal-start scenario stops that
    solve at its gap target."""
    if instance.current is not None:
        raise OptionError(msg="instance already has a current configuration")
    gap = constants.scenario_gap[params.scenario]
    calibration = replace(options, weights=constants.baseline_weights, gap_target=0.0)
    balancing = replace(options, weights=constants.baseline_weights, gap_target=gap)

    reasons = []
    for ct in _baseline_cycle_times(params):
        try:
            w = find_min_workers(instance, ct, calibration)
            base = instance.with_workers(w)
            bounds = compute_normalization(base, ct, calibration)
            res = solve(base, ct, bounds, balancing).raise_for_status()
        except (InfeasibleError, NoSolutionError) as err:
            logger.info("%s: baseline at cycle time %d failed: %s", instance_id(params), ct, err.msg)
            reasons.append("CT'=%d: %s" % (ct, err.msg))
            continue
        logger.debug("%s: baseline at cycle time %d with %d workers, %s", instance_id(params), ct, w, res.status)
        return instance.with_current(res.incumbent, ct)

    raise InfeasibleError(msg="no baseline cycle time admits a configuration: " + "; ".join(reasons),
                          diagnosis=reasons[-1] if reasons else None)

def write_suite(params_list, directory, options=SolveOptions(), scenarios=constants.scenarios):
    """Generate, baseline and size every instance and write one instance
    document per (instance, scenario) plus manifest.json. Instances with no
    baseline or no feasible rebalance at the target cycle time are
    discarded and logged."""
    os.makedirs(directory, exist_ok=True)
    entries = []
    discards = []
    for params in params_list:
        iid = instance_id(params)
        try:
            instance = generate_instance(params)
            w = find_min_workers(instance, params.target_cycle_time, options)
            instance = instance.with_workers(w)
            written = []
            for scenario in scenarios:
                sparams = replace(params, scenario=scenario)
                baselined = generate_baseline(instance, sparams, options)
                written.append((scenario, baselined))
        except (InfeasibleError, NoSolutionError) as err:
            logger.warning("discarding %s: %s", iid, err.msg)
            discards.append({"id": iid, "size": params.num_tasks, "seed": params.seed, "reason": err.msg})
            continue

        for scenario, baselined in written:
            fname = "%s.%s.json" % (iid, scenario)
            with open(os.path.join(directory, fname), "w") as f:
                f.write(dump_instance(baselined))
            entries.append({
                "id": iid,
                "file": fname,
                "size": params.num_tasks,
                "seed": params.seed,
                "scenario": scenario,
                "baseline_cycle_time": baselined.current_cycle_time,
                "baseline_workers": baselined.current.num_workers,
                "num_workers": baselined.num_workers,
                "num_stations": baselined.num_stations,
            })

    manifest = {
        "params": [p.as_dict() for p in params_list],
        "instances": entries,
        "discarded": discards,
    }
    with open(os.path.join(directory, "manifest.json"), "w") as f:
        json.dump(manifest, f, sort_keys=True, indent=1)
        f.write("\n")
    logger.info("wrote %d instance files to %s, %d discarded", len(entries), directory, len(discards))
    return manifest
