#!/usr/bin/env python3

# The two constraint encodings of the rebalancing model.
#
# The semantic checker evaluates the constraint set as written, bilinear
# work-area rule and co-assignment products included, with the shared-station
# flags s_s and u_w computed exactly. The linearized checker evaluates the
# MILP form literally on 0/1 matrices: co-assignment inequalities (a)-(c), the
# two per-task work-area families with auxiliaries c_w and l_sw, and the
# linking inequalities that keep l_sw honest.
#
# Both checkers work on the Configuration domain: every task holds exactly one
# worker and one station, every worker at most one station. A task whose
# worker is not at any station is reported as a structure violation by both.

import itertools
import logging
from dataclasses import dataclass, field
from typing import Dict, Tuple

logger = logging.getLogger("pyrebal.encoding")

from pyrebal.error import *
import pyrebal.constants as constants
from pyrebal.constants import INTERNAL
from pyrebal.domain import Configuration, derive_flags, neighbor_sets, worker_bounds, UNASSIGNED

__all__ = [ "Violation",
            "ViolationList",
            "LinearAux",

            "check_semantic",
            "check_linearized",
            "check_linearized_any",
            "derive_aux",
            "find_aux",
            "enumerate_feasible",
            "structural_candidates",
            "check_guard",
          ]

@dataclass(frozen=True)
class Violation:
    tag: str
    indices: Tuple
    detail: str

    def __str__(self):
        return "[%s] %s: %s" % (self.tag, ",".join(str(i) for i in self.indices), self.detail)

class ViolationList:
    # empty iff the configuration is feasible under the checked encoding
    def __init__(self, encoding):
        self.encoding = encoding
        self.entries = []

    def add(self, tag, indices, detail):
        self.entries.append(Violation(tag, tuple(indices), detail))

    def __len__(self):
        return len(self.entries)

    def __bool__(self):
        return bool(self.entries)

    def __iter__(self):
        return iter(self.entries)

    @property
    def feasible(self):
        return not self.entries

    def tags(self):
        return {v.tag for v in self.entries}

    def as_dict(self):
        return {
            "encoding": self.encoding,
            "feasible": self.feasible,
            "violations": [{"tag": v.tag, "indices": list(v.indices), "detail": v.detail}
                           for v in self.entries],
        }

    def __str__(self):
        if not self.entries:
            return "%s: feasible" % self.encoding
        return "\n".join("%s: %s" % (self.encoding, v) for v in self.entries)

@dataclass(frozen=True)
class LinearAux:
    # c_w, true = internal
    area_flag: Tuple[bool, ...]
    # l_sw keyed (station, worker)
    solo_flag: Dict[Tuple[int, int], bool]
    # q_ijs keyed (i, j, s) for j in N_i
    coassign: Dict[Tuple[int, int, int], bool]
    # s_s; the shared-station constraints stay in the linearized model
    station_shared: Tuple[bool, ...] = field(default=())

def _structure(proposed, instance, violations):
    # returns True when the remaining checks can run
    for e in proposed.range_problems(instance.num_tasks, instance.num_stations, instance.num_workers):
        violations.add("structure", (), e)
    if violations:
        return False
    for i, w in enumerate(proposed.task_worker, start=1):
        if proposed.worker_station[w-1] == UNASSIGNED:
            violations.add("structure", (i, w), "task %d held by worker %d who has no station" % (i, w))
    return True

def _staffing_counts(proposed, num_stations):
    counts = [0] * num_stations
    for s in proposed.worker_station:
        if s != UNASSIGNED:
            counts[s-1] += 1
    return counts

def _common_checks(proposed, instance, new_cycle_time, violations, require_nonempty_workers):
    # constraint families shared verbatim by both encodings: staffing,
    # precedence, cycle time and the optional non-empty worker rule
    lo, hi = worker_bounds(instance.num_workers, instance.num_stations)
    for s, c in enumerate(_staffing_counts(proposed, instance.num_stations), start=1):
        if not lo <= c <= hi:
            violations.add("staffing", (s,), "station %d has %d workers, bounds [%d,%d]" % (s, c, lo, hi))

    for j in instance.precedence.tasks:
        for i in sorted(instance.precedence.predecessors(j)):
            if proposed.station_of(i) > proposed.station_of(j):
                violations.add("precedence", (i, j), "predecessor %d at station %d after successor %d at station %d" % (
                    i, proposed.station_of(i), j, proposed.station_of(j)))

    loads = [0] * instance.num_workers
    for task, w in zip(instance.tasks, proposed.task_worker):
        loads[w-1] += task.processing_time
    for w, load in enumerate(loads, start=1):
        if load > new_cycle_time:
            violations.add("cycle-time", (w,), "worker %d load %d exceeds cycle time %d" % (w, load, new_cycle_time))

    if require_nonempty_workers:
        held = set(proposed.task_worker)
        for w in range(1, instance.num_workers+1):
            if w not in held:
                violations.add("nonempty-worker", (w,), "worker %d has no task" % w)

def check_semantic(proposed, instance, new_cycle_time, require_nonempty_workers=False):
    violations = ViolationList(constants.SEMANTIC)
    if not _structure(proposed, instance, violations):
        return violations

    for i, w, msg in proposed.consistency_problems():
        # unassigned holders were already reported as structure
        if proposed.worker_station[w-1] != UNASSIGNED:
            violations.add("consistency", (i, w), msg)

    _common_checks(proposed, instance, new_cycle_time, violations, require_nonempty_workers)

    # work-area rule: sum(a_i x_iw) * sum((1-a_i) x_iw) <= (1-u_w)|T|^2,
    # checked as the logical condition it encodes
    flags = derive_flags(proposed, instance, reference=proposed)
    internal = [0] * instance.num_workers
    external = [0] * instance.num_workers
    for task, w in zip(instance.tasks, proposed.task_worker):
        if task.area == INTERNAL:
            internal[w-1] += 1
        else:
            external[w-1] += 1
    for w in range(1, instance.num_workers+1):
        if flags.worker_in_shared(w) and internal[w-1] * external[w-1] > 0:
            violations.add("work-area", (w,), "worker %d in shared station %d holds %d internal and %d external tasks" % (
                w, proposed.station_of_worker(w), internal[w-1], external[w-1]))

    return violations

def _matrices(proposed, instance):
    T, S, W = instance.num_tasks, instance.num_stations, instance.num_workers
    x = [[0] * (W+1) for _ in range(T+1)]
    y = [[0] * (W+1) for _ in range(S+1)]
    z = [[0] * (S+1) for _ in range(T+1)]
    for i, (s, w) in enumerate(zip(proposed.task_station, proposed.task_worker), start=1):
        x[i][w] = 1
        z[i][s] = 1
    for w, s in enumerate(proposed.worker_station, start=1):
        if s != UNASSIGNED:
            y[s][w] = 1
    return x, y, z

def _area_rows(instance, x, y, z, c, solo):
    # yields (tag, i, s, w) for every violated work-area inequality
    S, W = instance.num_stations, instance.num_workers
    for i, task in enumerate(instance.tasks, start=1):
        for s in range(1, S+1):
            for w in range(1, W+1):
                slack = (1 - y[s][w]) + (1 - z[i][s]) + solo[(s, w)]
                if task.area == INTERNAL:
                    if x[i][w] > c[w] + slack:
                        yield ("area-internal", i, s, w)
                else:
                    if x[i][w] > (1 - c[w]) + slack:
                        yield ("area-external", i, s, w)

def _coassign_pairs(instance):
    if instance.current is None:
        return []
    nsets = neighbor_sets(instance.current)
    return [(i, j) for i in sorted(nsets) for j in sorted(nsets[i])]

def check_linearized(proposed, aux, instance, new_cycle_time, require_nonempty_workers=False):
    violations = ViolationList(constants.LINEARIZED)
    if not _structure(proposed, instance, violations):
        return violations

    T, S, W = instance.num_tasks, instance.num_stations, instance.num_workers
    x, y, z = _matrices(proposed, instance)

    for i in range(1, T+1):
        if sum(x[i][1:]) != 1:
            violations.add("task-worker", (i,), "task %d has %d workers" % (i, sum(x[i][1:])))
        if sum(z[i][1:]) != 1:
            violations.add("task-station", (i,), "task %d has %d stations" % (i, sum(z[i][1:])))
    for w in range(1, W+1):
        if sum(y[s][w] for s in range(1, S+1)) > 1:
            violations.add("worker-once", (w,), "worker %d at several stations" % w)
    for i in range(1, T+1):
        for s in range(1, S+1):
            for w in range(1, W+1):
                if x[i][w] + y[s][w] > 1 + z[i][s]:
                    violations.add("consistency", (i, s, w), "task %d with worker %d at station %d but task not there" % (i, w, s))

    _common_checks(proposed, instance, new_cycle_time, violations, require_nonempty_workers)

    shared = [0] + [int(b) for b in aux.station_shared]
    if len(shared) != S+1:
        violations.add("structure", (), "aux covers %d stations, expected %d" % (len(shared)-1, S))
        return violations
    for s in range(1, S+1):
        staff = sum(y[s][1:])
        if staff < 2 * shared[s]:
            violations.add("shared-station", (s,), "s_%d = 1 with %d workers" % (s, staff))
        if staff > 1 + (W - 1) * shared[s]:
            violations.add("shared-station", (s,), "s_%d = 0 with %d workers" % (s, staff))

    solo = {(s, w): int(aux.solo_flag.get((s, w), False)) for s in range(1, S+1) for w in range(1, W+1)}
    for (s, w), l in solo.items():
        if l > y[s][w] or l > 1 - shared[s]:
            violations.add("solo-link", (s, w), "l_%d%d = 1 but worker %d is not alone at station %d" % (s, w, w, s))

    c = [0] + [int(b) for b in aux.area_flag]
    for tag, i, s, w in _area_rows(instance, x, y, z, c, solo):
        violations.add(tag, (i, s, w), "task %d (area %d) at station %d by worker %d with c_w=%d" % (
            i, instance.task(i).area, s, w, c[w]))

    for i, j in _coassign_pairs(instance):
        for s in range(1, S+1):
            q = int(aux.coassign.get((i, j, s), False))
            if q > z[i][s]:
                violations.add("coassign-a", (i, j, s), "q_%d,%d,%d > z_%d,%d" % (i, j, s, i, s))
            if q > z[j][s]:
                violations.add("coassign-b", (i, j, s), "q_%d,%d,%d > z_%d,%d" % (i, j, s, j, s))
            if q < z[i][s] + z[j][s] - 1:
                violations.add("coassign-c", (i, j, s), "q_%d,%d,%d < z_%d,%d + z_%d,%d - 1" % (i, j, s, i, s, j, s))

    return violations

def _coassign_values(proposed, instance):
    return {(i, j, s): proposed.station_of(i) == s and proposed.station_of(j) == s
            for i, j in _coassign_pairs(instance)
            for s in range(1, instance.num_stations+1)}

def derive_aux(proposed, instance, new_cycle_time=None, require_nonempty_workers=False):
    """Auxiliaries of the linearized model from a semantically feasible
    configuration: l_sw = 1 iff w is alone at s, c_w the common area of a
    shared worker's tasks (false for solo and unassigned workers), q from z."""
    if new_cycle_time is None:
        new_cycle_time = instance.cycle_time
    violations = check_semantic(proposed, instance, new_cycle_time, require_nonempty_workers)
    if violations:
        raise ValidationError([str(v) for v in violations])

    flags = derive_flags(proposed, instance, reference=proposed)
    counts = _staffing_counts(proposed, instance.num_stations)
    solo = {}
    area = []
    for w in range(1, instance.num_workers+1):
        s = proposed.station_of_worker(w)
        for st in range(1, instance.num_stations+1):
            solo[(st, w)] = s == st and counts[st-1] == 1
        if s is not None and flags.shared(s):
            areas = {instance.task(i).area for i in proposed.tasks_of(w)}
            area.append(areas == {INTERNAL})
        else:
            area.append(False)
    return LinearAux(tuple(area), solo, _coassign_values(proposed, instance), flags.station_shared)

def find_aux(proposed, instance, new_cycle_time=None, best_effort=False):
    """Search for auxiliaries satisfying the linearized model for a fixed
    (x, y, z). Returns None when none exist.

    s_s is forced by the shared-station inequalities and q by (a)-(c). Larger
    l_sw only loosens the work-area inequalities, so l_sw takes the largest
    value its linking inequalities allow. c_w only appears in worker w's own
    rows and is tried at both values.

    With best_effort a worker without a valid c_w gets c_w = 0 and the
    auxiliaries are returned anyway, so the violated rows can be reported.
    """
    S, W = instance.num_stations, instance.num_workers
    counts = _staffing_counts(proposed, S)
    shared = tuple(c >= 2 for c in counts)
    x, y, z = _matrices(proposed, instance)
    solo = {(s, w): int(y[s][w] and not shared[s-1]) for s in range(1, S+1) for w in range(1, W+1)}

    area = []
    for w in range(1, W+1):
        for cw in (0, 1):
            c = [0] * (W+1)
            c[w] = cw
            bad = any(row[3] == w for row in _area_rows(instance, x, y, z, c, solo))
            if not bad:
                area.append(bool(cw))
                break
        else:
            if not best_effort:
                return None
            area.append(False)

    return LinearAux(tuple(area), {k: bool(v) for k, v in solo.items()},
                     _coassign_values(proposed, instance), shared)

def check_linearized_any(proposed, instance, new_cycle_time, require_nonempty_workers=False):
    # the linearized model for a fixed (x, y, z): empty iff some auxiliaries
    # satisfy every inequality
    if proposed.range_problems(instance.num_tasks, instance.num_stations, instance.num_workers):
        aux = LinearAux((), {}, {}, ())
    else:
        aux = find_aux(proposed, instance, new_cycle_time, best_effort=True)
    return check_linearized(proposed, aux, instance, new_cycle_time, require_nonempty_workers)

def check_guard(instance, guard):
    if (instance.num_tasks > guard["tasks"] or instance.num_stations > guard["stations"]
            or instance.num_workers > guard["workers"]):
        raise GuardError(msg="enumeration needs |T|<=%d |S|<=%d |W|<=%d, got %d/%d/%d" % (
            guard["tasks"], guard["stations"], guard["workers"],
            instance.num_tasks, instance.num_stations, instance.num_workers))

def structural_candidates(instance, independent_stations=False):
    """Every Configuration over the instance's index sets: each worker at
    one station or none, each task with an assigned worker. Task stations
    are implied by the workers unless independent_stations is set, in which
    case every station vector is produced, inconsistent ones included."""
    S, W, T = instance.num_stations, instance.num_workers, instance.num_tasks
    for ws in itertools.product(range(0, S+1), repeat=W):
        assigned = [w+1 for w, s in enumerate(ws) if s != UNASSIGNED]
        if not assigned:
            continue
        for tw in itertools.product(assigned, repeat=T):
            if not independent_stations:
                yield Configuration(tuple(ws[w-1] for w in tw), tw, ws)
                continue
            for ts in itertools.product(range(1, S+1), repeat=T):
                yield Configuration(ts, tw, ws)

def enumerate_feasible(instance, new_cycle_time, encoding=constants.SEMANTIC,
                       require_nonempty_workers=False, guard=constants.feasible_guard,
                       independent_stations=False):
    """Every feasible (x, y, z) triple under one encoding, by brute force."""
    check_guard(instance, guard)
    if encoding not in constants.encodings:
        raise OptionError(msg="unknown encoding %r" % (encoding,))

    found = set()
    for config in structural_candidates(instance, independent_stations):
        if encoding == constants.SEMANTIC:
            ok = not check_semantic(config, instance, new_cycle_time, require_nonempty_workers)
        else:
            aux = find_aux(config, instance, new_cycle_time)
            ok = aux is not None and not check_linearized(config, aux, instance, new_cycle_time,
                                                          require_nonempty_workers)
        if ok:
            found.add(config.triple())
    logger.debug("enumerate %s: %d feasible triples", encoding, len(found))
    return found
