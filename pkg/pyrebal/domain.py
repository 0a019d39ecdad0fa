#!/usr/bin/env python3

# Problem data model: tasks, precedence, line configurations and the
# instance document.
#
# Ids of tasks, stations and workers are dense and 1-based. Configurations
# keep their assignments as tuples indexed by id-1; a worker_station of 0
# means the worker is not assigned to any station.

import json
import logging
from dataclasses import dataclass, field, replace
from typing import Dict, FrozenSet, Optional, Tuple

logger = logging.getLogger("pyrebal.domain")

from pyrebal.error import *
import pyrebal.constants as constants
from pyrebal.precedence import PrecedenceGraph, topological_order
from pyrebal.source import Source, SourceString, SourceStream

__all__ = [ "Task",
            "Configuration",
            "DerivedFlags",
            "Instance",

            "load_instance",
            "dump_instance",
            "instance_document",
            "load_solution",
            "dump_solution",
            "validate_instance",
            "derive_flags",
            "neighbor_sets",
            "worker_bounds",
            "topological_order",
            "PrecedenceGraph",
          ]

UNASSIGNED = 0

@dataclass(frozen=True)
class Task:
    id: int
    processing_time: int
    ergonomic_index: int
    area: int

    def problems(self):
        errs = []
        if not _is_int(self.processing_time) or self.processing_time < 1:
            errs.append("task %r: processing_time %r must be an integer >= 1" % (self.id, self.processing_time))
        if self.ergonomic_index not in constants.ergonomic_indices or not _is_int(self.ergonomic_index):
            errs.append("task %r: ergonomic_index %r must be in 1..5" % (self.id, self.ergonomic_index))
        if self.area not in constants.areas or not _is_int(self.area):
            errs.append("task %r: area %r must be 0 (external) or 1 (internal)" % (self.id, self.area))
        return errs

@dataclass(frozen=True)
class Configuration:
    task_station: Tuple[int, ...]
    task_worker: Tuple[int, ...]
    worker_station: Tuple[int, ...]

    @property
    def num_tasks(self):
        return len(self.task_station)

    @property
    def num_workers(self):
        return len(self.worker_station)

    def station_of(self, task):
        return self.task_station[task-1]

    def worker_of(self, task):
        return self.task_worker[task-1]

    def station_of_worker(self, worker):
        s = self.worker_station[worker-1]
        return s if s != UNASSIGNED else None

    def tasks_at(self, station):
        return [i+1 for i, s in enumerate(self.task_station) if s == station]

    def tasks_of(self, worker):
        return [i+1 for i, w in enumerate(self.task_worker) if w == worker]

    def workers_at(self, station):
        return [w+1 for w, s in enumerate(self.worker_station) if s == station]

    def assigned_workers(self):
        return [w+1 for w, s in enumerate(self.worker_station) if s != UNASSIGNED]

    def triple(self):
        # the (x, y, z) projection used when comparing feasible sets
        return (self.task_worker, self.worker_station, self.task_station)

    def range_problems(self, num_tasks, num_stations, num_workers=None):
        # array lengths and index ranges
        errs = []
        if num_workers is None:
            num_workers = self.num_workers
        if len(self.task_station) != num_tasks or len(self.task_worker) != num_tasks:
            errs.append("configuration covers %d/%d tasks, expected %d" % (
                len(self.task_station), len(self.task_worker), num_tasks))
            return errs
        if len(self.worker_station) != num_workers:
            errs.append("configuration has %d workers, expected %d" % (len(self.worker_station), num_workers))
            return errs
        for i, (s, w) in enumerate(zip(self.task_station, self.task_worker), start=1):
            if not _is_int(s) or not 1 <= s <= num_stations:
                errs.append("task %d: station %r out of range 1..%d" % (i, s, num_stations))
            if not _is_int(w) or not 1 <= w <= num_workers:
                errs.append("task %d: worker %r out of range 1..%d" % (i, w, num_workers))
        for w, s in enumerate(self.worker_station, start=1):
            if not _is_int(s) or not 0 <= s <= num_stations:
                errs.append("worker %d: station %r out of range 0..%d" % (w, s, num_stations))
        return errs

    def consistency_problems(self):
        # (task, worker, message) wherever worker_station[task_worker[i]] !=
        # task_station[i]; ranges must hold
        errs = []
        for i, (s, w) in enumerate(zip(self.task_station, self.task_worker), start=1):
            if self.worker_station[w-1] != s:
                errs.append((i, w, "task %d: at station %d but its worker %d is at station %d" % (
                    i, s, w, self.worker_station[w-1])))
        return errs

    def problems(self, num_tasks, num_stations, num_workers=None):
        errs = self.range_problems(num_tasks, num_stations, num_workers)
        if errs:
            return errs
        return [msg for _, _, msg in self.consistency_problems()]

    def __str__(self):
        return "z=%r x=%r y=%r" % (self.task_station, self.task_worker, self.worker_station)

@dataclass(frozen=True)
class DerivedFlags:
    station_shared: Tuple[bool, ...]
    worker_shared: Tuple[bool, ...]
    neighbor_sets: Dict[int, FrozenSet[int]] = field(default_factory=dict)

    def shared(self, station):
        return self.station_shared[station-1]

    def worker_in_shared(self, worker):
        return self.worker_shared[worker-1]

@dataclass(frozen=True)
class Instance:
    tasks: Tuple[Task, ...]
    precedence: PrecedenceGraph
    num_stations: int
    num_workers: int
    cycle_time: int
    current: Optional[Configuration] = None
    # cycle time under which `current` was produced
    current_cycle_time: Optional[int] = None

    @property
    def num_tasks(self):
        return len(self.tasks)

    @property
    def times(self):
        return tuple(t.processing_time for t in self.tasks)

    @property
    def ergos(self):
        return tuple(t.ergonomic_index for t in self.tasks)

    @property
    def areas(self):
        return tuple(t.area for t in self.tasks)

    def task(self, i):
        return self.tasks[i-1]

    def total_time(self):
        return sum(self.times)

    def with_workers(self, num_workers):
        return replace(self, num_workers=num_workers)

    def with_cycle_time(self, cycle_time):
        return replace(self, cycle_time=cycle_time)

    def with_current(self, current, current_cycle_time):
        return replace(self, current=current, current_cycle_time=current_cycle_time)

    def without_current(self):
        return replace(self, current=None, current_cycle_time=None)

    def baseline_instance(self):
        # the instance the current configuration was produced for
        assert self.current is not None
        return replace(self, num_workers=self.current.num_workers,
                       cycle_time=self.current_cycle_time)

def _is_int(v):
    return isinstance(v, int) and not isinstance(v, bool)

def worker_bounds(num_workers, num_stations):
    """Lower and upper number of workers per station.

    >>> worker_bounds(5, 2)
    (2, 3)
    >>> worker_bounds(6, 3)
    (2, 2)
    """
    assert num_workers >= 1 and num_stations >= 1, (num_workers, num_stations)
    lower = num_workers // num_stations
    upper = -(-num_workers // num_stations)
    return lower, upper

def neighbor_sets(config):
    # N_i: tasks sharing task i's station in config, i excluded
    by_station = {}
    for i, s in enumerate(config.task_station, start=1):
        by_station.setdefault(s, set()).add(i)
    return {i: frozenset(by_station[s] - {i})
            for i, s in enumerate(config.task_station, start=1)}

def derive_flags(config, instance, reference=None):
    counts = [0] * instance.num_stations
    for s in config.worker_station:
        if s != UNASSIGNED:
            counts[s-1] += 1
    station_shared = tuple(c >= 2 for c in counts)
    worker_shared = tuple(s != UNASSIGNED and station_shared[s-1] for s in config.worker_station)
    if reference is None:
        reference = instance.current
    nsets = neighbor_sets(reference) if reference is not None else {}
    return DerivedFlags(station_shared, worker_shared, nsets)

def validate_instance(instance):
    # every violated invariant, as a list of strings
    errs = []
    if not instance.tasks:
        errs.append("instance has no tasks")
    for t in instance.tasks:
        errs.extend(t.problems())
    for name in ("num_stations", "num_workers", "cycle_time"):
        v = getattr(instance, name)
        if not _is_int(v) or v < 1:
            errs.append("%s %r must be a positive integer" % (name, v))
    if not errs and instance.num_workers < instance.num_stations:
        errs.append("num_workers %d < num_stations %d: some station cannot be staffed" % (
            instance.num_workers, instance.num_stations))

    errs.extend(instance.precedence.problems())
    if instance.precedence.num_tasks != instance.num_tasks:
        errs.append("precedence covers %d tasks, instance has %d" % (
            instance.precedence.num_tasks, instance.num_tasks))

    cur = instance.current
    if cur is not None and _is_int(instance.num_stations):
        if not _is_int(instance.current_cycle_time) or instance.current_cycle_time < 1:
            errs.append("current.cycle_time %r must be a positive integer" % (instance.current_cycle_time,))
        cfg_errs = cur.problems(instance.num_tasks, instance.num_stations)
        errs.extend("current: " + e for e in cfg_errs)
        if not cfg_errs and _is_int(instance.current_cycle_time):
            loads = [0] * cur.num_workers
            for t, w in zip(instance.tasks, cur.task_worker):
                if _is_int(t.processing_time):
                    loads[w-1] += t.processing_time
            for w, load in enumerate(loads, start=1):
                if load > instance.current_cycle_time:
                    errs.append("current: worker %d load %d exceeds its cycle time %d" % (
                        w, load, instance.current_cycle_time))
    return errs

#
# instance document
#

def _read_text(source):
    if isinstance(source, Source):
        return source.load(), source.name
    if isinstance(source, (bytes, str)):
        src = SourceString(source)
        return src.load(), src.name
    # file-like
    src = SourceStream(source)
    return src.load(), src.name

def _parse_json(text, name):
    try:
        return json.loads(text)
    except ValueError as err:
        raise ParseError(msg="malformed document: %s" % err, source=name)

def _require(doc, key, kind, name, where="document"):
    if not isinstance(doc, dict) or key not in doc:
        raise ParseError(msg="%s: missing key \"%s\"" % (where, key), source=name)
    v = doc[key]
    if kind is int and not _is_int(v):
        raise ParseError(msg="%s: \"%s\" must be an integer, got %r" % (where, key, v), source=name)
    if kind is list and not isinstance(v, list):
        raise ParseError(msg="%s: \"%s\" must be a list" % (where, key), source=name)
    return v

def _int_list(v, key, name):
    if not isinstance(v, list) or not all(_is_int(x) for x in v):
        raise ParseError(msg="\"%s\" must be a list of integers" % key, source=name)
    return tuple(v)

def _config_from_doc(doc, name, where):
    return Configuration(
        _int_list(_require(doc, "task_station", list, name, where), "task_station", name),
        _int_list(_require(doc, "task_worker", list, name, where), "task_worker", name),
        _int_list(_require(doc, "worker_station", list, name, where), "worker_station", name),
    )

def instance_from_document(doc, name="<document>"):
    if not isinstance(doc, dict):
        raise ParseError(msg="document must be a single object", source=name)

    cycle_time = _require(doc, "cycle_time", int, name)
    num_stations = _require(doc, "num_stations", int, name)
    num_workers = _require(doc, "num_workers", int, name)

    errs = []
    tasks = {}
    for n, tdoc in enumerate(_require(doc, "tasks", list, name)):
        where = "tasks[%d]" % n
        tid = _require(tdoc, "id", int, name, where)
        task = Task(tid,
                    _require(tdoc, "time", int, name, where),
                    _require(tdoc, "ergo", int, name, where),
                    _require(tdoc, "area", int, name, where))
        if tid in tasks:
            errs.append("task %d: duplicate id" % tid)
        tasks[tid] = task
    num_tasks = len(tasks)
    if sorted(tasks) != list(range(1, num_tasks+1)):
        errs.append("task ids %r must be exactly 1..%d" % (sorted(tasks), num_tasks))

    preds = {}
    for n, pdoc in enumerate(doc.get("precedence") or []):
        where = "precedence[%d]" % n
        tid = _require(pdoc, "task", int, name, where)
        plist = _int_list(_require(pdoc, "preds", list, name, where), where + ".preds", name)
        preds.setdefault(tid, set()).update(plist)
    precedence = PrecedenceGraph(num_tasks, preds)

    current = None
    current_ct = None
    cdoc = doc.get("current")
    if cdoc is not None:
        current_ct = _require(cdoc, "cycle_time", int, name, "current")
        current = _config_from_doc(cdoc, name, "current")

    if errs:
        raise ValidationError(errs, source=name)

    instance = Instance(tuple(tasks[i] for i in sorted(tasks)), precedence,
                        num_stations, num_workers, cycle_time, current, current_ct)
    return instance

def check_instance(instance, name="<instance>"):
    errs = validate_instance(instance)
    if errs:
        raise ValidationError(errs, source=name)
    # acyclicity is its own error class
    topological_order(instance.precedence)
    return instance

def load_instance(source):
    """Read and validate an instance document from a byte stream, text,
    bytes or a Source."""
    text, name = _read_text(source)
    logger.debug("load instance from %s", name)
    doc = _parse_json(text, name)
    instance = instance_from_document(doc, name)
    try:
        return check_instance(instance, name)
    except CycleError as err:
        err.source = name
        raise

def instance_document(instance):
    doc = {
        "cycle_time": instance.cycle_time,
        "num_stations": instance.num_stations,
        "num_workers": instance.num_workers,
        "tasks": [{"id": t.id, "time": t.processing_time, "ergo": t.ergonomic_index, "area": t.area}
                  for t in instance.tasks],
        "precedence": [{"task": t, "preds": sorted(instance.precedence.predecessors(t))}
                       for t in instance.precedence.tasks if instance.precedence.predecessors(t)],
        "current": None,
    }
    if instance.current is not None:
        doc["current"] = dict(_config_document(instance.current), cycle_time=instance.current_cycle_time)
    return doc

def dump_instance(instance):
    return json.dumps(instance_document(instance), sort_keys=True, indent=1) + "\n"

#
# solution document
#

def _config_document(config):
    return {
        "task_station": list(config.task_station),
        "task_worker": list(config.task_worker),
        "worker_station": list(config.worker_station),
    }

def dump_solution(config, report=None, result=None):
    # config may be None when the solver found nothing
    doc = _config_document(config) if config is not None else {
        "task_station": None, "task_worker": None, "worker_station": None}
    doc["report"] = report.as_dict() if report is not None else None
    doc["result"] = result.as_dict() if result is not None else None
    return json.dumps(doc, sort_keys=True, indent=1) + "\n"

def load_solution(source, instance, strict=True):
    """Returns (configuration, document). The configuration is checked
    against the instance's tasks and stations; the worker count is the
    solution's own. With strict=False only the index ranges are checked so
    the checkers can report inconsistencies themselves."""
    text, name = _read_text(source)
    doc = _parse_json(text, name)
    if not isinstance(doc, dict):
        raise ParseError(msg="solution must be a single object", source=name)
    if doc.get("task_station") is None:
        raise ParseError(msg="solution holds no configuration", source=name)
    config = _config_from_doc(doc, name, "solution")
    errs = []
    if config.num_workers < instance.num_stations:
        errs.append("solution has %d workers for %d stations" % (config.num_workers, instance.num_stations))
    if strict:
        errs.extend(config.problems(instance.num_tasks, instance.num_stations))
    else:
        errs.extend(config.range_problems(instance.num_tasks, instance.num_stations))
    if errs:
        raise ValidationError(errs, source=name)
    return config, doc
