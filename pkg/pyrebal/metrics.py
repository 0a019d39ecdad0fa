#!/usr/bin/env python3

# Objective components and fairness statistics.
#
# Workers "counted" in ranges and dispersion statistics are the ones assigned
# to a station, idle or not. Unassigned workers have no station context and
# are left out.

import math
import logging
from dataclasses import dataclass, asdict
from typing import Dict, Optional, Tuple

import numpy as np

logger = logging.getLogger("pyrebal.metrics")

from pyrebal.error import *
import pyrebal.constants as constants

__all__ = [ "ObjectiveReport",
            "NormalizationBounds",

            "similarity_factor",
            "mean_similarity",
            "worker_loads",
            "counted_workers",
            "load_ranges",
            "normalized_range",
            "coefficient_of_variation",
            "fairness",
            "components",
            "weighted_objective",
            "objective_report",
          ]

@dataclass(frozen=True)
class NormalizationBounds:
    # indexed like constants.components: (neg_msf, delta_l, delta_h)
    utopia: Tuple[float, float, float]
    nadir: Tuple[float, float, float]

    def __post_init__(self):
        if len(self.utopia) != 3 or len(self.nadir) != 3:
            raise OptionError(msg="normalization bounds need one value per component")
        for k, u, n in zip(constants.components, self.utopia, self.nadir):
            if u > n:
                raise OptionError(msg="normalization bounds for %s: utopia %r > nadir %r" % (k, u, n))

    @classmethod
    def identity(cls):
        # every component already on [0,1]; used before calibration
        return cls((-1.0, 0.0, 0.0), (0.0, 1.0, 1.0))

    def degenerate(self, k):
        return self.nadir[k] == self.utopia[k]

    def normalize(self, k, value):
        if self.degenerate(k):
            return 0.0
        v = (value - self.utopia[k]) / (self.nadir[k] - self.utopia[k])
        return min(1.0, max(0.0, v))

    def as_dict(self):
        return {k: {"utopia": u, "nadir": n}
                for k, u, n in zip(constants.components, self.utopia, self.nadir)}

@dataclass(frozen=True)
class ObjectiveReport:
    msf: Optional[float]
    loads: Dict[int, int]
    ergo_loads: Dict[int, int]
    l_max: int
    l_min: int
    h_max: int
    h_min: int
    delta_l: int
    delta_h: int
    weighted_normalized: Optional[float] = None
    wl_nr: Optional[float] = None
    wl_cv: Optional[float] = None
    el_nr: Optional[float] = None
    el_cv: Optional[float] = None

    def components(self):
        neg_msf = -self.msf if self.msf is not None else 0.0
        return (neg_msf, self.delta_l, self.delta_h)

    def as_dict(self):
        d = asdict(self)
        # json object keys are strings
        d["loads"] = {str(w): v for w, v in self.loads.items()}
        d["ergo_loads"] = {str(w): v for w, v in self.ergo_loads.items()}
        return d

def _station_sets(config):
    by_station = {}
    for i, s in enumerate(config.task_station, start=1):
        by_station.setdefault(s, set()).add(i)
    return by_station

def similarity_factor(i, current, proposed):
    """|TIB_i & TNB_i| / |TIB_i|; a task alone at its current station
    scores 1.

    TIB_i and TNB_i are the tasks sharing i's station (i excluded) in the
    current and proposed configuration.
    """
    if not 1 <= i <= current.num_tasks or not 1 <= i <= proposed.num_tasks:
        raise ValidationError(["unknown task %r" % (i,)])
    tib = set(current.tasks_at(current.station_of(i))) - {i}
    if not tib:
        return 1.0
    tnb = set(proposed.tasks_at(proposed.station_of(i))) - {i}
    return len(tib & tnb) / len(tib)

def mean_similarity(current, proposed):
    """Mean Similarity Factor over all tasks.

    >>> from pyrebal.domain import Configuration
    >>> c = Configuration((1, 1, 2, 2), (1, 1, 2, 2), (1, 2))
    >>> mean_similarity(c, c)
    1.0
    """
    if current.num_tasks != proposed.num_tasks:
        raise ValidationError(["task sets differ: %d vs %d tasks" % (current.num_tasks, proposed.num_tasks)])
    cur = _station_sets(current)
    new = _station_sets(proposed)
    total = []
    for i in range(1, current.num_tasks+1):
        tib = cur[current.task_station[i-1]]
        if len(tib) == 1:
            total.append(1.0)
            continue
        tnb = new[proposed.task_station[i-1]]
        # both sets contain i itself
        total.append((len(tib & tnb) - 1) / (len(tib) - 1))
    return math.fsum(total) / current.num_tasks

def worker_loads(proposed, instance):
    # l_w and h_w for every worker of the configuration; idle workers get 0
    loads = {w: 0 for w in range(1, proposed.num_workers+1)}
    ergo_loads = {w: 0 for w in range(1, proposed.num_workers+1)}
    for task, w in zip(instance.tasks, proposed.task_worker):
        loads[w] += task.processing_time
        ergo_loads[w] += task.ergonomic_index
    return loads, ergo_loads

def counted_workers(proposed):
    return proposed.assigned_workers()

def _values(v):
    if isinstance(v, dict):
        return list(v.values())
    return list(v)

def load_ranges(loads, ergo_loads=None):
    """max - min per measure, over counted workers only.

    >>> load_ranges([5, 12], [1, 1])
    (7, 0)
    """
    lv = _values(loads)
    if not lv:
        raise ValidationError(["load range of an empty worker set"])
    dl = max(lv) - min(lv)
    if ergo_loads is None:
        return dl
    hv = _values(ergo_loads)
    if not hv:
        raise ValidationError(["load range of an empty worker set"])
    return dl, max(hv) - min(hv)

def _positive_mean(values):
    a = np.asarray(_values(values), dtype=float)
    if a.size == 0:
        raise ValidationError(["dispersion of an empty set"])
    mean = a.mean()
    if mean <= 0:
        raise ValidationError(["dispersion needs a positive mean, got %r" % (mean,)])
    return a, mean

def normalized_range(values):
    """(max - min) / mean.

    >>> normalized_range([5, 15])
    1.0
    """
    a, mean = _positive_mean(values)
    return float((a.max() - a.min()) / mean)

def coefficient_of_variation(values):
    # population standard deviation over the mean
    a, mean = _positive_mean(values)
    return float(a.std(ddof=0) / mean)

def fairness(values):
    return normalized_range(values), coefficient_of_variation(values)

def components(instance, proposed, current=None):
    # raw objective components (-MSF, delta_l, delta_h) over counted workers
    if current is None:
        current = instance.current
    neg_msf = -mean_similarity(current, proposed) if current is not None else 0.0
    loads, ergo_loads = worker_loads(proposed, instance)
    counted = counted_workers(proposed)
    dl, dh = load_ranges([loads[w] for w in counted], [ergo_loads[w] for w in counted])
    return (neg_msf, dl, dh)

def weighted_objective(values, bounds, weights=constants.equal_weights):
    """Weighted sum of the clamped Nadir-Utopia normalized components.

    >>> b = NormalizationBounds((-1, 0, 0), (0, 8, 12))
    >>> round(weighted_objective((-0.5, 4, 6), b), 12)
    0.5
    """
    if len(values) != 3:
        raise OptionError(msg="three objective components expected, got %d" % len(values))
    return math.fsum(w * bounds.normalize(k, f)
                     for k, (w, f) in enumerate(zip(weights, values)) if w)

def objective_report(instance, proposed, current=None, bounds=None, weights=constants.equal_weights):
    if current is None:
        current = instance.current
    msf = mean_similarity(current, proposed) if current is not None else None
    loads, ergo_loads = worker_loads(proposed, instance)
    counted = counted_workers(proposed)
    lc = [loads[w] for w in counted]
    hc = [ergo_loads[w] for w in counted]
    dl, dh = load_ranges(lc, hc)

    weighted = None
    if bounds is not None:
        neg_msf = -msf if msf is not None else 0.0
        weighted = weighted_objective((neg_msf, dl, dh), bounds, weights)

    wl_nr = wl_cv = el_nr = el_cv = None
    # a line with no work at all has no meaningful dispersion
    if sum(lc) > 0:
        wl_nr, wl_cv = fairness(lc)
        el_nr, el_cv = fairness(hc)

    return ObjectiveReport(msf, loads, ergo_loads,
                           max(lc), min(lc), max(hc), min(hc), dl, dh,
                           weighted, wl_nr, wl_cv, el_nr, el_cv)
