#!/usr/bin/env python3

# Exact solver for the rebalancing model.
#
# Depth-first branch and bound over tasks in topological order. A task is
# placed on a (station, worker) pair with the station no earlier than any of
# its predecessors' stations. A worker's station is committed when it takes
# its first task. Workers are interchangeable so a new worker always gets the
# lowest unused label. At a leaf, idle workers are added only where the
# staffing lower bound asks for them: extra idle workers can only widen the
# load ranges or make a station shared.

import math
import time
import random
import logging
import itertools
from dataclasses import dataclass
from typing import Optional, Tuple

logger = logging.getLogger("pyrebal.solver")

from pyrebal.error import *
import pyrebal.constants as constants
from pyrebal.constants import INTERNAL, EXTERNAL
from pyrebal.domain import Configuration, topological_order, worker_bounds, UNASSIGNED
from pyrebal.encoding import check_semantic, check_guard
from pyrebal.metrics import NormalizationBounds, components, weighted_objective, objective_report

__all__ = [ "SolveOptions",
            "SolveResult",

            "OPTIMAL",
            "FEASIBLE_GAP_MET",
            "FEASIBLE_TIMEOUT",
            "INFEASIBLE",
            "NO_SOLUTION_TIMEOUT",

            "solve",
            "solve_single_objective",
            "compute_normalization",
            "enumerate_optimal",
            "find_min_workers",
            "evaluate",
            "diagnose",
          ]

OPTIMAL = "Optimal"
FEASIBLE_GAP_MET = "FeasibleGapMet"
FEASIBLE_TIMEOUT = "FeasibleTimeout"
INFEASIBLE = "Infeasible"
NO_SOLUTION_TIMEOUT = "NoSolutionTimeout"

statuses = (OPTIMAL, FEASIBLE_GAP_MET, FEASIBLE_TIMEOUT, INFEASIBLE, NO_SOLUTION_TIMEOUT)

# check the clock every this many nodes
_CLOCK_MASK = 255

# work-area bits of a worker's task set
_AREA_BIT = {EXTERNAL: 1, INTERNAL: 2}
_MIXED = 3

@dataclass(frozen=True)
class SolveOptions:
    weights: Tuple[float, float, float] = constants.equal_weights
    time_limit: float = constants.default_suite_time_limit
    gap_target: float = 0.0
    require_nonempty_workers: bool = False
    random_seed: int = 0
    # seconds between progress lines
    log_interval: float = 5.0

    def __post_init__(self):
        w = tuple(float(v) for v in self.weights)
        if len(w) != 3:
            raise OptionError(msg="weights need three values, got %d" % len(w))
        if any(v < 0 for v in w):
            raise OptionError(msg="weights must be nonnegative, got %r" % (w,))
        if abs(math.fsum(w) - 1.0) > 1e-9:
            raise OptionError(msg="weights must sum to 1, got %r" % (math.fsum(w),))
        object.__setattr__(self, "weights", w)
        if not self.time_limit > 0:
            raise OptionError(msg="time limit must be positive, got %r" % (self.time_limit,))
        if not 0.0 <= self.gap_target <= 1.0:
            raise OptionError(msg="gap target must be within [0,1], got %r" % (self.gap_target,))
        if not self.log_interval > 0:
            raise OptionError(msg="log interval must be positive, got %r" % (self.log_interval,))

def _finite(v):
    return v if v is not None and math.isfinite(v) else None

@dataclass
class SolveResult:
    status: str
    incumbent: Optional[Configuration] = None
    objective: float = math.inf
    lower_bound: float = -math.inf
    gap: float = math.inf
    nodes_explored: int = 0
    elapsed: float = 0.0
    cycle_time: Optional[int] = None
    num_workers: Optional[int] = None
    report: Optional[object] = None
    diagnosis: Optional[str] = None

    @property
    def has_incumbent(self):
        return self.incumbent is not None

    def raise_for_status(self):
        if self.status == INFEASIBLE:
            raise InfeasibleError(msg="infeasible at cycle time %s with %s workers: %s" % (
                self.cycle_time, self.num_workers, self.diagnosis), diagnosis=self.diagnosis)
        if self.status == NO_SOLUTION_TIMEOUT:
            raise NoSolutionError(msg="no configuration found within the time limit after %d nodes" % self.nodes_explored)
        return self

    def as_dict(self):
        return {
            "status": self.status,
            "objective": _finite(self.objective),
            "lower_bound": _finite(self.lower_bound),
            "gap": _finite(self.gap),
            "nodes": self.nodes_explored,
            "elapsed": self.elapsed,
            "cycle_time": self.cycle_time,
            "num_workers": self.num_workers,
            "diagnosis": self.diagnosis,
        }

def _gap(objective, lower_bound):
    return (objective - lower_bound) / max(abs(objective), constants.gap_eps)

class _Objective:
    # weighted normalized objective, or one raw component when `which` is set
    def __init__(self, bounds=None, weights=constants.equal_weights, which=None):
        if which is None and bounds is None:
            raise OptionError(msg="weighted objective needs normalization bounds")
        self.bounds = bounds
        self.weights = weights
        self.which = which

    def value(self, comps):
        if self.which is not None:
            return comps[self.which]
        return weighted_objective(comps, self.bounds, self.weights)

def _water_level(loads, zeros, amount):
    # highest level the smallest of `loads` plus `zeros` empty workers can be
    # raised to by spreading `amount` over them
    vals = [0] * zeros + sorted(loads)
    if not vals:
        return math.inf
    prefix = 0
    for j, v in enumerate(vals):
        prefix += v
        level = (amount + prefix) / (j + 1)
        nxt = vals[j+1] if j+1 < len(vals) else math.inf
        if level <= nxt:
            return level
    return math.inf

class _Search:
    def __init__(self, instance, new_cycle_time, options, objective=None, relax=()):
        self.instance = instance
        self.ct = new_cycle_time
        self.options = options
        self.objective = objective
        # feasibility searches stop at the first leaf
        self.first_leaf = objective is None
        self.relax = frozenset(relax)

        T, S, W = instance.num_tasks, instance.num_stations, instance.num_workers
        self.T, self.S, self.W = T, S, W
        self.lo, self.hi = worker_bounds(W, S)
        self.order = topological_order(instance.precedence)
        self.tau = (0,) + instance.times
        self.ergo = (0,) + instance.ergos
        self.area_bit = (0,) + tuple(_AREA_BIT[a] for a in instance.areas)
        self.preds = [()] + [tuple(instance.precedence.predecessors(i)) for i in range(1, T+1)]

        self.current = instance.current
        self.neighbors = [()] * (T+1)
        if self.current is not None:
            by_station = {}
            for i, s in enumerate(self.current.task_station, start=1):
                by_station.setdefault(s, []).append(i)
            for i, s in enumerate(self.current.task_station, start=1):
                self.neighbors[i] = tuple(j for j in by_station[s] if j != i)

        self.station = [0] * (T+1)
        self.worker = [0] * (T+1)
        self.wstation = [0] * (W+1)
        self.wload = [0] * (W+1)
        self.wergo = [0] * (W+1)
        self.wmask = [0] * (W+1)
        self.count = [0] * (S+1)
        self.mixed = [0] * (S+1)
        self.used = 0
        self.deficit = S * self.lo
        self.rem_time = sum(instance.times)
        self.rem_ergo = sum(instance.ergos)
        self.lost = 0.0

        self.rng = random.Random(options.random_seed)
        self.nodes = 0
        self.incumbent = None
        self.incumbent_value = math.inf
        self.pruned_bound = math.inf
        self.open_bound = math.inf
        self.stopped = False
        self.start = time.monotonic()
        self.deadline = self.start + options.time_limit
        self.next_log = self.start + options.log_interval

    #
    # state updates
    #

    def _shared_known(self, s):
        return self.count[s] >= 2 or self.lo >= 2

    def place(self, i, s, w):
        new = self.wstation[w] == UNASSIGNED
        if new:
            if self.count[s] < self.lo:
                self.deficit -= 1
            self.wstation[w] = s
            self.count[s] += 1
            self.used += 1
        old_mask = self.wmask[w]
        self.wmask[w] = old_mask | self.area_bit[i]
        if self.wmask[w] == _MIXED and old_mask != _MIXED:
            self.mixed[s] += 1
        self.station[i] = s
        self.worker[i] = w
        self.wload[w] += self.tau[i]
        self.wergo[w] += self.ergo[i]
        self.rem_time -= self.tau[i]
        self.rem_ergo -= self.ergo[i]
        lost = 0.0
        for j in self.neighbors[i]:
            if self.station[j] and self.station[j] != s:
                lost += 1.0 / len(self.neighbors[i]) + 1.0 / len(self.neighbors[j])
        self.lost += lost
        return (new, old_mask, lost)

    def unplace(self, i, undo):
        new, old_mask, lost = undo
        s, w = self.station[i], self.worker[i]
        self.lost -= lost
        self.rem_time += self.tau[i]
        self.rem_ergo += self.ergo[i]
        self.wload[w] -= self.tau[i]
        self.wergo[w] -= self.ergo[i]
        if self.wmask[w] == _MIXED and old_mask != _MIXED:
            self.mixed[s] -= 1
        self.wmask[w] = old_mask
        self.station[i] = 0
        self.worker[i] = 0
        if new:
            self.used -= 1
            self.count[s] -= 1
            self.wstation[w] = UNASSIGNED
            if self.count[s] < self.lo:
                self.deficit += 1

    def admissible(self, remaining):
        # every remaining constraint can still be met; `remaining` tasks are
        # still unplaced
        free = self.W - self.used
        if self.deficit > free:
            return False
        if self.options.require_nonempty_workers and free > remaining:
            return False
        capacity = sum(self.ct - self.wload[w] for w in range(1, self.used+1)) + free * self.ct
        return self.rem_time <= capacity

    #
    # bounds
    #

    def bound(self):
        if self.first_leaf:
            return 0.0
        neg_msf = -(1.0 - self.lost / self.T) if self.current is not None else 0.0
        if self.options.require_nonempty_workers:
            zeros = self.W - self.used
        else:
            zeros = self.deficit
        used = range(1, self.used+1)
        loads = [self.wload[w] for w in used]
        ergos = [self.wergo[w] for w in used]
        dl = max(0.0, max(loads, default=0) - _water_level(loads, zeros, self.rem_time))
        dh = max(0.0, max(ergos, default=0) - _water_level(ergos, zeros, self.rem_ergo))
        return self.objective.value((neg_msf, dl, dh))

    #
    # search
    #

    def children(self, depth):
        i = self.order[depth]
        first = 1
        if "precedence" not in self.relax:
            first = max([self.station[p] for p in self.preds[i]] + [1])
        remaining = self.T - depth - 1
        kids = []
        for s in range(first, self.S+1):
            workers = [w for w in range(1, self.used+1) if self.wstation[w] == s]
            if self.used < self.W and self.count[s] < self.hi:
                workers.append(self.used + 1)
            for w in workers:
                if self.wload[w] + self.tau[i] > self.ct:
                    continue
                undo = self.place(i, s, w)
                ok = self.admissible(remaining)
                if ok and "work-area" not in self.relax:
                    ok = not (self._shared_known(s) and self.mixed[s])
                if ok:
                    kids.append((self.bound(), self.rng.random(), s, w))
                self.unplace(i, undo)
        kids.sort()
        return i, kids

    def complete(self):
        # leaf: staff the stations below the lower bound with idle workers
        ws = list(self.wstation[1:])
        nxt = self.used
        for s in range(1, self.S+1):
            for _ in range(max(0, self.lo - self.count[s])):
                ws[nxt] = s
                nxt += 1
        if self.options.require_nonempty_workers and self.used != self.W:
            return None
        return Configuration(tuple(self.station[1:]), tuple(self.worker[1:]), tuple(ws))

    def _prunable(self, lb):
        if self.incumbent is None:
            return False
        inc = self.incumbent_value
        return lb >= inc - max(self.options.gap_target * abs(inc), constants.objective_tol)

    def _tick(self):
        if self.nodes & _CLOCK_MASK:
            return
        now = time.monotonic()
        if now >= self.next_log:
            self.next_log = now + self.options.log_interval
            logger.info("nodes=%d incumbent=%s bound=%s elapsed=%.1fs",
                        self.nodes, _fmt(self.incumbent_value), _fmt(min(self.pruned_bound, self.incumbent_value)),
                        now - self.start)
        if now >= self.deadline:
            self.stopped = True

    def offer(self, config):
        if self.first_leaf:
            self.incumbent = config
            self.incumbent_value = 0.0
            self.stopped = True
            return
        value = self.objective.value(components(self.instance, config))
        if value < self.incumbent_value:
            logger.debug("incumbent %.6f at node %d: %s", value, self.nodes, config)
            self.incumbent = config
            self.incumbent_value = value

    def dfs(self, depth, lb):
        self.nodes += 1
        self._tick()
        if self.stopped:
            self.open_bound = min(self.open_bound, lb)
            return
        if self._prunable(lb):
            self.pruned_bound = min(self.pruned_bound, lb)
            return
        if depth == self.T:
            config = self.complete()
            if config is not None:
                self.offer(config)
            return

        i, kids = self.children(depth)
        for n, (child_lb, _, s, w) in enumerate(kids):
            undo = self.place(i, s, w)
            self.dfs(depth+1, child_lb)
            self.unplace(i, undo)
            if self.stopped:
                for rest in kids[n+1:]:
                    self.open_bound = min(self.open_bound, rest[0])
                return

    def run(self):
        if self.admissible(self.T):
            self.dfs(0, self.bound())
        return self

    @property
    def elapsed(self):
        return time.monotonic() - self.start

    @property
    def timed_out(self):
        # a feasibility search stops on success too
        return self.stopped and not (self.first_leaf and self.incumbent is not None)

def _fmt(v):
    return "%.6f" % v if math.isfinite(v) else "-"

def _warm_start(search, instance, new_cycle_time, options):
    cur = instance.current
    if cur is None or cur.num_workers != instance.num_workers:
        return
    if check_semantic(cur, instance, new_cycle_time, options.require_nonempty_workers):
        return
    search.offer(cur)
    logger.debug("warm start from current configuration, objective %.6f", search.incumbent_value)

def _result(search, instance, new_cycle_time, options, report_fn):
    res = SolveResult(INFEASIBLE, nodes_explored=search.nodes, elapsed=search.elapsed,
                      cycle_time=new_cycle_time, num_workers=instance.num_workers)
    if search.incumbent is None:
        if search.stopped:
            res.status = NO_SOLUTION_TIMEOUT
            res.lower_bound = min(search.pruned_bound, search.open_bound)
        else:
            res.lower_bound = math.inf
            res.diagnosis = diagnose(instance, new_cycle_time, options)
        logger.info("%s after %d nodes", res.status, res.nodes_explored)
        return res

    violations = check_semantic(search.incumbent, instance, new_cycle_time, options.require_nonempty_workers)
    assert not violations, str(violations)

    res.incumbent = search.incumbent
    res.objective = search.objective.value(components(instance, search.incumbent))
    lb = min(res.objective, search.pruned_bound, search.open_bound)
    if search.stopped:
        res.status = FEASIBLE_TIMEOUT
    elif options.gap_target == 0.0 or res.objective - lb <= constants.gap_eps:
        # pruning within tolerance of the incumbent proves it optimal
        res.status = OPTIMAL
        lb = res.objective
    else:
        res.status = FEASIBLE_GAP_MET
    res.lower_bound = lb
    res.gap = 0.0 if res.status == OPTIMAL else _gap(res.objective, lb)
    res.report = report_fn(res.incumbent)
    logger.info("%s objective=%.6f bound=%.6f gap=%.4f nodes=%d elapsed=%.2fs",
                res.status, res.objective, res.lower_bound, res.gap, res.nodes_explored, res.elapsed)
    return res

def solve(instance, new_cycle_time, bounds, options=SolveOptions()):
    """Minimize the weighted normalized objective at `new_cycle_time`.

    Infeasibility and a time limit without incumbent are reported through
    the result status; call raise_for_status() to turn them into errors.
    Without a current configuration the similarity component is 0.
    """
    objective = _Objective(bounds, options.weights)
    search = _Search(instance, new_cycle_time, options, objective)
    _warm_start(search, instance, new_cycle_time, options)
    search.run()
    return _result(search, instance, new_cycle_time, options,
                   lambda c: objective_report(instance, c, bounds=bounds, weights=options.weights))

def solve_single_objective(instance, new_cycle_time, which, options=SolveOptions()):
    """Minimize one raw component. Returns (min_value, components of the
    configuration attaining it)."""
    if which not in constants.components:
        raise OptionError(msg="unknown objective component %r" % (which,))
    objective = _Objective(which=constants.components.index(which))
    search = _Search(instance, new_cycle_time, options, objective)
    _warm_start(search, instance, new_cycle_time, options)
    search.run()
    res = _result(search, instance, new_cycle_time, options, lambda c: objective_report(instance, c))
    res.raise_for_status()
    if res.status == FEASIBLE_TIMEOUT:
        logger.warning("%s: time limit reached, using the best configuration found", which)
    return res.objective, components(instance, res.incumbent)

def compute_normalization(instance, new_cycle_time, options=SolveOptions()):
    """Utopia and nadir points from three single-objective runs: per
    component, the best and worst value over the three optima."""
    rows = []
    for which in constants.components:
        _, comps = solve_single_objective(instance, new_cycle_time, which, options)
        logger.debug("single objective %s: components %r", which, comps)
        rows.append(comps)
    utopia = tuple(min(r[k] for r in rows) for k in range(3))
    nadir = tuple(max(r[k] for r in rows) for k in range(3))
    return NormalizationBounds(utopia, nadir)

def evaluate(instance, proposed, new_cycle_time, bounds, weights=constants.equal_weights, require_nonempty_workers=False):
    # objective of a configuration; it must be feasible at new_cycle_time
    violations = check_semantic(proposed, instance, new_cycle_time, require_nonempty_workers)
    if violations:
        raise ValidationError([str(v) for v in violations])
    return weighted_objective(components(instance, proposed), bounds, weights)

def _oracle_configurations(instance, new_cycle_time):
    # every feasible configuration with each worker's station fixed first;
    # partial assignments are cut only on a violated cycle time or precedence
    S, W, T = instance.num_stations, instance.num_workers, instance.num_tasks
    lo, hi = worker_bounds(W, S)
    times = instance.times
    preds = [instance.precedence.predecessors(i) for i in range(1, T+1)]
    for ws in itertools.product(range(0, S+1), repeat=W):
        counts = [ws.count(s) for s in range(1, S+1)]
        if not all(lo <= c <= hi for c in counts):
            continue
        assigned = [w+1 for w, s in enumerate(ws) if s != UNASSIGNED]
        loads = [0] * (W+1)
        tw = [0] * T

        def assign(k):
            if k == T:
                yield Configuration(tuple(ws[w-1] for w in tw), tuple(tw), ws)
                return
            for w in assigned:
                if loads[w] + times[k] > new_cycle_time:
                    continue
                s = ws[w-1]
                if any(p-1 < k and ws[tw[p-1]-1] > s for p in preds[k]):
                    continue
                if any(k+1 in preds[j] and ws[tw[j]-1] < s for j in range(k)):
                    continue
                tw[k] = w
                loads[w] += times[k]
                yield from assign(k+1)
                loads[w] -= times[k]
            tw[k] = 0

        yield from assign(0)

def enumerate_optimal(instance, new_cycle_time, bounds, weights=constants.equal_weights,
                      require_nonempty_workers=False, guard=constants.optimal_guard):
    """Exhaustive optimum over every feasible configuration."""
    check_guard(instance, guard)
    start = time.monotonic()
    best = None
    best_value = math.inf
    seen = 0
    for config in _oracle_configurations(instance, new_cycle_time):
        seen += 1
        if check_semantic(config, instance, new_cycle_time, require_nonempty_workers):
            continue
        value = weighted_objective(components(instance, config), bounds, weights)
        if value < best_value:
            best, best_value = config, value

    res = SolveResult(INFEASIBLE, nodes_explored=seen, elapsed=time.monotonic() - start,
                      cycle_time=new_cycle_time, num_workers=instance.num_workers)
    if best is None:
        res.lower_bound = math.inf
        return res
    res.status = OPTIMAL
    res.incumbent = best
    res.objective = res.lower_bound = best_value
    res.gap = 0.0
    res.report = objective_report(instance, best, bounds=bounds, weights=weights)
    return res

def _feasible(instance, new_cycle_time, options, relax=()):
    search = _Search(instance, new_cycle_time, options, relax=relax).run()
    if search.timed_out:
        raise NoSolutionError(msg="feasibility undecided at %d workers after %.1fs" % (
            instance.num_workers, search.elapsed))
    return search.incumbent

def diagnose(instance, new_cycle_time, options=SolveOptions()):
    # name the constraint family that blocks every configuration
    longest = max(instance.tasks, key=lambda t: t.processing_time)
    if longest.processing_time > new_cycle_time:
        return "cycle-time: task %d takes %d > %d" % (longest.id, longest.processing_time, new_cycle_time)
    if instance.total_time() > instance.num_workers * new_cycle_time:
        return "cycle-time: total work %d exceeds %d workers x %d" % (
            instance.total_time(), instance.num_workers, new_cycle_time)
    if options.require_nonempty_workers and instance.num_tasks < instance.num_workers:
        return "nonempty-worker: %d tasks for %d workers" % (instance.num_tasks, instance.num_workers)
    try:
        if _feasible(instance, new_cycle_time, options, relax={"work-area"}) is not None:
            return "work-area: every balanced configuration mixes areas in a shared station"
        if _feasible(instance, new_cycle_time, options, relax={"work-area", "precedence"}) is not None:
            return "precedence: station order cannot follow the precedence relation"
    except NoSolutionError:
        return "undetermined: diagnosis ran out of time"
    return "staffing: %d workers cannot be spread over %d stations within the cycle time" % (
        instance.num_workers, instance.num_stations)

def find_min_workers(instance, new_cycle_time, options=SolveOptions()):
    """Smallest worker count admitting a feasible configuration, searched
    upward from max(|S|, ceil(sum(tau)/CT))."""
    if instance.num_tasks == 0:
        raise OptionError(msg="worker sizing needs at least one task")
    S = instance.num_stations
    first = max(S, -(-instance.total_time() // new_cycle_time))
    last = max(instance.num_tasks, S)
    longest = max(instance.times)
    if longest <= new_cycle_time:
        for w in range(first, last+1):
            candidate = instance.with_workers(w)
            if _feasible(candidate, new_cycle_time, options) is not None:
                logger.debug("cycle time %d: %d workers suffice", new_cycle_time, w)
                return w
    diagnosis = diagnose(instance.with_workers(last), new_cycle_time, options)
    raise InfeasibleError(msg="no worker count in %d..%d is feasible at cycle time %d: %s" % (
        first, last, new_cycle_time, diagnosis), diagnosis=diagnosis)
