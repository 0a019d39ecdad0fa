#!/usr/bin/env python3

import heapq
import logging

logger = logging.getLogger("pyrebal.precedence")

from pyrebal.error import *

__all__ = [ "PrecedenceGraph", "topological_order" ]

class PrecedenceGraph:
    # Immediate predecessors of each task (pi_i). Task ids are dense and
    # 1-based. Tasks without predecessors may be left out of the map.
    def __init__(self, num_tasks, predecessors=None):
        self.num_tasks = num_tasks
        preds = {}
        for task, pred_list in (predecessors or {}).items():
            preds[task] = frozenset(pred_list)
        self._preds = preds

    @property
    def tasks(self):
        return range(1, self.num_tasks+1)

    def predecessors(self, task):
        return self._preds.get(task, frozenset())

    def successors(self):
        # task -> set of immediate successors
        succ = {t: set() for t in self.tasks}
        for task, pred_set in self._preds.items():
            for p in pred_set:
                succ.setdefault(p, set()).add(task)
        return succ

    def edges(self):
        for task in sorted(self._preds):
            for p in sorted(self._preds[task]):
                yield (p, task)

    def problems(self):
        # every id the relation mentions must name an existing task
        errs = []
        for task, pred_set in sorted(self._preds.items()):
            if task not in self.tasks:
                errs.append("precedence: unknown task %r" % (task,))
            for p in sorted(pred_set, key=repr):
                if p not in self.tasks:
                    errs.append("precedence: task %r lists unknown predecessor %r" % (task, p))
                elif p == task:
                    errs.append("precedence: task %r lists itself as predecessor" % (task,))
        return errs

    def walk_ancestors(self, task, seen=None):
        # generator of all transitive predecessors of a task, deepest first
        if seen is None:
            seen = set()
        for p in sorted(self.predecessors(task)):
            if p in seen:
                continue
            seen.add(p)
            yield from self.walk_ancestors(p, seen)
            yield p

    def __eq__(self, other):
        if not isinstance(other, PrecedenceGraph):
            return NotImplemented
        strip = lambda d: {k: v for k, v in d.items() if v}
        return self.num_tasks == other.num_tasks and strip(self._preds) == strip(other._preds)

    def __hash__(self):
        return hash((self.num_tasks, tuple(self.edges())))

    def __str__(self):
        return ",".join("%d->%d" % e for e in self.edges())

    def graph(self, graphname):
        # Graphviz dot text of the DAG; handy when a generated instance
        # refuses to balance.
        lines = ["digraph %s {" % graphname]
        for t in self.tasks:
            lines.append("\t\"%d\"" % t)
        for p, t in self.edges():
            lines.append("\t\"%d\" -> \"%d\"" % (p, t))
        lines.append("}")
        return "\n".join(lines) + "\n"

def _find_cycle(graph, remaining):
    # follow predecessor edges inside the unsorted remainder until a task
    # repeats; every task there still has an unsorted predecessor
    start = min(remaining)
    path = []
    on_path = {}
    task = start
    while task not in on_path:
        on_path[task] = len(path)
        path.append(task)
        task = min(p for p in graph.predecessors(task) if p in remaining)
    cycle = path[on_path[task]:]
    # report in precedence direction (predecessor first)
    cycle.reverse()
    return cycle

def topological_order(graph):
    """Kahn's algorithm, ties broken by ascending task id.

    >>> topological_order(PrecedenceGraph(3, {3: {1, 2}, 2: {1}}))
    [1, 2, 3]
    """
    indegree = {t: 0 for t in graph.tasks}
    succ = graph.successors()
    for t in graph.tasks:
        indegree[t] = len([p for p in graph.predecessors(t) if p in indegree])

    ready = [t for t, n in indegree.items() if n == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        t = heapq.heappop(ready)
        order.append(t)
        for s in succ.get(t, ()):
            indegree[s] -= 1
            if indegree[s] == 0:
                heapq.heappush(ready, s)

    if len(order) != graph.num_tasks:
        remaining = set(graph.tasks) - set(order)
        cycle = _find_cycle(graph, remaining)
        logger.debug("cycle found %r", cycle)
        raise CycleError(cycle)

    return order
