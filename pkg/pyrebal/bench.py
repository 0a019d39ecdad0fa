#!/usr/bin/env python3

# Experiment orchestration: end-to-end rebalancing of baselined instances,
# suite runs over a manifest and the aggregated CSV tables.

import os
import json
import math
import logging
import multiprocessing
from dataclasses import dataclass, replace, asdict
from typing import Optional, Tuple

import pandas as pd

logger = logging.getLogger("pyrebal.bench")

from pyrebal.error import *
import pyrebal.constants as constants
from pyrebal.domain import load_instance, load_solution, dump_solution
from pyrebal.encoding import check_semantic, check_linearized, derive_aux
from pyrebal.metrics import objective_report
from pyrebal.solver import SolveOptions, solve, compute_normalization, find_min_workers
from pyrebal.source import SourceFile

__all__ = [ "BenchmarkRecord",
            "SuiteOptions",

            "run_rebalance",
            "run_suite",
            "load_manifest",
            "fairness_table",
            "robustness_table",
            "cactus_table",
            "cross_check",
          ]

_METRICS = ("msf", "wl_nr", "wl_cv", "el_nr", "el_cv")

@dataclass
class BenchmarkRecord:
    instance_id: str
    scenario: str
    size: int = 0
    encoding_checked: Optional[str] = None
    solve_time: float = math.nan
    status: str = "Error"
    msf: float = math.nan
    wl_nr: float = math.nan
    wl_cv: float = math.nan
    el_nr: float = math.nan
    el_cv: float = math.nan
    workers_used: int = 0
    nodes: int = 0
    # fairness of the baseline configuration itself
    start_wl_nr: float = math.nan
    start_wl_cv: float = math.nan
    start_el_nr: float = math.nan
    start_el_cv: float = math.nan
    reused: bool = False
    error: Optional[str] = None

    @property
    def solved(self):
        return not math.isnan(self.msf)

    def as_dict(self):
        return asdict(self)

@dataclass(frozen=True)
class SuiteOptions:
    sizes: Tuple[int, ...] = constants.default_suite_sizes
    seeds: int = constants.default_suite_seeds
    time_limit: float = constants.default_suite_time_limit
    parallelism: int = 1
    output_directory: str = "results"
    scenarios: Tuple[str, ...] = constants.scenarios
    weights: Tuple[float, float, float] = constants.equal_weights
    random_seed: int = 0

    def __post_init__(self):
        if self.parallelism < 1:
            raise OptionError(msg="parallelism must be >= 1, got %r" % (self.parallelism,))
        if self.seeds < 1:
            raise OptionError(msg="seeds per size must be >= 1, got %r" % (self.seeds,))
        for s in self.scenarios:
            if s not in constants.scenarios:
                raise OptionError(msg="unknown scenario %r" % (s,))

    def solve_options(self):
        return SolveOptions(weights=self.weights, time_limit=self.time_limit, random_seed=self.random_seed)

def run_rebalance(instance, options=SolveOptions(), target_cycle_time=None):
    """Size the workforce at the target cycle time, calibrate the
    normalization and solve. Returns (SolveResult, ObjectiveReport)."""
    if instance.current is None:
        raise OptionError(msg="rebalancing needs a current configuration")
    ct = target_cycle_time if target_cycle_time is not None else instance.cycle_time
    w = find_min_workers(instance, ct, replace(options, gap_target=0.0))
    target = instance.with_workers(w).with_cycle_time(ct)
    bounds = compute_normalization(target, ct, replace(options, gap_target=0.0))
    logger.debug("normalization %r", bounds.as_dict())
    res = solve(target, ct, bounds, options).raise_for_status()
    report = objective_report(target, res.incumbent, bounds=bounds, weights=options.weights)
    return res, report

def cross_check(instance, config, new_cycle_time):
    # the encoding(s) under which the configuration checked feasible
    if check_semantic(config, instance, new_cycle_time):
        return None
    aux = derive_aux(config, instance, new_cycle_time)
    if check_linearized(config, aux, instance, new_cycle_time):
        return constants.SEMANTIC
    return constants.BOTH

def load_manifest(path):
    """Manifest entries with their instance files resolved against the
    manifest's directory."""
    with open(path, "rb") as f:
        text = f.read().decode("utf8")
    try:
        doc = json.loads(text)
    except ValueError as err:
        raise ParseError(msg="malformed manifest: %s" % err, source=path)
    if not isinstance(doc, dict) or not isinstance(doc.get("instances"), list):
        raise ParseError(msg="manifest needs an \"instances\" list", source=path)
    base = os.path.dirname(os.path.abspath(path))
    entries = []
    for n, e in enumerate(doc["instances"]):
        for key in ("id", "file", "size", "scenario"):
            if not isinstance(e, dict) or key not in e:
                raise ParseError(msg="instances[%d]: missing key \"%s\"" % (n, key), source=path)
        entries.append(dict(e, path=os.path.join(base, e["file"])))
    return entries

def _fill_metrics(record, report):
    record.msf = report.msf if report.msf is not None else math.nan
    for k in ("wl_nr", "wl_cv", "el_nr", "el_cv"):
        v = getattr(report, k)
        setattr(record, k, v if v is not None else math.nan)

def _start_metrics(record, instance):
    base = instance.baseline_instance().without_current()
    report = objective_report(base, instance.current)
    for k in ("wl_nr", "wl_cv", "el_nr", "el_cv"):
        v = getattr(report, k)
        setattr(record, "start_" + k, v if v is not None else math.nan)

def _reuse(path, instance, record):
    # a previous run's solution file, if it still checks feasible
    if not os.path.exists(path):
        return False
    try:
        config, doc = load_solution(SourceFile(path), instance)
    except RebalanceError as err:
        logger.info("%s: ignoring stale solution file: %s", path, err.msg)
        return False
    target = instance.with_workers(config.num_workers)
    if check_semantic(config, target, instance.cycle_time):
        return False
    result = doc.get("result") or {}
    record.status = result.get("status", "Optimal")
    record.solve_time = result.get("elapsed", math.nan)
    record.nodes = result.get("nodes", 0)
    record.workers_used = len(config.assigned_workers())
    record.encoding_checked = cross_check(target, config, instance.cycle_time)
    # metrics are recomputed from the configuration, never read back
    _fill_metrics(record, objective_report(target, config))
    record.reused = True
    return True

def _run_entry(job):
    entry, suite = job
    record = BenchmarkRecord(entry["id"], entry["scenario"], size=entry["size"])
    out = os.path.join(suite.output_directory, "%s.%s.solution.json" % (entry["id"], entry["scenario"]))
    try:
        instance = load_instance(SourceFile(entry["path"]))
        _start_metrics(record, instance)
        if _reuse(out, instance, record):
            logger.info("%s/%s: reusing %s", entry["id"], entry["scenario"], out)
            return record
        res, report = run_rebalance(instance, suite.solve_options())
        record.status = res.status
        record.solve_time = res.elapsed
        record.nodes = res.nodes_explored
        record.workers_used = len(res.incumbent.assigned_workers())
        record.encoding_checked = cross_check(instance.with_workers(res.num_workers), res.incumbent, res.cycle_time)
        _fill_metrics(record, report)
        with open(out, "w") as f:
            f.write(dump_solution(res.incumbent, report, res))
    except RebalanceError as err:
        logger.warning("%s/%s: %s", entry["id"], entry["scenario"], err.msg)
        record.status = type(err).__name__
        record.error = err.msg
    return record

def _frame(records):
    cols = [f.name for f in BenchmarkRecord.__dataclass_fields__.values()]
    return pd.DataFrame([r.as_dict() for r in records], columns=cols)

def fairness_table(records):
    """Mean similarity and fairness by problem size over the rebalanced
    optimal-start runs (or every run when the suite has none)."""
    df = _frame(records)
    df = df[df.msf.notna()]
    if (df.scenario == constants.OPTIMAL_START).any():
        df = df[df.scenario == constants.OPTIMAL_START]
    cols = ["size", "instances"] + list(_METRICS)
    if df.empty:
        return pd.DataFrame(columns=cols)
    grouped = df.groupby("size")
    table = grouped[list(_METRICS)].mean()
    table.insert(0, "instances", grouped.size())
    return table.reset_index()[cols]

def robustness_table(records):
    """One row per start and per rebalancing, by scenario: the baselines'
    own fairness next to the fairness and similarity after rebalancing."""
    df = _frame(records)
    df = df[df.msf.notna()]
    cols = ["row", "instances"] + list(_METRICS)
    labels = {
        constants.OPTIMAL_START: ("Optimal Start", "Rebalancing Opt"),
        constants.SUBOPTIMAL_START: ("Suboptimal Start", "Rebalancing Subopt"),
    }
    rows = []
    for scenario in constants.scenarios:
        sub = df[df.scenario == scenario]
        if sub.empty:
            continue
        start, rebalanced = labels[scenario]
        rows.append(dict(row=start, instances=len(sub), msf=math.nan,
                         **{k: sub["start_" + k].mean() for k in _METRICS[1:]}))
        rows.append(dict(row=rebalanced, instances=len(sub),
                         **{k: sub[k].mean() for k in _METRICS}))
    return pd.DataFrame(rows, columns=cols)

def cactus_table(records):
    # solved runs ranked by solve time
    df = _frame(records)
    df = df[df.msf.notna()].sort_values(by=["solve_time", "instance_id", "scenario"], kind="mergesort")
    df = df.reset_index(drop=True)
    df.insert(0, "rank", range(1, len(df)+1))
    return df[["rank", "solve_time", "encoding_checked", "status", "instance_id", "scenario"]].rename(
        columns={"encoding_checked": "encoding"})

def run_suite(manifest, suite=SuiteOptions()):
    """Rebalance every manifest entry, one solver per process, and write
    records.csv, cactus.csv, fairness.csv and robustness.csv to the output
    directory. `manifest` is a path or a list of loaded entries."""
    entries = load_manifest(manifest) if isinstance(manifest, str) else list(manifest)
    os.makedirs(suite.output_directory, exist_ok=True)
    entries = [e for e in entries if e["scenario"] in suite.scenarios]
    jobs = [(e, suite) for e in entries]
    logger.info("running %d jobs with parallelism %d", len(jobs), suite.parallelism)

    if suite.parallelism > 1 and len(jobs) > 1:
        with multiprocessing.Pool(suite.parallelism) as pool:
            records = pool.map(_run_entry, jobs)
    else:
        records = [_run_entry(job) for job in jobs]

    paths = {}
    tables = {
        "records": _frame(records),
        "cactus": cactus_table(records),
        "fairness": fairness_table(records),
        "robustness": robustness_table(records),
    }
    for name, table in tables.items():
        paths[name] = os.path.join(suite.output_directory, name + ".csv")
        table.to_csv(paths[name], index=False)
    failed = sum(1 for r in records if not r.solved)
    logger.info("suite done: %d records, %d without a configuration", len(records), failed)
    return records, paths
