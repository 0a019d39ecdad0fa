#!/usr/bin/env python3
# -*- coding: utf-8 -*-

# Command line front end: generate, solve, check, metrics, bench.

import sys
import json
import dataclasses
import logging

import getopt

logger = logging.getLogger("pyrebal")

# require Python 3.x for best Unicode handling
if sys.version_info.major < 3:
    raise Exception("Requires Python 3.x")

from pyrebal.version import Version
from pyrebal.error import *
import pyrebal.constants as constants
from pyrebal.source import open_source
from pyrebal.domain import load_instance, load_solution, dump_solution
from pyrebal.encoding import check_semantic, check_linearized_any
from pyrebal.metrics import objective_report
from pyrebal.solver import SolveOptions, solve, compute_normalization, find_min_workers
from pyrebal.generator import GeneratorParams, write_suite
from pyrebal.bench import SuiteOptions, run_suite
from pyrebal.optgrammar import parse_weights, parse_interval, parse_int_set, parse_int_list

commands = ("generate", "solve", "check", "metrics", "bench")

def usage():
    print("""usage: pyrebal [options] COMMAND [arguments]

commands:
  generate -o DIR                 write synthetic instances and manifest.json
  solve INSTANCE [-o SOLUTION]    rebalance at --cycle-time
  check INSTANCE SOLUTION         list constraint violations (--encoding)
  metrics INSTANCE SOLUTION       objective components and fairness
  bench MANIFEST -o DIR           run a suite, write CSV tables

options:
  -h, --help                      this text
  -v, --version                   print version
  -d, --debug                     debug logging
  -q, --quiet                     warnings and errors only
  --explain                       long description of errors
  -o, --output PATH               output file (solve) or directory
  --cycle-time N                  cycle time to rebalance at
  --weights A,B,C                 weights of -MSF, delta l, delta h (a/b allowed)
  --time-limit SECONDS            per solve
  --gap G                         stop at relative gap G
  --log-interval SECONDS          solve: seconds between progress lines
  --seed N                        tie-breaking seed
  --nonempty-workers              every worker must hold a task
  --min-workers                   size the workforce before solving
  --encoding semantic|linearized|both
  --sizes LIST                    generate: task counts, e.g. 8,10-14
  --seeds N                       generate: seeds per size
  --stations N                    generate: station count
  --time-range LO-HI              generate: task times
  --ergo-range LO-HI              generate: ergonomic indices
  --internal-probability P        generate: share of internal tasks
  --max-preds N                   generate: predecessors per task
  --baseline-cycle-times SET      generate: e.g. 17-19,21-23
  --scenarios LIST                optimal_start,suboptimal_start
  -j, --parallel N                bench: concurrent solves

exit status: 0 ok, 1 infeasible, 2 invalid input, 3 no solution in time""")

class Args:
    def __init__(self):
        self.debug = 0
        self.quiet = False
        self.detailed_error_explain = False
        self.command = None
        self.argslist = []
        self.output = None
        self.cycle_time = None
        self.weights = constants.equal_weights
        self.time_limit = constants.default_suite_time_limit
        self.gap = 0.0
        self.log_interval = SolveOptions.log_interval
        self.seed = 0
        self.nonempty_workers = False
        self.min_workers = False
        self.encoding = constants.BOTH
        self.sizes = constants.default_suite_sizes
        self.seeds = constants.default_suite_seeds
        self.stations = None
        self.time_range = constants.default_time_range
        self.ergo_range = constants.default_ergo_range
        self.internal_probability = constants.default_internal_probability
        self.max_preds = constants.default_max_predecessors
        self.baseline_cycle_times = constants.default_baseline_cycle_times
        self.scenarios = constants.scenarios
        self.parallel = 1

    def solve_options(self):
        return SolveOptions(weights=self.weights, time_limit=self.time_limit, gap_target=self.gap,
                            require_nonempty_workers=self.nonempty_workers, random_seed=self.seed,
                            log_interval=self.log_interval)

def _number(opt, value, kind=int):
    try:
        return kind(value)
    except ValueError:
        raise OptionError(msg="%s: bad value %r" % (opt, value))

def parse_args(argv):
    print_version = """pyrebal %s""" % (Version.vstring(),)

    args = Args()
    try:
        optlist, arglist = getopt.gnu_getopt(argv, "hvdqo:j:",
                            ["help", "version", "debug", "quiet", "explain", "output=",
                             "cycle-time=", "weights=", "time-limit=", "gap=", "log-interval=", "seed=",
                             "nonempty-workers", "min-workers", "encoding=",
                             "sizes=", "seeds=", "stations=", "time-range=", "ergo-range=",
                             "internal-probability=", "max-preds=", "baseline-cycle-times=",
                             "scenarios=", "parallel="])
    except getopt.GetoptError as err:
        raise OptionError(msg=str(err))

    for opt, value in optlist:
        if opt in ("-h", "--help"):
            usage()
            sys.exit(EXIT_OK)
        elif opt in ("-v", "--version"):
            print(print_version)
            sys.exit(EXIT_OK)
        elif opt in ("-d", "--debug"):
            args.debug += 1
        elif opt in ("-q", "--quiet"):
            args.quiet = True
        elif opt == "--explain":
            args.detailed_error_explain = True
        elif opt in ("-o", "--output"):
            args.output = value
        elif opt == "--cycle-time":
            args.cycle_time = _number(opt, value)
        elif opt == "--weights":
            args.weights = parse_weights(value)
        elif opt == "--time-limit":
            args.time_limit = _number(opt, value, float)
        elif opt == "--gap":
            args.gap = _number(opt, value, float)
        elif opt == "--log-interval":
            args.log_interval = _number(opt, value, float)
        elif opt == "--seed":
            args.seed = _number(opt, value)
        elif opt == "--nonempty-workers":
            args.nonempty_workers = True
        elif opt == "--min-workers":
            args.min_workers = True
        elif opt == "--encoding":
            if value not in constants.encodings + (constants.BOTH,):
                raise OptionError(msg="--encoding: expected semantic, linearized or both, got %r" % value)
            args.encoding = value
        elif opt == "--sizes":
            args.sizes = parse_int_list(value)
        elif opt == "--seeds":
            args.seeds = _number(opt, value)
        elif opt == "--stations":
            args.stations = _number(opt, value)
        elif opt == "--time-range":
            args.time_range = parse_interval(value)
        elif opt == "--ergo-range":
            args.ergo_range = parse_interval(value)
        elif opt == "--internal-probability":
            args.internal_probability = _number(opt, value, float)
        elif opt == "--max-preds":
            args.max_preds = _number(opt, value)
        elif opt == "--baseline-cycle-times":
            args.baseline_cycle_times = parse_int_set(value)
        elif opt == "--scenarios":
            args.scenarios = tuple(s.strip() for s in value.split(",") if s.strip())
        elif opt in ("-j", "--parallel"):
            args.parallel = _number(opt, value)
        else:
            # wtf?
            assert 0, opt

    if not arglist:
        raise OptionError(msg="missing command; one of %s" % ", ".join(commands))
    args.command = arglist[0]
    if args.command not in commands:
        raise OptionError(msg="unknown command %r; one of %s" % (args.command, ", ".join(commands)))
    args.argslist = arglist[1:]
    return args

def _need(args, n, names):
    if len(args.argslist) != n:
        raise OptionError(msg="%s expects %s" % (args.command, " ".join(names)))
    return args.argslist

def _write(path, text):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as outfile:
            outfile.write(text)

def cmd_generate(args):
    if not args.output:
        raise OptionError(msg="generate needs -o DIR")
    params = [GeneratorParams(num_tasks=n, seed=seed,
                              time_range=args.time_range, ergo_range=args.ergo_range,
                              internal_probability=args.internal_probability,
                              max_predecessors=args.max_preds,
                              target_cycle_time=args.cycle_time or constants.default_target_cycle_time,
                              baseline_cycle_times=args.baseline_cycle_times,
                              num_stations=args.stations)
              for n in args.sizes for seed in range(1, args.seeds+1)]
    manifest = write_suite(params, args.output, args.solve_options(), args.scenarios)
    print("%d instance files, %d discarded" % (len(manifest["instances"]), len(manifest["discarded"])))
    return EXIT_OK

def cmd_solve(args):
    (infilename,) = _need(args, 1, ["INSTANCE"])
    instance = load_instance(open_source(infilename))
    ct = args.cycle_time or instance.cycle_time
    options = args.solve_options()
    if args.min_workers:
        instance = instance.with_workers(find_min_workers(instance, ct, options))
    instance = instance.with_cycle_time(ct)
    bounds = compute_normalization(instance, ct, options)
    res = solve(instance, ct, bounds, options)
    _write(args.output, dump_solution(res.incumbent, res.report, res))
    res.raise_for_status()
    return EXIT_OK

def _load_pair(args):
    infilename, solfilename = _need(args, 2, ["INSTANCE", "SOLUTION"])
    instance = load_instance(open_source(infilename))
    config, doc = load_solution(open_source(solfilename), instance, strict=False)
    ct = args.cycle_time or instance.cycle_time
    return instance.with_workers(config.num_workers).with_cycle_time(ct), config, ct, doc

def cmd_check(args):
    instance, config, ct, _ = _load_pair(args)
    reports = []
    if args.encoding in (constants.SEMANTIC, constants.BOTH):
        reports.append(check_semantic(config, instance, ct, args.nonempty_workers))
    if args.encoding in (constants.LINEARIZED, constants.BOTH):
        reports.append(check_linearized_any(config, instance, ct, args.nonempty_workers))
    print(json.dumps([r.as_dict() for r in reports], indent=1))
    for r in reports:
        for v in r:
            logger.info("%s: %s", r.encoding, v)
    return EXIT_OK if all(r.feasible for r in reports) else EXIT_INFEASIBLE

def cmd_metrics(args):
    instance, config, ct, doc = _load_pair(args)
    errs = config.problems(instance.num_tasks, instance.num_stations)
    if errs:
        raise ValidationError(errs)
    try:
        bounds = compute_normalization(instance, ct, args.solve_options())
    except (InfeasibleError, NoSolutionError) as err:
        logger.warning("no normalization bounds at cycle time %d: %s", ct, err.msg)
        bounds = None
    report = objective_report(instance, config, bounds=bounds, weights=args.weights)
    if bounds is None and isinstance(doc.get("report"), dict):
        # keep what the solver recorded
        report = dataclasses.replace(report, weighted_normalized=doc["report"].get("weighted_normalized"))
    print(json.dumps(report.as_dict(), sort_keys=True, indent=1))
    return EXIT_OK

def cmd_bench(args):
    (manifest,) = _need(args, 1, ["MANIFEST"])
    suite = SuiteOptions(time_limit=args.time_limit, parallelism=args.parallel,
                         output_directory=args.output or "results", scenarios=args.scenarios,
                         weights=args.weights, random_seed=args.seed)
    records, paths = run_suite(manifest, suite)
    for name, path in sorted(paths.items()):
        print("%s: %s" % (name, path))
    return EXIT_OK

def main(argv=None):
    if argv is None:
        argv = sys.argv[1:]

    explain = "--explain" in argv
    try:
        args = parse_args(argv)
    except RebalanceError as err:
        error_message("pyrebal", err.msg)
        if explain:
            print("%s" % err.description, file=sys.stderr)
        return err.exit_code

    if args.debug:
        logging.basicConfig(level=logging.DEBUG)
    elif args.quiet:
        logging.basicConfig(level=logging.WARNING)
    else:
        logging.basicConfig(level=logging.INFO)

    handler = globals()["cmd_" + args.command]
    try:
        return handler(args)
    except RebalanceError as err:
        print("%s" % err, file=sys.stderr)
        if args.detailed_error_explain:
            print("%s" % err.description, file=sys.stderr)
        return err.exit_code
    except OSError as err:
        error_message("pyrebal", str(err))
        return EXIT_INVALID_INPUT

def run():
    sys.exit(main())

if __name__=='__main__':
    run()
