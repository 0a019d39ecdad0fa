#!/usr/bin/env python3

import sys

__all__ = [ "RebalanceError",
            "ParseError",
            "ValidationError",
            "CycleError",
            "GuardError",
            "InfeasibleError",
            "NoSolutionError",
            "OptionError",

            "EXIT_OK",
            "EXIT_INFEASIBLE",
            "EXIT_INVALID_INPUT",
            "EXIT_NO_SOLUTION",

            "warning_message",
            "error_message",
          ]

# process exit codes of the command line tool
EXIT_OK = 0
EXIT_INFEASIBLE = 1
EXIT_INVALID_INPUT = 2
EXIT_NO_SOLUTION = 3

class RebalanceError(Exception):
    # base class of all pyrebal exceptions
    description = "(No description!)" # useful description of the error
    default_msg = "(no message)"
    exit_code = EXIT_INVALID_INPUT

    def __init__(self, *args, **kwargs):
        super().__init__(*args)
        self.msg = kwargs.get("msg") or (args[0] if args else None) or self.default_msg
        self.source = kwargs.get("source", "(unknown)")

    def __str__(self):
        return "*** source=\"{0}\": {1}".format(self.source, self.msg)

class ParseError(RebalanceError):
    description = """\"Parse Error\"
The document could not be read as an instance or solution document. Either it
is not well formed structured text or a required key is missing or has the
wrong type.
"""
    default_msg = "malformed document"

class ValidationError(ParseError):
    description = """\"Validation Error\"
The document parsed but describes an impossible instance or configuration.
Every violated invariant is listed: processing times must be >= 1, ergonomic
indices in 1..5, areas 0 or 1, ids dense and 1-based, the precedence relation
acyclic, and num_workers >= num_stations.
"""
    default_msg = "invalid instance"

    def __init__(self, problems, **kwargs):
        self.problems = list(problems)
        kwargs.setdefault("msg", "; ".join(self.problems) or self.default_msg)
        super().__init__(**kwargs)

class CycleError(ValidationError):
    description = """\"Cyclic Precedence\"
The precedence relation contains a cycle so no task order can respect it.
The error carries one offending cycle.
"""
    default_msg = "cyclic precedence"

    def __init__(self, cycle, **kwargs):
        self.cycle = list(cycle)
        loop = self.cycle + self.cycle[:1]
        msg = "cyclic precedence " + " -> ".join(str(t) for t in loop)
        super().__init__([msg], **kwargs)

class GuardError(RebalanceError):
    description = """\"Size Guard Exceeded\"
Exhaustive enumeration is only offered for very small instances. Use the
branch-and-bound solver for anything larger.
"""
    default_msg = "instance too large for exhaustive enumeration"

class InfeasibleError(RebalanceError):
    description = """\"Infeasible\"
No configuration satisfies the constraint set at the requested cycle time and
worker count. The diagnosis names the constraint family that blocked the
search (cycle time, staffing, work area or precedence).
"""
    default_msg = "infeasible"
    exit_code = EXIT_INFEASIBLE

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.diagnosis = kwargs.get("diagnosis")

class NoSolutionError(RebalanceError):
    description = """\"No Solution Before Time Limit\"
The solver ran out of time before it found any feasible configuration.
Feasibility is still undecided; raise --time-limit.
"""
    default_msg = "time limit reached without an incumbent"
    exit_code = EXIT_NO_SOLUTION

class OptionError(RebalanceError):
    description = """\"Invalid Option\"
A command line value or solver option is out of range. Weights must be three
nonnegative numbers summing to 1, time limits positive, gaps within [0,1].
"""
    default_msg = "invalid option"

def warning_message(source, msg):
    if source:
        print("%s warning: %s" % (source, msg), file=sys.stderr)
    else:
        print("(source unknown): %s" % (msg,), file=sys.stderr)

def error_message(source, msg):
    print("%s: *** %s" % (source, msg), file=sys.stderr)
