#!/usr/bin/env python3

# Value syntax of command line options: weight triples (decimals or
# fractions), integer intervals and integer sets.

import pyparsing as pp

from pyrebal.error import *

__all__ = [ "parse_weights",
            "parse_interval",
            "parse_int_set",
            "parse_int_list",
          ]

_integer = pp.Word(pp.nums).set_parse_action(lambda t: int(t[0]))
_real = pp.Regex(r"[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?").set_parse_action(lambda t: float(t[0]))

def _divide(t):
    if t[1] == 0:
        raise pp.ParseFatalException("division by zero in weight")
    return t[0] / t[1]

_fraction = (_integer + pp.Suppress("/") + _integer).set_parse_action(_divide)
_weight = _fraction | _real
_weights = _weight + pp.Suppress(",") + _weight + pp.Suppress(",") + _weight

_interval = (pp.Suppress("[") + _integer + pp.Suppress(",") + _integer + pp.Suppress("]")) \
          | (_integer + pp.Suppress("-") + _integer)

def _expand(t):
    lo, hi = t[0], t[-1]
    if lo > hi:
        raise pp.ParseFatalException("empty range %d-%d" % (lo, hi))
    return list(range(lo, hi+1))

_int_range = (_integer + pp.Optional(pp.Suppress("-") + _integer)).set_parse_action(_expand)
_int_set = pp.delimited_list(_int_range)

def _parse(grammar, text, what):
    try:
        return grammar.parse_string(text.strip(), parse_all=True)
    except (pp.ParseException, pp.ParseFatalException) as err:
        raise OptionError(msg="bad %s %r: %s" % (what, text, err))

def parse_weights(text):
    """Three weights, decimal or a/b.

    >>> parse_weights("0,1/2,1/2")
    (0.0, 0.5, 0.5)
    """
    return tuple(float(v) for v in _parse(_weights, text, "weights"))

def parse_interval(text):
    """An integer interval written lo-hi or [lo,hi].

    >>> parse_interval("[1,7]")
    (1, 7)
    >>> parse_interval("2-5")
    (2, 5)
    """
    lo, hi = _parse(_interval, text, "interval")
    if lo > hi:
        raise OptionError(msg="bad interval %r: empty" % (text,))
    return (lo, hi)

def parse_int_set(text):
    """A set of integers written as values and ranges.

    >>> sorted(parse_int_set("17-19,21-23"))
    [17, 18, 19, 21, 22, 23]
    """
    return frozenset(_parse(_int_set, text, "integer set"))

def parse_int_list(text):
    # sorted, duplicates dropped
    return tuple(sorted(parse_int_set(text)))
