"""Call-by-need lambda calculus with letrec, constructors, case and seq.

Includes a normal-order interpreter with eager garbage collection, space and
time measures, a catalogue of program transformations and an empirical
space-improvement checker.
"""

from .syntax import parse, parse_expr, pretty, size
from .reduce import evaluate, step, label

__all__ = ["parse", "parse_expr", "pretty", "size", "evaluate", "step", "label"]
__version__ = "0.1.0"
