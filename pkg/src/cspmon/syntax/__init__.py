from .parser import parse_spec, parse_trace_literal, parse_assertions
from .pretty import pretty_print
from .resolver import ResolvedSpec, resolve

__all__ = [
    "parse_spec",
    "parse_trace_literal",
    "parse_assertions",
    "pretty_print",
    "ResolvedSpec",
    "resolve",
]
