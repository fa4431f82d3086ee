"""Ground values, payload types, and events.

A ground value is an ``int``, a ``bool``, or an :class:`EnumValue`.  Events
pair a channel name with a tuple of ground values and print in the dotted
form ``channel.v1.v2`` used throughout spec files, traces, and logs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Tuple, Union


@dataclass(frozen=True)
class EnumValue:
    """One constructor of a user-declared enumeration."""

    type_name: str
    name: str
    index: int  # declaration order, used for canonical sorting

    def __str__(self) -> str:
        return self.name

    def __repr__(self) -> str:
        return f"EnumValue({self.type_name}.{self.name})"


Value = Union[int, bool, EnumValue]


def format_value(v: Value) -> str:
    if isinstance(v, bool):
        return "True" if v else "False"
    if isinstance(v, EnumValue):
        return v.name
    return str(v)


def value_sort_key(v: Value) -> tuple:
    """Total order over ground values: booleans, then ints, then enums."""
    if isinstance(v, bool):
        return (0, int(v), "")
    if isinstance(v, int):
        return (1, v, "")
    return (2, v.index, v.type_name)


class ValueType:
    """Base class for channel payload types; each is a finite value set."""

    def values(self) -> Tuple[Value, ...]:
        raise NotImplementedError

    def contains(self, v: Value) -> bool:
        raise NotImplementedError


@dataclass(frozen=True)
class IntRangeType(ValueType):
    lo: int
    hi: int

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"empty integer range {{{self.lo}..{self.hi}}}")

    def values(self) -> Tuple[Value, ...]:
        return tuple(range(self.lo, self.hi + 1))

    def contains(self, v: Value) -> bool:
        # bool is an int in Python; payload typing keeps them apart.
        return isinstance(v, int) and not isinstance(v, bool) and self.lo <= v <= self.hi

    def __str__(self) -> str:
        return f"{{{self.lo}..{self.hi}}}"


@dataclass(frozen=True)
class BoolType(ValueType):
    def values(self) -> Tuple[Value, ...]:
        return (False, True)

    def contains(self, v: Value) -> bool:
        return isinstance(v, bool)

    def __str__(self) -> str:
        return "Bool"


@dataclass(frozen=True)
class EnumType(ValueType):
    name: str
    constructors: Tuple[EnumValue, ...]

    def values(self) -> Tuple[Value, ...]:
        return self.constructors

    def contains(self, v: Value) -> bool:
        return isinstance(v, EnumValue) and v.type_name == self.name

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Event:
    """A ground communication: channel name plus fully-applied payload."""

    channel: str
    values: Tuple[Value, ...] = ()

    def __str__(self) -> str:
        if not self.values:
            return self.channel
        return self.channel + "." + ".".join(format_value(v) for v in self.values)

    def __repr__(self) -> str:
        return f"Event({self})"


def event_sort_key(e: Event) -> tuple:
    return (e.channel,) + tuple(value_sort_key(v) for v in e.values)


def sort_events(events: Iterable[Event]) -> list[Event]:
    return sorted(events, key=event_sort_key)
