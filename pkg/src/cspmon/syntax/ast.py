"""Abstract syntax for the CSP subset.

Nodes are frozen dataclasses with structural equality, so a parse /
pretty-print round trip can be checked with ``==``.  Source positions are
kept out of comparisons.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Tuple


@dataclass(frozen=True)
class Node:
    pass


# ---------------------------------------------------------------------------
# value expressions


@dataclass(frozen=True)
class ValueExpr(Node):
    pass


@dataclass(frozen=True)
class IntLit(ValueExpr):
    value: int


@dataclass(frozen=True)
class BoolLit(ValueExpr):
    value: bool


@dataclass(frozen=True)
class Name(ValueExpr):
    ident: str


@dataclass(frozen=True)
class Unary(ValueExpr):
    op: str  # "-" or "not"
    operand: ValueExpr


@dataclass(frozen=True)
class Binary(ValueExpr):
    op: str  # + - * / % == != < <= > >= and or
    left: ValueExpr
    right: ValueExpr


# ---------------------------------------------------------------------------
# set expressions (resolve to value sets or event sets depending on context)


@dataclass(frozen=True)
class SetExpr(Node):
    pass


@dataclass(frozen=True)
class SetRange(SetExpr):
    lo: ValueExpr
    hi: ValueExpr


@dataclass(frozen=True)
class Dotted(Node):
    """A dotted enumeration item such as ``speed.3`` or a bare name."""

    head: str
    args: Tuple[ValueExpr, ...] = ()


@dataclass(frozen=True)
class SetEnum(SetExpr):
    items: Tuple[Node, ...]  # Dotted or ValueExpr entries


@dataclass(frozen=True)
class SetChannels(SetExpr):
    """``{| c, d |}``: every ground event of the named channels."""

    channels: Tuple[str, ...]


@dataclass(frozen=True)
class SetUniverse(SetExpr):
    """``Events``: the whole ground alphabet."""


@dataclass(frozen=True)
class SetName(SetExpr):
    ident: str


@dataclass(frozen=True)
class SetOp(SetExpr):
    op: str  # union | diff | inter
    left: SetExpr
    right: SetExpr


# ---------------------------------------------------------------------------
# types as written in channel declarations


@dataclass(frozen=True)
class TypeExpr(Node):
    pass


@dataclass(frozen=True)
class TBool(TypeExpr):
    pass


@dataclass(frozen=True)
class TRange(TypeExpr):
    lo: ValueExpr
    hi: ValueExpr


@dataclass(frozen=True)
class TName(TypeExpr):
    ident: str


# ---------------------------------------------------------------------------
# events in prefix position


@dataclass(frozen=True)
class FieldOutput(Node):
    expr: ValueExpr
    sigil: str = "."  # "." or "!", kept for faithful printing


@dataclass(frozen=True)
class FieldInput(Node):
    var: str
    restriction: Optional[SetExpr] = None


@dataclass(frozen=True)
class EventPattern(Node):
    channel: str
    fields: Tuple[Node, ...] = ()  # FieldOutput / FieldInput


# ---------------------------------------------------------------------------
# process expressions


@dataclass(frozen=True)
class ProcessExpr(Node):
    pass


@dataclass(frozen=True)
class PStop(ProcessExpr):
    pass


@dataclass(frozen=True)
class PSkip(ProcessExpr):
    pass


@dataclass(frozen=True)
class PPrefix(ProcessExpr):
    event: EventPattern
    cont: ProcessExpr


@dataclass(frozen=True)
class PExtChoice(ProcessExpr):
    left: ProcessExpr
    right: ProcessExpr


@dataclass(frozen=True)
class PIntChoice(ProcessExpr):
    left: ProcessExpr
    right: ProcessExpr


@dataclass(frozen=True)
class PRepExtChoice(ProcessExpr):
    var: str
    over: SetExpr
    body: ProcessExpr


@dataclass(frozen=True)
class PSeq(ProcessExpr):
    left: ProcessExpr
    right: ProcessExpr


@dataclass(frozen=True)
class PGenPar(ProcessExpr):
    left: ProcessExpr
    sync: SetExpr
    right: ProcessExpr


@dataclass(frozen=True)
class PAlphaPar(ProcessExpr):
    left: ProcessExpr
    alpha_left: SetExpr
    alpha_right: SetExpr
    right: ProcessExpr


@dataclass(frozen=True)
class PInterleave(ProcessExpr):
    left: ProcessExpr
    right: ProcessExpr


@dataclass(frozen=True)
class PHide(ProcessExpr):
    body: ProcessExpr
    hidden: SetExpr


@dataclass(frozen=True)
class PIf(ProcessExpr):
    cond: ValueExpr
    then: ProcessExpr
    orelse: ProcessExpr


@dataclass(frozen=True)
class PCall(ProcessExpr):
    name: str
    args: Tuple[ValueExpr, ...] = ()


# ---------------------------------------------------------------------------
# declarations


@dataclass(frozen=True)
class Decl(Node):
    pass


@dataclass(frozen=True)
class ChannelDecl(Decl):
    names: Tuple[str, ...]
    payload: Tuple[TypeExpr, ...] = ()
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class DatatypeDecl(Decl):
    name: str
    constructors: Tuple[str, ...]
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class ValueDef(Decl):
    """A constant or named-set definition; which one is decided at resolve."""

    name: str
    body: Node  # ValueExpr or SetExpr
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class ProcessDef(Decl):
    name: str
    params: Tuple[str, ...]
    body: ProcessExpr
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class EventLit(Node):
    """A ground dotted event written in a trace literal."""

    channel: str
    args: Tuple[ValueExpr, ...] = ()


@dataclass(frozen=True)
class Assertion(Decl):
    kind: str  # "deadlock_free" | "divergence_free" | "deterministic" | "refines" | "has_trace"
    left: ProcessExpr
    right: Optional[ProcessExpr] = None  # impl side for refines
    trace: Tuple[EventLit, ...] = ()
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class SpecModule(Node):
    """A parsed (unresolved) specification file."""

    decls: Tuple[Decl, ...]
    origin: str = field(default="<input>", compare=False)
