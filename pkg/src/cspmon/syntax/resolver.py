"""Name resolution and static checking of a parsed specification.

Produces an immutable :class:`ResolvedSpec`: channels with materialized
payload types, evaluated constants and named sets, scope- and arity-checked
process definitions, resolved assertions, and the finite ground alphabet.
Resolution is deterministic; sets are ordered canonically.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional, Tuple

from ..errors import (
    BadPayload,
    NonFiniteSet,
    ResolveError,
    TypeMismatch,
    UnboundName,
    UnknownChannel,
)
from ..values import (
    BoolType,
    EnumType,
    EnumValue,
    Event,
    IntRangeType,
    Value,
    ValueType,
    event_sort_key,
    format_value,
    value_sort_key,
)
from . import ast

# Materializing a set bigger than this is treated as non-finite.
MAX_SET_SIZE = 1_000_000

Env = Mapping[str, Value]
_EMPTY_ENV: dict[str, Value] = {}
_MISSING = object()


@dataclass(frozen=True)
class NamedSet:
    """A named set definition, either of values or of ground events."""

    kind: str  # "values" | "events"
    members: tuple  # canonically sorted


@dataclass(frozen=True)
class ResolvedAssertion:
    kind: str  # deadlock_free | divergence_free | deterministic | refines | has_trace
    left: ast.ProcessExpr
    right: Optional[ast.ProcessExpr] = None
    trace: Tuple[Event, ...] = ()
    source: str = field(default="", compare=False)  # printable form for reports


class ResolvedSpec:
    """A fully resolved specification; immutable and freely shareable."""

    def __init__(self):
        self.origin: str = "<spec>"
        self.channels: dict[str, Tuple[ValueType, ...]] = {}
        self.types: dict[str, EnumType] = {}
        self.constants: dict[str, Value] = {}
        self.sets: dict[str, NamedSet] = {}
        self.processes: dict[str, ast.ProcessDef] = {}
        self.assertions: Tuple[ResolvedAssertion, ...] = ()
        self.constructors: dict[str, EnumValue] = {}
        self.alphabet: Tuple[Event, ...] = ()
        self.alphabet_set: frozenset = frozenset()
        self._events_by_channel: dict[str, Tuple[Event, ...]] = {}
        self._demand = None  # resolution-time hook for on-demand definitions

    def _install_channels(self, channels: dict[str, Tuple[ValueType, ...]]) -> None:
        self.channels = channels
        by_channel: dict[str, list[Event]] = {}
        for name, payload in channels.items():
            by_channel[name] = _channel_events(name, payload)
        self._events_by_channel = {
            name: tuple(sorted(evs, key=event_sort_key)) for name, evs in by_channel.items()
        }
        flat = [e for evs in self._events_by_channel.values() for e in evs]
        self.alphabet = tuple(sorted(flat, key=event_sort_key))
        self.alphabet_set = frozenset(self.alphabet)

    # -- lookups (support on-demand resolution while the spec is being built)

    def _lookup_constant(self, name: str):
        v = self.constants.get(name, _MISSING)
        if v is _MISSING and self._demand is not None:
            self._demand(name)
            v = self.constants.get(name, _MISSING)
        return v

    def _lookup_set(self, name: str) -> Optional[NamedSet]:
        s = self.sets.get(name)
        if s is None and self._demand is not None:
            self._demand(name)
            s = self.sets.get(name)
        return s

    # -- events ----------------------------------------------------------------

    def events_of_channel(self, name: str) -> Tuple[Event, ...]:
        evs = self._events_by_channel.get(name)
        if evs is None:
            raise UnknownChannel(f"unknown channel {name!r}")
        return evs

    def make_event(self, channel: str, values: Tuple[Value, ...]) -> Event:
        """Build a ground event, validating payload arity and types."""
        payload = self.channels.get(channel)
        if payload is None:
            raise UnknownChannel(f"unknown channel {channel!r}")
        if len(values) != len(payload):
            raise BadPayload(
                f"channel {channel!r} expects {len(payload)} payload "
                f"field(s), got {len(values)}"
            )
        for v, t in zip(values, payload):
            if not t.contains(v):
                raise BadPayload(
                    f"value {format_value(v)} is outside {t} on channel {channel!r}"
                )
        return Event(channel, values)

    def parse_event_name(self, text: str) -> Event:
        """Parse a dotted ground event like ``speed.3`` or ``system_init``."""
        parts = text.split(".")
        values = tuple(self._parse_value_token(tok) for tok in parts[1:])
        return self.make_event(parts[0], values)

    def _parse_value_token(self, token: str) -> Value:
        if token == "True":
            return True
        if token == "False":
            return False
        try:
            return int(token)
        except ValueError:
            pass
        ctor = self.constructors.get(token)
        if ctor is not None:
            return ctor
        raise BadPayload(f"cannot parse payload value {token!r}")

    def ground_event_lit(self, lit: ast.EventLit) -> Event:
        values = []
        for arg in lit.args:
            try:
                values.append(self.eval_value(arg, _EMPTY_ENV))
            except ResolveError as e:
                raise BadPayload(str(e)) from None
        return self.make_event(lit.channel, tuple(values))

    # -- expression evaluation ---------------------------------------------------

    def eval_value(self, e: ast.ValueExpr, env: Env) -> Value:
        if isinstance(e, ast.IntLit):
            return e.value
        if isinstance(e, ast.BoolLit):
            return e.value
        if isinstance(e, ast.Name):
            v = env.get(e.ident, _MISSING)
            if v is not _MISSING:
                return v
            v = self._lookup_constant(e.ident)
            if v is not _MISSING:
                return v
            ctor = self.constructors.get(e.ident)
            if ctor is not None:
                return ctor
            raise UnboundName(f"unbound name {e.ident!r}")
        if isinstance(e, ast.Unary):
            v = self.eval_value(e.operand, env)
            if e.op == "-":
                _need_int(v, "-")
                return -v
            _need_bool(v, "not")
            return not v
        if isinstance(e, ast.Binary):
            l = self.eval_value(e.left, env)
            op = e.op
            if op in ("and", "or"):
                _need_bool(l, op)
                r = self.eval_value(e.right, env)
                _need_bool(r, op)
                return (l and r) if op == "and" else (l or r)
            r = self.eval_value(e.right, env)
            if op in ("==", "!="):
                same = _values_equal(l, r)
                return same if op == "==" else not same
            if op in ("<", "<=", ">", ">="):
                _need_int(l, op)
                _need_int(r, op)
                return {"<": l < r, "<=": l <= r, ">": l > r, ">=": l >= r}[op]
            _need_int(l, op)
            _need_int(r, op)
            if op == "+":
                return l + r
            if op == "-":
                return l - r
            if op == "*":
                return l * r
            if op in ("/", "%"):
                if r == 0:
                    raise TypeMismatch("division by zero")
                return l // r if op == "/" else l % r
        raise TypeMismatch(f"cannot evaluate {e!r}")

    def eval_value_set(self, s: ast.SetExpr, env: Env) -> frozenset:
        kind, members = self._eval_set(s, env)
        if kind == "events" and members:
            raise TypeMismatch("expected a set of values, found a set of events")
        return members

    def eval_event_set(self, s: ast.SetExpr, env: Env) -> frozenset:
        kind, members = self._eval_set(s, env)
        if kind == "values" and members:
            raise TypeMismatch("expected a set of events, found a set of values")
        return members

    def _eval_set(self, s: ast.SetExpr, env: Env) -> tuple[str, frozenset]:
        if isinstance(s, ast.SetRange):
            lo = self.eval_value(s.lo, env)
            hi = self.eval_value(s.hi, env)
            _need_int(lo, "..")
            _need_int(hi, "..")
            if hi - lo + 1 > MAX_SET_SIZE:
                raise NonFiniteSet(f"range {{{lo}..{hi}}} is too large to materialize")
            return "values", frozenset(range(lo, hi + 1))
        if isinstance(s, ast.SetEnum):
            values: list[Value] = []
            events: list[Event] = []
            for item in s.items:
                self._eval_set_item(item, env, values, events)
            if values and events:
                raise TypeMismatch("set mixes plain values and events")
            if events:
                return "events", frozenset(events)
            return "values", frozenset(values)
        if isinstance(s, ast.SetChannels):
            out: list[Event] = []
            for name in s.channels:
                out.extend(self.events_of_channel(name))
            return "events", frozenset(out)
        if isinstance(s, ast.SetUniverse):
            return "events", self.alphabet_set
        if isinstance(s, ast.SetName):
            named = self._lookup_set(s.ident)
            if named is None:
                raise UnboundName(f"unbound set name {s.ident!r}")
            return named.kind, frozenset(named.members)
        if isinstance(s, ast.SetOp):
            lk, lm = self._eval_set(s.left, env)
            rk, rm = self._eval_set(s.right, env)
            if lm and rm and lk != rk:
                raise TypeMismatch("set operation mixes value and event sets")
            kind = lk if lm else rk
            if s.op == "union":
                return kind, lm | rm
            if s.op == "diff":
                return lk, lm - rm
            return kind, lm & rm
        raise TypeMismatch(f"cannot evaluate set expression {s!r}")

    def _eval_set_item(self, item: ast.Node, env: Env, values: list, events: list) -> None:
        if isinstance(item, ast.Dotted):
            if item.head in self.channels:
                args = tuple(self.eval_value(a, env) for a in item.args)
                try:
                    events.append(self.make_event(item.head, args))
                except BadPayload as e:
                    raise TypeMismatch(str(e)) from None
                return
            if item.args:
                raise UnknownChannel(f"unknown channel {item.head!r}")
            values.append(self.eval_value(ast.Name(item.head), env))
            return
        assert isinstance(item, ast.ValueExpr)
        values.append(self.eval_value(item, env))

    def payload_of(self, channel: str) -> Tuple[ValueType, ...]:
        payload = self.channels.get(channel)
        if payload is None:
            raise UnknownChannel(f"unknown channel {channel!r}")
        return payload

    def with_assertions(self, assertions: Tuple[ResolvedAssertion, ...]) -> "ResolvedSpec":
        spec = ResolvedSpec.__new__(ResolvedSpec)
        spec.__dict__.update(self.__dict__)
        spec.assertions = assertions
        return spec


def _values_equal(l: Value, r: Value) -> bool:
    if isinstance(l, bool) != isinstance(r, bool):
        raise TypeMismatch("comparison between a boolean and a non-boolean")
    if isinstance(l, EnumValue) != isinstance(r, EnumValue):
        raise TypeMismatch("comparison between an enum value and a non-enum value")
    return l == r


def _need_int(v: Value, op: str) -> None:
    if isinstance(v, bool) or not isinstance(v, int):
        raise TypeMismatch(f"operator {op!r} needs integer operands, got {format_value(v)}")


def _need_bool(v: Value, op: str) -> None:
    if not isinstance(v, bool):
        raise TypeMismatch(f"operator {op!r} needs boolean operands, got {format_value(v)}")


def _channel_events(name: str, payload: Tuple[ValueType, ...]) -> list[Event]:
    combos: list[tuple] = [()]
    for t in payload:
        vals = t.values()
        combos = [c + (v,) for c in combos for v in vals]
        if len(combos) > MAX_SET_SIZE:
            raise NonFiniteSet(f"channel {name!r} has too many ground events")
    return [Event(name, c) for c in combos]


# ---------------------------------------------------------------------------
# resolution driver


class _Resolver:
    def __init__(self, module: ast.SpecModule):
        self.module = module
        self.value_defs: dict[str, ast.ValueDef] = {}
        self._resolving: list[str] = []
        self.spec = ResolvedSpec()
        self.spec.origin = module.origin

    def run(self) -> ResolvedSpec:
        spec = self.spec
        channel_decls: dict[str, Tuple[ast.TypeExpr, ...]] = {}
        process_defs: dict[str, ast.ProcessDef] = {}
        assert_decls: list[ast.Assertion] = []

        for d in self.module.decls:
            if isinstance(d, ast.ChannelDecl):
                for n in d.names:
                    channel_decls[n] = d.payload
            elif isinstance(d, ast.DatatypeDecl):
                ctors = tuple(EnumValue(d.name, c, i) for i, c in enumerate(d.constructors))
                spec.types[d.name] = EnumType(d.name, ctors)
                for c in ctors:
                    spec.constructors[c.name] = c
            elif isinstance(d, ast.ValueDef):
                self.value_defs[d.name] = d
            elif isinstance(d, ast.ProcessDef):
                process_defs[d.name] = d
            else:
                assert isinstance(d, ast.Assertion)
                assert_decls.append(d)

        spec._demand = self._force_value_def

        # channel payload ranges may reference constants, which are resolved
        # on demand; event-valued named sets need channels, so they come after
        channels = {
            name: tuple(self._resolve_type(t) for t in payload)
            for name, payload in channel_decls.items()
        }
        spec._install_channels(channels)

        for name in self.value_defs:
            self._force_value_def(name)

        spec._demand = None
        spec.processes = process_defs

        checker = _ScopeChecker(spec)
        for d in process_defs.values():
            checker.check_def(d)
        spec.assertions = tuple(
            resolve_assertion(spec, a, checker) for a in assert_decls
        )
        return spec

    def _force_value_def(self, name: str) -> None:
        spec = self.spec
        if name in spec.constants or name in spec.sets or name not in self.value_defs:
            return
        if name in self._resolving:
            raise ResolveError(f"circular definition of {name!r}")
        d = self.value_defs[name]
        self._resolving.append(name)
        try:
            if isinstance(d.body, ast.ValueExpr):
                spec.constants[name] = spec.eval_value(d.body, _EMPTY_ENV)
            else:
                kind, members = spec._eval_set(d.body, _EMPTY_ENV)
                key = value_sort_key if kind == "values" else event_sort_key
                spec.sets[name] = NamedSet(kind, tuple(sorted(members, key=key)))
        finally:
            self._resolving.pop()

    def _resolve_type(self, t: ast.TypeExpr) -> ValueType:
        if isinstance(t, ast.TBool):
            return BoolType()
        if isinstance(t, ast.TRange):
            lo = self.spec.eval_value(t.lo, _EMPTY_ENV)
            hi = self.spec.eval_value(t.hi, _EMPTY_ENV)
            _need_int(lo, "..")
            _need_int(hi, "..")
            if lo > hi:
                raise TypeMismatch(f"empty payload range {{{lo}..{hi}}}")
            if hi - lo + 1 > MAX_SET_SIZE:
                raise NonFiniteSet(f"payload range {{{lo}..{hi}}} too large")
            return IntRangeType(lo, hi)
        assert isinstance(t, ast.TName)
        enum = self.spec.types.get(t.ident)
        if enum is None:
            raise UnboundName(f"unknown payload type {t.ident!r}")
        return enum


# ---------------------------------------------------------------------------
# scope and arity checking of process bodies


class _ScopeChecker:
    def __init__(self, spec: ResolvedSpec):
        self.spec = spec

    def check_def(self, d: ast.ProcessDef) -> None:
        dup = [p for p in d.params if d.params.count(p) > 1]
        if dup:
            raise ResolveError(f"{d.name}: duplicate parameter {dup[0]!r}")
        self.check_proc(d.body, frozenset(d.params), d.name)

    def check_proc(self, p: ast.ProcessExpr, scope: frozenset, where: str) -> None:
        spec = self.spec
        if isinstance(p, (ast.PStop, ast.PSkip)):
            return
        if isinstance(p, ast.PPrefix):
            payload = spec.channels.get(p.event.channel)
            if payload is None:
                raise UnboundName(
                    f"{where}: unknown channel {p.event.channel!r} in prefix"
                )
            if len(p.event.fields) != len(payload):
                raise TypeMismatch(
                    f"{where}: channel {p.event.channel!r} expects "
                    f"{len(payload)} field(s), got {len(p.event.fields)}"
                )
            inner = scope
            for f, ftype in zip(p.event.fields, payload):
                if isinstance(f, ast.FieldOutput):
                    self.check_value(f.expr, inner, where)
                    if not _has_free(f.expr, inner):
                        v = spec.eval_value(f.expr, _EMPTY_ENV)
                        if not ftype.contains(v):
                            raise TypeMismatch(
                                f"{where}: value {format_value(v)} is outside "
                                f"{ftype} on channel {p.event.channel!r}"
                            )
                else:
                    assert isinstance(f, ast.FieldInput)
                    if f.restriction is not None:
                        self.check_set(f.restriction, inner, where)
                        if not _set_has_free(f.restriction, inner):
                            sub = spec.eval_value_set(f.restriction, _EMPTY_ENV)
                            bad = sorted(
                                (v for v in sub if not ftype.contains(v)),
                                key=value_sort_key,
                            )
                            if bad:
                                raise TypeMismatch(
                                    f"{where}: restriction value "
                                    f"{format_value(bad[0])} is outside {ftype} "
                                    f"on channel {p.event.channel!r}"
                                )
                    inner = inner | {f.var}
            self.check_proc(p.cont, inner, where)
            return
        if isinstance(p, (ast.PExtChoice, ast.PIntChoice, ast.PInterleave, ast.PSeq)):
            self.check_proc(p.left, scope, where)
            self.check_proc(p.right, scope, where)
            return
        if isinstance(p, ast.PGenPar):
            self.check_proc(p.left, scope, where)
            self.check_proc(p.right, scope, where)
            self.check_set(p.sync, scope, where)
            return
        if isinstance(p, ast.PAlphaPar):
            self.check_proc(p.left, scope, where)
            self.check_proc(p.right, scope, where)
            self.check_set(p.alpha_left, scope, where)
            self.check_set(p.alpha_right, scope, where)
            return
        if isinstance(p, ast.PHide):
            self.check_proc(p.body, scope, where)
            self.check_set(p.hidden, scope, where)
            return
        if isinstance(p, ast.PRepExtChoice):
            self.check_set(p.over, scope, where)
            self.check_proc(p.body, scope | {p.var}, where)
            return
        if isinstance(p, ast.PIf):
            self.check_value(p.cond, scope, where)
            self.check_proc(p.then, scope, where)
            self.check_proc(p.orelse, scope, where)
            return
        if isinstance(p, ast.PCall):
            target = spec.processes.get(p.name)
            if target is None:
                raise UnboundName(f"{where}: unbound process name {p.name!r}")
            if len(p.args) != len(target.params):
                raise TypeMismatch(
                    f"{where}: {p.name} takes {len(target.params)} argument(s), "
                    f"got {len(p.args)}"
                )
            for a in p.args:
                self.check_value(a, scope, where)
            return
        raise ResolveError(f"{where}: unsupported process form {p!r}")

    def check_value(self, e: ast.ValueExpr, scope: frozenset, where: str) -> None:
        for name in _value_names(e):
            if name in scope:
                continue
            if self.spec._lookup_constant(name) is not _MISSING:
                continue
            if name in self.spec.constructors:
                continue
            raise UnboundName(f"{where}: unbound name {name!r}")

    def check_set(self, s: ast.SetExpr, scope: frozenset, where: str) -> None:
        if isinstance(s, ast.SetRange):
            self.check_value(s.lo, scope, where)
            self.check_value(s.hi, scope, where)
            return
        if isinstance(s, ast.SetEnum):
            for item in s.items:
                if isinstance(item, ast.Dotted):
                    if item.head in self.spec.channels:
                        for a in item.args:
                            self.check_value(a, scope, where)
                    elif item.args:
                        raise UnknownChannel(f"{where}: unknown channel {item.head!r}")
                    else:
                        self.check_value(ast.Name(item.head), scope, where)
                else:
                    assert isinstance(item, ast.ValueExpr)
                    self.check_value(item, scope, where)
            return
        if isinstance(s, ast.SetChannels):
            for c in s.channels:
                if c not in self.spec.channels:
                    raise UnknownChannel(f"{where}: unknown channel {c!r}")
            return
        if isinstance(s, ast.SetUniverse):
            return
        if isinstance(s, ast.SetName):
            if self.spec._lookup_set(s.ident) is None:
                raise UnboundName(f"{where}: unbound set name {s.ident!r}")
            return
        if isinstance(s, ast.SetOp):
            self.check_set(s.left, scope, where)
            self.check_set(s.right, scope, where)
            return
        raise ResolveError(f"{where}: unsupported set form {s!r}")


def _value_names(e: ast.ValueExpr):
    if isinstance(e, ast.Name):
        yield e.ident
    elif isinstance(e, ast.Unary):
        yield from _value_names(e.operand)
    elif isinstance(e, ast.Binary):
        yield from _value_names(e.left)
        yield from _value_names(e.right)


def _has_free(e: ast.ValueExpr, scope: frozenset) -> bool:
    return any(n in scope for n in _value_names(e))


def _set_has_free(s: ast.SetExpr, scope: frozenset) -> bool:
    if isinstance(s, ast.SetRange):
        return _has_free(s.lo, scope) or _has_free(s.hi, scope)
    if isinstance(s, ast.SetEnum):
        for item in s.items:
            if isinstance(item, ast.Dotted):
                if any(_has_free(a, scope) for a in item.args):
                    return True
                if not item.args and item.head in scope:
                    return True
            elif _has_free(item, scope):
                return True
        return False
    if isinstance(s, ast.SetOp):
        return _set_has_free(s.left, scope) or _set_has_free(s.right, scope)
    return False


def resolve_assertion(
    spec: ResolvedSpec, a: ast.Assertion, checker: Optional[_ScopeChecker] = None
) -> ResolvedAssertion:
    from .pretty import pretty_print

    checker = checker or _ScopeChecker(spec)
    checker.check_proc(a.left, frozenset(), "<assertion>")
    if a.right is not None:
        checker.check_proc(a.right, frozenset(), "<assertion>")
    trace = tuple(spec.ground_event_lit(lit) for lit in a.trace)
    return ResolvedAssertion(
        kind=a.kind,
        left=a.left,
        right=a.right,
        trace=trace,
        source=pretty_print(a),
    )


def resolve(module: ast.SpecModule) -> ResolvedSpec:
    """Resolve a parsed module; raises a ``ResolveError`` subclass on failure."""
    return _Resolver(module).run()
