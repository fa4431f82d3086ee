"""Operational semantics for resolved process terms.

Ground terms are hash-consed per :class:`Lts`, so structural equality is
identity and revisited states are shared.  One-step successor sets are
cached on the term, and τ-closed state sets are interned as
:class:`MacroState` objects with lazily built per-event edges; the monitor
and the refinement checker both ride on those, which makes repeated stepping
through hot states a dictionary lookup.  The brute-force trace enumerator
keeps its own, cache-free exploration and is the testing oracle for
everything else.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Union

from .errors import StateSpaceExceeded, TypeMismatch, UnboundName
from .syntax import ast
from .syntax.resolver import ResolvedSpec
from .values import Event, Value, event_sort_key, format_value, value_sort_key


class _Label:
    __slots__ = ("glyph",)

    def __init__(self, glyph: str):
        self.glyph = glyph

    def __repr__(self) -> str:
        return self.glyph


#: internal (invisible) step
TAU = _Label("tau")
#: successful-termination step
TICK = _Label("tick")

Label = Union[Event, _Label]

# term kinds
K_STOP, K_SKIP, K_OMEGA, K_PREFIX, K_EXT, K_INT, K_SEQ, K_GENPAR, K_ALPHAPAR, K_HIDE, K_CALL = range(11)

_GLYPHS = {K_EXT: "[]", K_INT: "|~|", K_SEQ: ";"}


class Term:
    """A canonicalized ground process term (one LTS state)."""

    __slots__ = ("kind", "args", "uid", "succ", "taus")

    def __init__(self, kind: int, args: tuple, uid: int):
        self.kind = kind
        self.args = args
        self.uid = uid
        self.succ: Optional[tuple] = None  # cached successor tuple
        self.taus: Optional[tuple] = None  # cached τ targets

    def __repr__(self) -> str:
        return f"<{self._show()}>"

    def _show(self) -> str:
        k = self.kind
        if k == K_STOP:
            return "STOP"
        if k == K_SKIP:
            return "SKIP"
        if k == K_OMEGA:
            return "OMEGA"
        if k == K_CALL:
            name, args = self.args
            if args:
                return f"{name}({', '.join(format_value(v) for v in args)})"
            return name
        if k == K_PREFIX:
            pattern, _env, _cont = self.args
            return f"{pattern.channel}... -> _"
        if k in _GLYPHS:
            l, r = self.args
            return f"({l._show()} {_GLYPHS[k]} {r._show()})"
        if k == K_GENPAR:
            l, _sync, r = self.args
            return f"({l._show()} |[..]| {r._show()})"
        if k == K_ALPHAPAR:
            l, _al, _ar, r = self.args
            return f"({l._show()} [..||..] {r._show()})"
        if k == K_HIDE:
            (body, _hidden) = self.args
            return f"({body._show()} \\ ..)"
        return f"term#{self.uid}"


@dataclass(frozen=True)
class Caps:
    """Exploration limits; the default bounds runaway recursion generously."""

    max_states: int = 1_000_000


@dataclass(frozen=True)
class ClosureResult:
    """A τ-closed set of states plus divergence/truncation flags."""

    states: frozenset
    divergent: bool
    truncated: bool


class MacroState:
    """An interned τ-closed state set with lazily computed event edges."""

    __slots__ = ("states", "divergent", "_lts", "_by_event", "_edges", "_can_tick")

    def __init__(self, lts: "Lts", closure: ClosureResult):
        self.states = closure.states
        self.divergent = closure.divergent
        self._lts = lts
        self._by_event: Optional[dict] = None
        self._edges: dict = {}
        self._can_tick: Optional[bool] = None

    def _index(self) -> dict:
        by_event = self._by_event
        if by_event is None:
            by_event = {}
            can_tick = False
            for t in self.states:
                for label, target in self._lts.successors(t):
                    if label is TAU:
                        continue
                    if label is TICK:
                        can_tick = True
                        continue
                    by_event.setdefault(label, set()).add(target)
            self._by_event = by_event
            self._can_tick = can_tick
        return by_event

    @property
    def initials(self) -> frozenset:
        """Visible events offered by some member state."""
        return frozenset(self._index().keys())

    @property
    def can_tick(self) -> bool:
        self._index()
        return bool(self._can_tick)

    def step(self, event: Event) -> Optional["MacroState"]:
        """Deterministic macro-transition; ``None`` when the event is refused."""
        nxt = self._edges.get(event, _MISSING_EDGE)
        if nxt is not _MISSING_EDGE:
            return nxt
        targets = self._index().get(event)
        if targets is None:
            self._edges[event] = None
            return None
        closure = self._lts.tau_closure(targets)
        if closure.truncated:
            raise StateSpaceExceeded(self._lts.caps.max_states)
        nxt = self._lts.macro(closure)
        self._edges[event] = nxt
        return nxt

    def __len__(self) -> int:
        return len(self.states)


_MISSING_EDGE = object()


class Lts:
    """Semantic context for one resolved specification.

    Holds the intern tables and caches; all operations are pure functions of
    the immutable spec.  Instances are cheap; sessions that should not share
    cache memory simply build their own.
    """

    def __init__(self, spec: ResolvedSpec, caps: Caps = Caps()):
        self.spec = spec
        self.caps = caps
        self._terms: dict = {}
        self._macros: dict = {}
        self._free_vars: dict = {}
        self._uid = 0
        self.stop = self._make(K_STOP, ())
        self.skip = self._make(K_SKIP, ())
        self.omega = self._make(K_OMEGA, ())

    # -- term construction ----------------------------------------------------

    def _make(self, kind: int, key_args: tuple, args: Optional[tuple] = None) -> Term:
        key = (kind, key_args)
        term = self._terms.get(key)
        if term is None:
            self._uid += 1
            if self._uid > self.caps.max_states:
                raise StateSpaceExceeded(self.caps.max_states)
            term = Term(kind, key_args if args is None else args, self._uid)
            self._terms[key] = term
        return term

    @property
    def term_count(self) -> int:
        return self._uid

    def term_for_process(self, name: str, args: tuple = ()) -> Term:
        d = self.spec.processes.get(name)
        if d is None:
            raise UnboundName(f"unbound process name {name!r}")
        if len(args) != len(d.params):
            raise TypeMismatch(
                f"{name} takes {len(d.params)} argument(s), got {len(args)}"
            )
        return self._make(K_CALL, (name, tuple(args)))

    def close(self, expr: ast.ProcessExpr, env: Optional[Mapping[str, Value]] = None) -> Term:
        """Convert a resolved process expression plus bindings to a term.

        Conditionals and replicated choices are evaluated away; calls stay
        lazy and unfold via τ so unguarded recursion shows up as divergence.
        """
        env = env or {}
        spec = self.spec
        if isinstance(expr, ast.PStop):
            return self.stop
        if isinstance(expr, ast.PSkip):
            return self.skip
        if isinstance(expr, ast.PPrefix):
            trimmed = self._trim(env, expr)
            return self._make(K_PREFIX, (expr, trimmed))
        if isinstance(expr, ast.PExtChoice):
            return self._make(
                K_EXT, (self.close(expr.left, env), self.close(expr.right, env))
            )
        if isinstance(expr, ast.PIntChoice):
            return self._make(
                K_INT, (self.close(expr.left, env), self.close(expr.right, env))
            )
        if isinstance(expr, ast.PSeq):
            return self._make(
                K_SEQ, (self.close(expr.left, env), self.close(expr.right, env))
            )
        if isinstance(expr, ast.PInterleave):
            return self._make(
                K_GENPAR,
                (self.close(expr.left, env), frozenset(), self.close(expr.right, env)),
            )
        if isinstance(expr, ast.PGenPar):
            sync = spec.eval_event_set(expr.sync, env)
            return self._make(
                K_GENPAR, (self.close(expr.left, env), sync, self.close(expr.right, env))
            )
        if isinstance(expr, ast.PAlphaPar):
            al = spec.eval_event_set(expr.alpha_left, env)
            ar = spec.eval_event_set(expr.alpha_right, env)
            return self._make(
                K_ALPHAPAR,
                (self.close(expr.left, env), al, ar, self.close(expr.right, env)),
            )
        if isinstance(expr, ast.PHide):
            hidden = spec.eval_event_set(expr.hidden, env)
            return self._make(K_HIDE, (self.close(expr.body, env), hidden))
        if isinstance(expr, ast.PRepExtChoice):
            values = sorted(spec.eval_value_set(expr.over, env), key=value_sort_key)
            if not values:
                return self.stop
            branches = []
            for v in values:
                inner = dict(env)
                inner[expr.var] = v
                branches.append(self.close(expr.body, inner))
            term = branches[0]
            for b in branches[1:]:
                term = self._make(K_EXT, (term, b))
            return term
        if isinstance(expr, ast.PIf):
            cond = spec.eval_value(expr.cond, env)
            if not isinstance(cond, bool):
                raise TypeMismatch("condition of if must be boolean")
            return self.close(expr.then if cond else expr.orelse, env)
        if isinstance(expr, ast.PCall):
            args = tuple(spec.eval_value(a, env) for a in expr.args)
            return self.term_for_process(expr.name, args)
        raise TypeMismatch(f"cannot close process expression {expr!r}")

    def _trim(self, env: Mapping[str, Value], expr: ast.Node) -> tuple:
        """Restrict an environment to the free names of ``expr`` (sorted)."""
        if not env:
            return ()
        free = self._free(expr)
        return tuple(sorted((k, v) for k, v in env.items() if k in free))

    def _free(self, node: ast.Node) -> frozenset:
        cached = self._free_vars.get(node)
        if cached is not None:
            return cached
        free: set = set()
        if isinstance(node, ast.PPrefix):
            bound: set = set()
            for f in node.event.fields:
                if isinstance(f, ast.FieldOutput):
                    free |= {n for n in _value_names(f.expr) if n not in bound}
                else:
                    if f.restriction is not None:
                        free |= {n for n in _set_names(f.restriction) if n not in bound}
                    bound.add(f.var)
            free |= self._free(node.cont) - bound
        elif isinstance(node, ast.PRepExtChoice):
            free |= _set_names(node.over)
            free |= self._free(node.body) - {node.var}
        elif isinstance(node, ast.PIf):
            free |= set(_value_names(node.cond))
            free |= self._free(node.then) | self._free(node.orelse)
        elif isinstance(node, ast.PCall):
            for a in node.args:
                free |= set(_value_names(a))
        elif isinstance(node, (ast.PExtChoice, ast.PIntChoice, ast.PSeq, ast.PInterleave)):
            free |= self._free(node.left) | self._free(node.right)
        elif isinstance(node, ast.PGenPar):
            free |= self._free(node.left) | self._free(node.right)
            free |= _set_names(node.sync)
        elif isinstance(node, ast.PAlphaPar):
            free |= self._free(node.left) | self._free(node.right)
            free |= _set_names(node.alpha_left) | _set_names(node.alpha_right)
        elif isinstance(node, ast.PHide):
            free |= self._free(node.body) | _set_names(node.hidden)
        result = frozenset(free)
        self._free_vars[node] = result
        return result

    # -- one-step successors ----------------------------------------------------

    def successors(self, term: Term) -> tuple:
        """The complete one-step transition set of a ground term."""
        cached = term.succ
        if cached is None:
            cached = self._successors(term)
            term.succ = cached
            term.taus = tuple(t for lab, t in cached if lab is TAU)
        return cached

    def _successors(self, term: Term) -> tuple:
        k = term.kind
        if k in (K_STOP, K_OMEGA):
            return ()
        if k == K_SKIP:
            return ((TICK, self.omega),)
        if k == K_PREFIX:
            return self._prefix_successors(term)
        if k == K_EXT:
            l, r = term.args
            out = []
            for lab, t in self.successors(l):
                if lab is TAU:
                    out.append((TAU, self._make(K_EXT, (t, r))))
                else:
                    out.append((lab, t))
            for lab, t in self.successors(r):
                if lab is TAU:
                    out.append((TAU, self._make(K_EXT, (l, t))))
                else:
                    out.append((lab, t))
            return _dedupe(out)
        if k == K_INT:
            l, r = term.args
            return ((TAU, l), (TAU, r))
        if k == K_SEQ:
            l, r = term.args
            out = []
            for lab, t in self.successors(l):
                if lab is TICK:
                    out.append((TAU, r))
                else:
                    out.append((lab, self._make(K_SEQ, (t, r))))
            return _dedupe(out)
        if k == K_GENPAR:
            l, sync, r = term.args
            out = []
            l_sync: dict = {}
            r_sync: dict = {}
            l_tick = r_tick = False
            for lab, t in self.successors(l):
                if lab is TAU:
                    out.append((TAU, self._make(K_GENPAR, (t, sync, r))))
                elif lab is TICK:
                    l_tick = True
                elif lab in sync:
                    l_sync.setdefault(lab, []).append(t)
                else:
                    out.append((lab, self._make(K_GENPAR, (t, sync, r))))
            for lab, t in self.successors(r):
                if lab is TAU:
                    out.append((TAU, self._make(K_GENPAR, (l, sync, t))))
                elif lab is TICK:
                    r_tick = True
                elif lab in sync:
                    r_sync.setdefault(lab, []).append(t)
                else:
                    out.append((lab, self._make(K_GENPAR, (l, sync, t))))
            for e, lts_ in l_sync.items():
                rts = r_sync.get(e)
                if rts:
                    for lt in lts_:
                        for rt in rts:
                            out.append((e, self._make(K_GENPAR, (lt, sync, rt))))
            if l_tick and r_tick:
                out.append((TICK, self.omega))
            return _dedupe(out)
        if k == K_ALPHAPAR:
            l, al, ar, r = term.args
            shared = al & ar
            out = []
            l_shared: dict = {}
            r_shared: dict = {}
            l_tick = r_tick = False
            for lab, t in self.successors(l):
                if lab is TAU:
                    out.append((TAU, self._make(K_ALPHAPAR, (t, al, ar, r))))
                elif lab is TICK:
                    l_tick = True
                elif lab in shared:
                    l_shared.setdefault(lab, []).append(t)
                elif lab in al:
                    out.append((lab, self._make(K_ALPHAPAR, (t, al, ar, r))))
                # events outside the declared alphabet are blocked
            for lab, t in self.successors(r):
                if lab is TAU:
                    out.append((TAU, self._make(K_ALPHAPAR, (l, al, ar, t))))
                elif lab is TICK:
                    r_tick = True
                elif lab in shared:
                    r_shared.setdefault(lab, []).append(t)
                elif lab in ar:
                    out.append((lab, self._make(K_ALPHAPAR, (l, al, ar, t))))
            for e, lts_ in l_shared.items():
                rts = r_shared.get(e)
                if rts:
                    for lt in lts_:
                        for rt in rts:
                            out.append((e, self._make(K_ALPHAPAR, (lt, al, ar, rt))))
            if l_tick and r_tick:
                out.append((TICK, self.omega))
            return _dedupe(out)
        if k == K_HIDE:
            body, hidden = term.args
            out = []
            for lab, t in self.successors(body):
                if lab is TICK:
                    out.append((TICK, self.omega))
                elif lab is TAU or lab in hidden:
                    out.append((TAU, self._make(K_HIDE, (t, hidden))))
                else:
                    out.append((lab, self._make(K_HIDE, (t, hidden))))
            return _dedupe(out)
        if k == K_CALL:
            name, args = term.args
            d = self.spec.processes[name]
            env = dict(zip(d.params, args))
            return ((TAU, self.close(d.body, env)),)
        raise AssertionError(f"unknown term kind {k}")

    def _prefix_successors(self, term: Term) -> tuple:
        expr, env_items = term.args
        spec = self.spec
        payload = spec.payload_of(expr.event.channel)
        base_env = dict(env_items)
        combos: list[tuple[tuple, dict]] = [((), base_env)]
        for f, ftype in zip(expr.event.fields, payload):
            fresh: list[tuple[tuple, dict]] = []
            if isinstance(f, ast.FieldOutput):
                for values, env in combos:
                    v = spec.eval_value(f.expr, env)
                    if not ftype.contains(v):
                        raise TypeMismatch(
                            f"value {format_value(v)} is outside {ftype} "
                            f"on channel {expr.event.channel!r}"
                        )
                    fresh.append((values + (v,), env))
            else:
                assert isinstance(f, ast.FieldInput)
                for values, env in combos:
                    if f.restriction is None:
                        allowed = ftype.values()
                    else:
                        allowed = sorted(
                            spec.eval_value_set(f.restriction, env), key=value_sort_key
                        )
                        for v in allowed:
                            if not ftype.contains(v):
                                raise TypeMismatch(
                                    f"restriction value {format_value(v)} is outside "
                                    f"{ftype} on channel {expr.event.channel!r}"
                                )
                    for v in allowed:
                        env2 = dict(env)
                        env2[f.var] = v
                        fresh.append((values + (v,), env2))
            combos = fresh
        out = []
        for values, env in combos:
            event = Event(expr.event.channel, values)
            out.append((event, self.close(expr.cont, env)))
        return _dedupe(out)

    # -- τ-closure ---------------------------------------------------------------

    def tau_closure(self, states: Iterable[Term]) -> ClosureResult:
        """Least τ-closed superset, flagging τ-cycles (divergence).

        When the closure would exceed the state cap it stops early with
        ``truncated=True``; callers decide whether that is an error.
        """
        cap = self.caps.max_states
        WHITE, GRAY, BLACK = 0, 1, 2
        color: dict[Term, int] = {}
        divergent = False
        truncated = False
        roots = list(states)
        for root in roots:
            if color.get(root, WHITE) != WHITE:
                continue
            color[root] = GRAY
            self.successors(root)
            stack: list[tuple[Term, int]] = [(root, 0)]
            while stack:
                node, idx = stack[-1]
                taus = node.taus
                assert taus is not None
                if idx < len(taus):
                    stack[-1] = (node, idx + 1)
                    child = taus[idx]
                    c = color.get(child, WHITE)
                    if c == GRAY:
                        divergent = True
                    elif c == WHITE:
                        if len(color) >= cap:
                            truncated = True
                            stack.clear()
                            break
                        color[child] = GRAY
                        self.successors(child)
                        stack.append((child, 0))
                else:
                    color[node] = BLACK
                    stack.pop()
            if truncated:
                break
        return ClosureResult(frozenset(color.keys()), divergent, truncated)

    # -- macro-states ---------------------------------------------------------------

    def macro(self, closure: ClosureResult) -> MacroState:
        m = self._macros.get(closure.states)
        if m is None:
            m = MacroState(self, closure)
            self._macros[closure.states] = m
        return m

    def initial_macro(self, process: Union[str, ast.ProcessExpr, Term]) -> MacroState:
        term = self._as_term(process)
        closure = self.tau_closure([term])
        if closure.truncated:
            raise StateSpaceExceeded(self.caps.max_states)
        return self.macro(closure)

    def _as_term(self, process: Union[str, ast.ProcessExpr, Term]) -> Term:
        if isinstance(process, Term):
            return process
        if isinstance(process, str):
            return self.term_for_process(process)
        return self.close(process)

    # -- derived views ----------------------------------------------------------------

    def visible_initials(self, states: Iterable[Term]) -> frozenset:
        """Union of visible labels offered by the given (τ-closed) states."""
        out = set()
        for t in states:
            for lab, _target in self.successors(t):
                if lab is not TAU and lab is not TICK:
                    out.add(lab)
        return frozenset(out)

    def can_terminate(self, states: Iterable[Term]) -> bool:
        return any(
            lab is TICK for t in states for lab, _target in self.successors(t)
        )

    # -- brute-force trace enumeration (testing oracle) ---------------------------------

    def enumerate_traces(
        self, process: Union[str, ast.ProcessExpr, Term], depth: int
    ) -> frozenset:
        """The exact set of visible traces of length ≤ ``depth``.

        Exhaustive BFS over visible steps through τ-closures.  Deliberately
        avoids the macro-state edge caches so it exercises an independent
        path through the semantics.
        """
        if depth < 0:
            raise ValueError("depth must be non-negative")
        root = self._as_term(process)
        cap = self.caps.max_states
        memo: dict[tuple[frozenset, int], frozenset] = {}

        def closure_of(terms: frozenset) -> frozenset:
            seen = set(terms)
            todo = list(terms)
            while todo:
                t = todo.pop()
                for lab, target in self.successors(t):
                    if lab is TAU and target not in seen:
                        if len(seen) >= cap:
                            raise StateSpaceExceeded(cap)
                        seen.add(target)
                        todo.append(target)
            return frozenset(seen)

        def explore(states: frozenset, remaining: int) -> frozenset:
            key = (states, remaining)
            hit = memo.get(key)
            if hit is not None:
                return hit
            traces = {()}
            if remaining > 0:
                by_event: dict[Event, set] = {}
                for t in states:
                    for lab, target in self.successors(t):
                        if lab is not TAU and lab is not TICK:
                            by_event.setdefault(lab, set()).add(target)
                for e, targets in by_event.items():
                    for suffix in explore(closure_of(frozenset(targets)), remaining - 1):
                        traces.add((e,) + suffix)
            result = frozenset(traces)
            memo[key] = result
            return result

        return explore(closure_of(frozenset([root])), depth)


def _dedupe(pairs: list) -> tuple:
    if len(pairs) <= 1:
        return tuple(pairs)
    seen = set()
    out = []
    for p in pairs:
        if p not in seen:
            seen.add(p)
            out.append(p)
    return tuple(out)


def _value_names(e: ast.ValueExpr):
    if isinstance(e, ast.Name):
        yield e.ident
    elif isinstance(e, ast.Unary):
        yield from _value_names(e.operand)
    elif isinstance(e, ast.Binary):
        yield from _value_names(e.left)
        yield from _value_names(e.right)


def _set_names(s: ast.SetExpr) -> set:
    names: set = set()
    if isinstance(s, ast.SetRange):
        names |= set(_value_names(s.lo)) | set(_value_names(s.hi))
    elif isinstance(s, ast.SetEnum):
        for item in s.items:
            if isinstance(item, ast.Dotted):
                for a in item.args:
                    names |= set(_value_names(a))
                if not item.args:
                    names.add(item.head)
            else:
                names |= set(_value_names(item))
    elif isinstance(s, ast.SetName):
        names.add(s.ident)
    elif isinstance(s, ast.SetOp):
        names |= _set_names(s.left) | _set_names(s.right)
    return names


def enumerate_traces(spec: ResolvedSpec, process, depth: int, caps: Caps = Caps()) -> frozenset:
    """Convenience wrapper building a fresh semantic context."""
    return Lts(spec, caps).enumerate_traces(process, depth)
