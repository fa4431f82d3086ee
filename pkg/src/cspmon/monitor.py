"""Incremental trace-acceptance monitoring against a resolved model.

A session keeps the τ-closed frontier of states the model could occupy
after the events seen so far.  Each new event steps the whole frontier at
once, so nondeterministic models are explored breadth-first and checking is
per-event rather than per-trace.  Verdicts latch: after a rejection or
divergence the session must be reset explicitly.

A session has a single writer: step one session from one logical caller
only.  Any number of sessions over the same immutable spec can run in
parallel, optionally sharing one :class:`~cspmon.semantics.Lts` cache.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Optional, Sequence, Tuple, Union

from .errors import SessionNotRunning, StateSpaceExceeded
from .semantics import Caps, Lts, MacroState
from .syntax import ast
from .syntax.resolver import ResolvedSpec
from .values import Event

log = logging.getLogger("cspmon.monitor")


class Outcome(Enum):
    ACCEPTED = "accepted"
    REJECTED = "rejected"
    DIVERGED = "diverged"


class Status(Enum):
    RUNNING = "running"
    REJECTED = "rejected"
    DIVERGED = "diverged"
    TERMINATED = "terminated"


@dataclass(frozen=True)
class Verdict:
    """Judgement for one monitored event.

    ``index`` is the position of the judged event; ``acceptable`` holds the
    events the model would have allowed instead (populated on rejection);
    ``frontier_size`` is the state count of the post-event frontier (the
    pre-event frontier when the event was refused).
    """

    outcome: Outcome
    index: int
    acceptable: frozenset
    frontier_size: int

    def describe(self) -> str:
        if self.outcome is Outcome.ACCEPTED:
            return f"accepted event #{self.index}"
        if self.outcome is Outcome.DIVERGED:
            return f"model diverges at event #{self.index}"
        allowed = ", ".join(sorted(str(e) for e in self.acceptable)) or "none"
        return f"rejected event #{self.index}; acceptable: {allowed}"


@dataclass(frozen=True)
class TraceReport:
    """Result of checking one whole trace."""

    verdict: Verdict
    length: int  # events consumed before the run stopped
    elapsed: float  # seconds spent checking (model loading excluded)
    per_event: Optional[Tuple[float, ...]] = None

    @property
    def accepted(self) -> bool:
        return self.verdict.outcome is Outcome.ACCEPTED


class MonitorSession:
    """Mutable monitoring state for one event stream.

    ``root`` is usually the name of a nullary process; a closed process
    expression works too.
    """

    def __init__(self, spec: ResolvedSpec, root: Union[str, ast.ProcessExpr],
                 lts: Optional[Lts] = None, caps: Caps = Caps()):
        self.spec = spec
        self.root = root
        self.root_label = root if isinstance(root, str) else "<expr>"
        self.lts = lts if lts is not None else Lts(spec, caps)
        self.trace: list[Event] = []
        self.status = Status.RUNNING
        self.verdict: Optional[Verdict] = None
        self._macro: MacroState = self.lts.initial_macro(root)
        if self._macro.divergent:
            self.status = Status.DIVERGED
            self.verdict = Verdict(Outcome.DIVERGED, 0, frozenset(), len(self._macro))

    # -- inspection ---------------------------------------------------------

    @property
    def frontier_states(self) -> frozenset:
        return self._macro.states

    @property
    def frontier_size(self) -> int:
        return len(self._macro)

    @property
    def index(self) -> int:
        """Position the next event would be judged at."""
        return len(self.trace)

    def acceptable_next(self) -> frozenset:
        """Events the model can accept now; empty once the session stopped."""
        if self.status is not Status.RUNNING:
            return frozenset()
        return self._macro.initials

    @property
    def can_terminate(self) -> bool:
        """True when the model could terminate successfully here."""
        return self._macro.can_tick

    # -- stepping -----------------------------------------------------------

    def step_event(self, event: Event) -> Verdict:
        """Judge one event, advancing the frontier on acceptance."""
        if self.status is not Status.RUNNING:
            raise SessionNotRunning(
                f"session is {self.status.value}; reset before stepping again"
            )
        idx = len(self.trace)
        here = self._macro
        nxt = here.step(event)
        if nxt is None:
            verdict = Verdict(Outcome.REJECTED, idx, here.initials, len(here))
            self.status = Status.REJECTED
            self.verdict = verdict
            return verdict
        if nxt.divergent:
            self._macro = nxt
            verdict = Verdict(Outcome.DIVERGED, idx, frozenset(), len(nxt))
            self.status = Status.DIVERGED
            self.verdict = verdict
            return verdict
        self._macro = nxt
        self.trace.append(event)
        return Verdict(Outcome.ACCEPTED, idx, frozenset(), len(nxt))

    def finish(self) -> Status:
        """Mark the end of the stream; latches TERMINATED when ✓ is offered."""
        if self.status is Status.RUNNING and self.can_terminate:
            self.status = Status.TERMINATED
        return self.status

    def report(self) -> TraceReport:
        """Snapshot of the session as a whole-run report."""
        verdict = self.verdict
        if verdict is None:
            verdict = Verdict(
                Outcome.ACCEPTED, len(self.trace) - 1, frozenset(), self.frontier_size
            )
        length = len(self.trace)
        if verdict.outcome is not Outcome.ACCEPTED:
            length = verdict.index + 1
        return TraceReport(verdict, length, 0.0)


def open_session(spec: ResolvedSpec, root: str, lts: Optional[Lts] = None,
                 caps: Caps = Caps()) -> MonitorSession:
    """Start monitoring process ``root`` (must be defined and nullary)."""
    return MonitorSession(spec, root, lts=lts, caps=caps)


def reset_session(session: MonitorSession) -> MonitorSession:
    """Fresh session over the same spec and root; logs the old run.

    The semantic cache is carried over, so monitoring a system that cycles
    back to its initial state keeps its warmed-up edge tables.
    """
    old = session.report()
    log.info(
        "session reset: root=%s status=%s events=%d", session.root,
        session.status.value, len(session.trace),
    )
    log.debug("previous run: %s", old.verdict.describe())
    return MonitorSession(session.spec, session.root, lts=session.lts)


def check_trace(
    spec: ResolvedSpec,
    root: Union[str, ast.ProcessExpr],
    trace: Sequence[Event],
    lts: Optional[Lts] = None,
    caps: Caps = Caps(),
    per_event_timings: bool = False,
) -> TraceReport:
    """Offline check: fold :meth:`MonitorSession.step_event` over a trace.

    Stops at the first non-accepted event.  ``root`` may be a process name
    or a closed process expression.  For an empty accepted run the verdict
    index is ``-1`` (no event was judged).
    """
    lts = lts if lts is not None else Lts(spec, caps)
    timings: Optional[list[float]] = [] if per_event_timings else None
    start = time.perf_counter()
    if isinstance(root, str):
        session = MonitorSession(spec, root, lts=lts)
    else:
        session = MonitorSession.__new__(MonitorSession)
        session.spec = spec
        session.root = "<expr>"
        session.lts = lts
        session.trace = []
        session.status = Status.RUNNING
        session.verdict = None
        session._macro = lts.initial_macro(root)
        if session._macro.divergent:
            session.status = Status.DIVERGED
            session.verdict = Verdict(
                Outcome.DIVERGED, 0, frozenset(), len(session._macro)
            )

    verdict = session.verdict  # populated only on immediate divergence
    consumed = 0
    if verdict is None:
        for event in trace:
            if timings is not None:
                t0 = time.perf_counter()
                v = session.step_event(event)
                timings.append(time.perf_counter() - t0)
            else:
                v = session.step_event(event)
            consumed += 1
            if v.outcome is not Outcome.ACCEPTED:
                verdict = v
                break
        else:
            verdict = v if consumed else Verdict(
                Outcome.ACCEPTED, -1, frozenset(), session.frontier_size
            )
    elapsed = time.perf_counter() - start
    return TraceReport(
        verdict, consumed, elapsed,
        tuple(timings) if timings is not None else None,
    )


def acceptable_next(session: MonitorSession) -> frozenset:
    return session.acceptable_next()
