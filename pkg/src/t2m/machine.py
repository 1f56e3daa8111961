"""Machine graphs, configurations and the single-step interpreter.

Tapes are numbered 0 (input), 1 and 2 (work) and 3 (output).  The output
head only ever moves right, so the cells left of it are final.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Mapping, Optional, Sequence, Union

from .errors import PrefixUnavailable, ValidationError
from .seq import ZERO, EvSeq


# -- labels -------------------------------------------------------------------

def _check_tape(tape, allowed, what):
    if tape not in allowed:
        raise ValueError(f"{what} is only defined for tapes {sorted(allowed)}, not {tape}")


@dataclass(frozen=True)
class Start:
    out_degree = 1

    def text(self):
        return "s"


@dataclass(frozen=True)
class Branch:
    tape: int
    out_degree = 2

    def __post_init__(self):
        _check_tape(self.tape, (0, 1, 2), "branching")

    def text(self):
        return f"t{self.tape}"


@dataclass(frozen=True)
class MoveLeft:
    tape: int
    out_degree = 1

    def __post_init__(self):
        _check_tape(self.tape, (0, 1, 2), "head movement")

    def text(self):
        return f"l{self.tape}"


@dataclass(frozen=True)
class MoveRight:
    tape: int
    out_degree = 1

    def __post_init__(self):
        _check_tape(self.tape, (0, 1, 2), "head movement")

    def text(self):
        return f"r{self.tape}"


@dataclass(frozen=True)
class Write:
    tape: int
    bit: int
    out_degree = 1

    def __post_init__(self):
        _check_tape(self.tape, (1, 2, 3), "writing")
        if self.bit not in (0, 1):
            raise ValueError("only bits can be written")

    def text(self):
        return f"w{self.tape}={self.bit}"


@dataclass(frozen=True)
class Accept:
    out_degree = 0

    def text(self):
        return "accept"


@dataclass(frozen=True)
class Reject:
    out_degree = 0

    def text(self):
        return "reject"


@dataclass(frozen=True)
class Query:
    out_degree = 2

    def text(self):
        return "?"


Label = Union[Start, Branch, MoveLeft, MoveRight, Write, Accept, Reject, Query]


# -- graphs -------------------------------------------------------------------

class MachineGraph:
    """A labelled directed graph with a designated start vertex.

    ``successors[v]`` is ordered: for branches the first entry is taken on
    symbol 0 and the second on symbol 1; for queries the first is the
    continuation and the second starts the query computation.
    """

    def __init__(self, name: str, labels: Mapping[str, Label],
                 successors: Mapping[str, Sequence[str]], start: str,
                 layer_tags: Optional[Mapping[str, int]] = None):
        self.name = name
        self.labels = dict(labels)
        self.successors = {v: tuple(successors.get(v, ())) for v in self.labels}
        for v in successors:
            if v not in self.labels:
                raise ValidationError("DanglingSuccessor", v)
        self.start = start
        self.layer_tags = dict(layer_tags) if layer_tags is not None else None

    @property
    def vertices(self):
        return list(self.labels)

    def __len__(self):
        return len(self.labels)

    def __eq__(self, other):
        if not isinstance(other, MachineGraph):
            return NotImplemented
        return (self.name, self.start, self.labels, self.successors, self.layer_tags) == (
            other.name, other.start, other.labels, other.successors, other.layer_tags)

    def __hash__(self):
        return hash((self.name, self.start, len(self.labels)))

    def __repr__(self):
        return f"MachineGraph({self.name!r}, {len(self.labels)} vertices)"

    def query_vertices(self):
        return [v for v, lab in self.labels.items() if isinstance(lab, Query)]

    def is_query_free(self):
        return not self.query_vertices()

    def uses_tape(self, tape: int) -> bool:
        return any(getattr(lab, "tape", None) == tape for lab in self.labels.values())

    def renamed(self, name):
        return MachineGraph(name, self.labels, self.successors, self.start, self.layer_tags)

    @cached_property
    def program(self) -> "_Program":
        validate_graph(self)
        return _Program(self)


def validate_graph(m: MachineGraph) -> None:
    """Raise :class:`ValidationError` unless ``m`` satisfies the graph conditions."""
    starts = [v for v, lab in m.labels.items() if isinstance(lab, Start)]
    if m.start not in m.labels or not isinstance(m.labels[m.start], Start):
        raise ValidationError("NoStart", m.start)
    for v in starts:
        if v != m.start:
            raise ValidationError("MultipleStart", v)
    for v, lab in m.labels.items():
        succ = m.successors.get(v, ())
        if len(succ) != lab.out_degree:
            raise ValidationError("BadOutDegree", v)
        for w in succ:
            if w not in m.labels:
                raise ValidationError("DanglingSuccessor", v)
    for v, succ in m.successors.items():
        if m.start in succ:
            raise ValidationError("StartHasIncoming", m.start)


START, BRANCH, LEFT, RIGHT, WRITE, ACCEPT, REJECT, QUERY = range(8)
_OPCODE = {Start: START, Branch: BRANCH, MoveLeft: LEFT, MoveRight: RIGHT,
           Write: WRITE, Accept: ACCEPT, Reject: REJECT, Query: QUERY}


class _Program:
    """Integer-indexed form of a validated graph for the interpreter loop."""

    def __init__(self, m: MachineGraph):
        self.graph = m
        self.names = list(m.labels)
        index = {v: i for i, v in enumerate(self.names)}
        self.index = index
        self.ops, self.tapes, self.bits, self.s0, self.s1 = [], [], [], [], []
        for v in self.names:
            lab = m.labels[v]
            succ = m.successors[v]
            self.ops.append(_OPCODE[type(lab)])
            self.tapes.append(getattr(lab, "tape", -1))
            self.bits.append(getattr(lab, "bit", -1))
            self.s0.append(index[succ[0]] if len(succ) > 0 else -1)
            self.s1.append(index[succ[1]] if len(succ) > 1 else -1)
        self.start = index[m.start]


# -- configurations -----------------------------------------------------------

class Tape:
    """Mutable tape: explicit cells followed by a constant tail."""

    __slots__ = ("cells", "tail")

    def __init__(self, content: EvSeq = ZERO):
        self.cells = list(content.prefix)
        self.tail = content.tail

    def at(self, i):
        cells = self.cells
        return cells[i] if i < len(cells) else self.tail

    def write(self, i, b):
        cells = self.cells
        if i < len(cells):
            cells[i] = b
        elif b != self.tail:
            cells.extend([self.tail] * (i - len(cells)))
            cells.append(b)

    def copy(self):
        t = Tape.__new__(Tape)
        t.cells = list(self.cells)
        t.tail = self.tail
        return t

    def freeze(self) -> EvSeq:
        return EvSeq(tuple(self.cells), self.tail)

    @property
    def settled_from(self):
        return len(self.cells)


@dataclass(frozen=True)
class Configuration:
    vertex: str
    tapes: tuple
    heads: tuple = (0, 0, 0, 0)

    @classmethod
    def initial(cls, m: MachineGraph, input) -> "Configuration":
        return cls(m.start, (input, ZERO, ZERO, ZERO), (0, 0, 0, 0))


class Status(enum.Enum):
    ACCEPTED = "accepted"
    REJECTED = "rejected"
    STUCK = "stuck"
    FUEL_EXHAUSTED = "fuel_exhausted"
    QUERY_ENCOUNTERED = "query_encountered"
    QUERY_DIVERGED = "query_diverged"
    CALL_LIMIT_EXCEEDED = "call_limit_exceeded"
    # observation cut-off: the requested number of output symbols is written
    PREFIX_REACHED = "prefix_reached"
    # provably runs forever writing a constant tail; the limit output is exact
    LOOPING = "looping"
    # provably runs forever without writing another output symbol
    SILENT = "silent"
    # provably runs forever with an eventually periodic, non-constant output
    PERIODIC = "periodic"

    @property
    def has_output(self):
        return self in (Status.ACCEPTED, Status.LOOPING)


@dataclass(frozen=True)
class Halted:
    accepted: bool
    config: Configuration


@dataclass(frozen=True)
class Stuck:
    config: Configuration


@dataclass(frozen=True)
class QueryAt:
    vertex: str
    config: Configuration


@dataclass
class RunResult:
    status: Status
    output: object  # EvSeq when the full output is known, else the written prefix
    steps_used: int
    final: Optional[Configuration] = None

    @property
    def exact_output(self) -> Optional[EvSeq]:
        return self.output if isinstance(self.output, EvSeq) else None

    @property
    def written(self) -> int:
        if isinstance(self.output, EvSeq):
            return self.final.heads[3] if self.final is not None else len(self.output.prefix)
        return len(self.output)


def output_prefix(r: RunResult, k: int) -> list:
    if isinstance(r.output, EvSeq):
        return list(r.output.take(k))
    if k > len(r.output):
        raise PrefixUnavailable(k, len(r.output))
    return list(r.output[:k])


# -- interpreter --------------------------------------------------------------

class Fuel:
    """A step budget shared by a run and every computation it spawns."""

    __slots__ = ("left",)

    def __init__(self, steps: int):
        self.left = steps


class InputUnavailable(Exception):
    """Raised by lazy input tapes whose producer stopped before the read position."""

    def __init__(self, status: Status):
        self.status = status
        super().__init__(status.value)


class Execution:
    """One running configuration of a graph.

    ``handler`` resolves query vertices; it receives the execution, and either
    returns a terminal :class:`Status` or updates ``v``, ``tapes[2]`` and
    ``heads[2]`` itself.  Without a handler a query ends the run with
    ``QUERY_ENCOUNTERED``.
    """

    def __init__(self, program: _Program, input, fuel: Fuel, *, handler=None,
                 vertex: Optional[int] = None, tapes=None, heads=None,
                 detect_cycles=False, prefix_goal=None, trace=None):
        self.prog = program
        self.fuel = fuel
        self.handler = handler
        self.v = program.start if vertex is None else vertex
        if tapes is None:
            tapes = [input, Tape(), Tape(), Tape()]
        self.tapes = tapes
        self.heads = list(heads) if heads is not None else [0, 0, 0, 0]
        self.steps = 0
        self.status: Optional[Status] = None
        self.limit: Optional[EvSeq] = None
        self.prefix_goal = prefix_goal
        self.trace = trace
        self.detect = detect_cycles
        self._anchors = {}

    # output access used by lazy consumers
    @property
    def n3(self):
        return self.heads[3]

    def out_at(self, i):
        return self.tapes[3].at(i)

    def spawn(self, handler, *, detect_cycles=True):
        """Copy of this configuration at the query successor, output erased."""
        t = self.tapes
        return Execution(self.prog, t[0], self.fuel, handler=handler,
                         vertex=self.prog.s1[self.v],
                         tapes=[t[0], t[1].copy(), t[2].copy(), Tape()],
                         heads=[self.heads[0], self.heads[1], self.heads[2], 0],
                         detect_cycles=detect_cycles)

    def advance(self) -> Optional[Status]:
        if self.status is not None:
            return self.status
        prog = self.prog
        v = self.v
        op = prog.ops[v]
        if op == ACCEPT:
            self.status = Status.ACCEPTED
            return self.status
        if op == REJECT:
            self.status = Status.REJECTED
            return self.status
        h = self.heads
        if self.prefix_goal is not None and h[3] >= self.prefix_goal:
            self.status = Status.PREFIX_REACHED
            return self.status
        if self.fuel.left <= 0:
            self.status = Status.FUEL_EXHAUSTED
            return self.status
        tp = prog.tapes[v]
        written = None
        if op == START:
            self.v = prog.s0[v]
        elif op == BRANCH:
            sym = self.tapes[tp].at(h[tp])
            if sym == 0:
                self.v = prog.s0[v]
            elif sym == 1:
                self.v = prog.s1[v]
            else:
                self.status = Status.STUCK
                return self.status
        elif op == LEFT:
            if h[tp] == 0:
                self.status = Status.STUCK
                return self.status
            h[tp] -= 1
            if self._anchors:
                pos = h[tp]
                for key in [k for k, a in self._anchors.items() if a[0][tp] > pos]:
                    del self._anchors[key]
            self.v = prog.s0[v]
        elif op == RIGHT:
            h[tp] += 1
            self.v = prog.s0[v]
        elif op == WRITE:
            b = prog.bits[v]
            self.tapes[tp].write(h[tp], b)
            if self.trace is not None:
                written = {"tape": tp, "pos": h[tp], "bit": b}
            h[tp] += 1
            self.v = prog.s0[v]
        else:  # QUERY
            if self.handler is None:
                self.status = Status.QUERY_ENCOUNTERED
                return self.status
            outcome = self.handler(self)
            if outcome is not None:
                self.status = outcome
                return outcome
            self._anchors.clear()
        self.fuel.left -= 1
        self.steps += 1
        if self.trace is not None:
            rec = {"step": self.steps, "vertex": prog.names[v],
                   "label": prog.graph.labels[prog.names[v]].text(), "heads": list(h)}
            if written is not None:
                rec["written"] = written
            self.trace.append(rec)
        if self.detect and op != QUERY:
            self._check_cycle()
        return self.status

    def _check_cycle(self):
        # Sound loop detection.  A vertex repeats, no head dipped below its
        # position at the earlier visit, and every tape looks the same from the
        # head onwards: either only tail cells lie ahead (the head may have
        # advanced), or the head is back on the same cell over unchanged
        # content.  The segment in between then replays forever.
        h = self.heads
        t = self.tapes
        if t[0].settled_from is None:
            return
        view = []
        for i in (0, 1, 2):
            settled = t[i].settled_from
            if h[i] >= settled:
                view.append(None)
            elif i == 0:
                view.append(h[0])
            else:
                view.append((h[i], tuple(t[i].cells[h[i]:])))
        if h[3] < len(t[3].cells):
            return
        state = ((h[0], h[1], h[2], h[3]), tuple(view))
        anchor = self._anchors.get(self.v)
        self._anchors[self.v] = state
        if anchor is None or anchor[1] != state[1]:
            return
        a = anchor[0]
        out = t[3]
        if h[3] == a[3]:
            self.status = Status.SILENT
            return
        pattern = {out.at(i) for i in range(a[3], h[3])}
        if len(pattern) == 1:
            self.limit = EvSeq(tuple(out.at(i) for i in range(a[3])), pattern.pop())
            self.status = Status.LOOPING
        else:
            self.status = Status.PERIODIC

    def run_to_end(self) -> Status:
        try:
            while self.status is None:
                self.advance()
        except InputUnavailable as stop:
            self.status = stop.status
        return self.status

    def snapshot(self) -> Configuration:
        t = self.tapes
        return Configuration(self.prog.names[self.v],
                             (t[0], t[1].freeze(), t[2].freeze(), t[3].freeze()),
                             tuple(self.heads))

    def written_prefix(self) -> tuple:
        out = self.tapes[3]
        return tuple(out.at(i) for i in range(self.heads[3]))

    def result(self) -> RunResult:
        if self.status is Status.ACCEPTED:
            output = self.tapes[3].freeze()
        elif self.status is Status.LOOPING:
            output = self.limit
        else:
            output = self.written_prefix()
        return RunResult(self.status, output, self.steps, self.snapshot())


def start_execution(m, input, fuel: Fuel, handler=None, **options):
    """Begin executing a graph or any object providing ``start_execution``."""
    if isinstance(m, MachineGraph):
        return Execution(m.program, input, fuel, handler=handler, **options)
    return m.start_execution(input, fuel, handler=handler, **options)


def _from_configuration(m: MachineGraph, c: Configuration, fuel, handler=None):
    prog = m.program
    tapes = [c.tapes[0]] + [Tape(c.tapes[i]) for i in (1, 2, 3)]
    return Execution(prog, c.tapes[0], fuel, handler=handler, vertex=prog.index[c.vertex],
                     tapes=tapes, heads=c.heads)


def step(m: MachineGraph, c: Configuration):
    """One transition of the plain relation; queries are reported, not resolved."""
    label = m.labels[c.vertex]
    if isinstance(label, (Accept, Reject)):
        return Halted(isinstance(label, Accept), c)
    if isinstance(label, Query):
        return QueryAt(c.vertex, c)
    ex = _from_configuration(m, c, Fuel(1))
    status = ex.advance()
    if status is Status.STUCK:
        return Stuck(c)
    return ex.snapshot()


def run(m, input, fuel: int, query_handler: Optional[Callable] = None, *,
        detect_cycles=False, prefix_goal=None, trace=None) -> RunResult:
    """Run from the initial configuration until a terminal status.

    ``detect_cycles`` recognises runs that provably continue forever (see
    :class:`Status`); ``prefix_goal`` stops once that many output symbols are
    written.  ``trace``, when a list, receives one record per transition.
    """
    ex = start_execution(m, input, Fuel(fuel), query_handler, detect_cycles=detect_cycles,
                         prefix_goal=prefix_goal, trace=trace)
    ex.run_to_end()
    return ex.result()
