"""Machine transformations.

* :func:`separate_layers` tags every vertex with the nesting level at which
  it can run and cuts queries below the last level.
* :func:`compose_machines` chains two machines so that the second reads the
  output of the first as it is produced.
* :func:`split_single_call` / :func:`join_witness` convert between machines
  making one oracle call and pre/post-processor pairs.
* :func:`inline_computable_oracle` checks that one query level over a
  computable oracle can be replaced by direct simulation.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from .errors import MultipleCalls, OracleDivergence, WitnessDiverged
from .machine import (Branch, InputUnavailable, MachineGraph, MoveLeft, MoveRight, Query,
                      Reject, RunResult, Start, Status, run, start_execution)
from .oracle import (Observation, Oracle, OracleRunResult, computable_oracle,
                     constant_oracle, lpo, observe, run_with_oracle)
from .seq import interleave_view


# -- layer separation ---------------------------------------------------------

@dataclass
class LayeredMachine:
    graph: MachineGraph
    depth: int

    @property
    def name(self):
        return self.graph.name

    def start_execution(self, input, fuel, handler=None, **options):
        return start_execution(self.graph, input, fuel, handler, **options)


def layer_name(v: str, j: int) -> str:
    return f"{v}__L{j}"


def separate_layers(m: MachineGraph, n: int) -> LayeredMachine:
    """Copy ``m`` once per nesting level 0..n.

    The start vertex stays outside the copies and enters level 0.  The query
    successor of a level-i query vertex points into level i+1; query vertices
    on level n become reject vertices.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    labels, succ, tags = {}, {}, {}
    labels[m.start] = Start()
    succ[m.start] = (layer_name(m.successors[m.start][0], 0),)
    tags[m.start] = 0
    for j in range(n + 1):
        for v, lab in m.labels.items():
            if v == m.start:
                continue
            name = layer_name(v, j)
            tags[name] = j
            targets = m.successors[v]
            if isinstance(lab, Query):
                if j == n:
                    labels[name] = Reject()
                    succ[name] = ()
                else:
                    labels[name] = lab
                    succ[name] = (layer_name(targets[0], j), layer_name(targets[1], j + 1))
            else:
                labels[name] = lab
                succ[name] = tuple(layer_name(t, j) for t in targets)
    g = MachineGraph(f"{m.name}_layered{n}", labels, succ, m.start, tags)
    return LayeredMachine(g, n)


def layer_violations(g: MachineGraph, n: Optional[int] = None) -> list:
    """Vertices breaking the layer-numbering conditions, as (vertex, reason)."""
    tags = g.layer_tags or {}
    bad = []
    for v in g.labels:
        if v not in tags:
            bad.append((v, "untagged"))
            continue
        if n is not None and not 0 <= tags[v] <= n:
            bad.append((v, "tag out of range"))
    if bad:
        return bad
    for v, lab in g.labels.items():
        s = g.successors[v]
        if isinstance(lab, Query):
            if tags[s[0]] != tags[v]:
                bad.append((v, "continuation changes layer"))
            if tags[s[1]] != tags[v] + 1:
                bad.append((v, "query successor not on the next layer"))
            if n is not None and tags[v] >= n:
                bad.append((v, "query on the last layer"))
        else:
            for w in s:
                if tags[w] != tags[v]:
                    bad.append((v, "successor changes layer"))
    return bad


# -- composition --------------------------------------------------------------

class LazyOutput:
    """Input tape backed by another execution's output, produced on demand."""

    def __init__(self, upstream):
        self.up = upstream

    @property
    def settled_from(self):
        up = self.up
        if up.status is Status.ACCEPTED:
            return up.tapes[3].settled_from
        if up.status is Status.LOOPING:
            return up.limit.settled_from
        return None

    def _pump(self, i):
        up = self.up
        try:
            while up.n3 <= i:
                if up.status is Status.PERIODIC:
                    # the output is infinite, just not constant: keep producing
                    up.status = None
                    up.detect = False
                if up.status is not None:
                    return
                up.advance()
        except InputUnavailable as stop:
            up.status = stop.status

    def at(self, i):
        up = self.up
        if up.n3 <= i and up.status is None or up.status is Status.PERIODIC:
            self._pump(i)
        if i < up.n3:
            return up.out_at(i)
        if up.status is Status.ACCEPTED:
            return up.tapes[3].at(i)
        if up.status is Status.LOOPING:
            return up.limit.at(i)
        raise InputUnavailable(up.status)

    def take(self, k):
        return tuple(self.at(i) for i in range(k))


class ComposedMachine:
    """Runs ``second`` on the output of ``first``; both share the oracle and fuel."""

    def __init__(self, first, second, name=None):
        self.first = first
        self.second = second
        self.name = name or f"{first.name}_then_{second.name}"

    def is_query_free(self):
        return self.first.is_query_free() and self.second.is_query_free()

    def start_execution(self, input, fuel, handler=None, *, detect_cycles=False,
                        prefix_goal=None, trace=None):
        up = start_execution(self.first, input, fuel, handler, detect_cycles=True)
        return start_execution(self.second, LazyOutput(up), fuel, handler,
                               detect_cycles=detect_cycles, prefix_goal=prefix_goal, trace=trace)

    def __repr__(self):
        return f"ComposedMachine({self.first!r}, {self.second!r})"


def compose_machines(m0, m1) -> ComposedMachine:
    """A machine computing ``m1`` after ``m0``."""
    return ComposedMachine(m0, m1)


def count_queries(result: OracleRunResult) -> tuple:
    """(total calls over all nesting levels, calls made at the top level)."""
    return result.total_calls, len(result.calls)


# -- single calls -------------------------------------------------------------

class _NoCall:
    def __repr__(self):
        return "NO_CALL"


NO_CALL = _NoCall()


class _Captured(Exception):
    def __init__(self, x):
        self.x = x


def _capture(x):
    raise _Captured(x)


_CAPTURE = Oracle("capture", _capture)


@dataclass
class SplitWitness:
    """Pre- and post-processor extracted from a single-call machine.

    ``G(w)`` is the query the machine asks on ``w`` (or ``NO_CALL``);
    ``F(w, y)`` is its output when that call is answered by ``y``.
    """

    machine: object
    fuel: int = 1_000_000
    name: str = ""

    def G(self, w, fuel=None):
        try:
            r = run_with_oracle(self.machine, _CAPTURE, w, 1, fuel or self.fuel,
                                detect_cycles=True)
        except _Captured as c:
            return c.x
        if r.status is Status.QUERY_DIVERGED:
            raise WitnessDiverged(w, f"query computation: {r.diverged_query}")
        return NO_CALL

    def F(self, w, y, fuel=None, prefix_goal=None) -> RunResult:
        o = constant_oracle(y) if y is not NO_CALL and y is not None else _CAPTURE
        limit = 0 if o is _CAPTURE else 1
        return run_with_oracle(self.machine, o, w, 1, fuel or self.fuel, call_limit=limit,
                               detect_cycles=True, prefix_goal=prefix_goal).base


def split_single_call(m, samples: Sequence, oracle: Optional[Oracle] = None,
                      fuel: int = 1_000_000) -> tuple:
    """Return ``(G_fn, F_fn)`` for a machine that calls its oracle at most once.

    The precondition is checked on ``samples`` with ``oracle`` (LPO by default)
    at depth 1; a second call raises :class:`MultipleCalls`.
    """
    oracle = oracle or lpo()
    for w in samples:
        r = run_with_oracle(m, oracle, w, 1, fuel, call_limit=1, detect_cycles=True,
                            prefix_goal=64)
        if r.status is Status.CALL_LIMIT_EXCEEDED:
            raise MultipleCalls(w)
    s = SplitWitness(m, fuel, m.name)
    return s.G, s.F


# -- joining pre/post-processors ----------------------------------------------

def _graph_join(F: MachineGraph, G: MachineGraph, name: str) -> MachineGraph:
    # F reads its input <w, y> through a parity bit kept in the finite control:
    # virtual position 2k sits on w(k) (tape 0), 2k+1 on y(k) (tape 2), and
    # heads 0 and 2 both rest on k.
    labels, succ = {}, {}
    entry_g = "g_" + G.successors[G.start][0]
    labels["j_s"], succ["j_s"] = Start(), ("j_q",)
    labels["j_q"], succ["j_q"] = Query(), (f"f_{F.successors[F.start][0]}_e", entry_g)
    for v, lab in G.labels.items():
        if v != G.start:
            labels["g_" + v] = lab
            succ["g_" + v] = tuple("g_" + t for t in G.successors[v])

    def fv(v, par):
        return f"f_{v}_{par}"

    for v, lab in F.labels.items():
        if v == F.start:
            continue
        s = F.successors[v]
        for par, other in (("e", "o"), ("o", "e")):
            me = fv(v, par)
            if isinstance(lab, Branch) and lab.tape == 0:
                tape = 0 if par == "e" else 2
                labels[me], succ[me] = Branch(tape), (fv(s[0], par), fv(s[1], par))
            elif isinstance(lab, MoveRight) and lab.tape == 0:
                if par == "e":
                    labels[me], succ[me] = Branch(1), (fv(s[0], "o"), fv(s[0], "o"))
                else:
                    labels[me], succ[me] = MoveRight(0), (me + "2",)
                    labels[me + "2"], succ[me + "2"] = MoveRight(2), (fv(s[0], "e"),)
            elif isinstance(lab, MoveLeft) and lab.tape == 0:
                if par == "o":
                    labels[me], succ[me] = Branch(1), (fv(s[0], "e"), fv(s[0], "e"))
                else:
                    labels[me], succ[me] = MoveLeft(0), (me + "2",)
                    labels[me + "2"], succ[me + "2"] = MoveLeft(2), (fv(s[0], "o"),)
            else:
                labels[me], succ[me] = lab, tuple(fv(t, par) for t in s)
    return MachineGraph(name, labels, succ, "j_s")


class _JoinedExecution:
    def __init__(self, jm, input, fuel, handler, prefix_goal):
        self.jm = jm
        self.input = input
        self.fuel = fuel
        self.handler = handler
        self.prefix_goal = prefix_goal
        self.status = None
        self.steps = 0
        self._result = None

    def run_to_end(self):
        if self.status is not None:
            return self.status
        w = self.input
        x = self.jm.G(w)
        y = NO_CALL
        if x is not NO_CALL:
            if self.handler is None:
                y = Status.QUERY_ENCOUNTERED
            else:
                y = self.handler.external(x)
            if isinstance(y, Status):
                self.status = y
                self._result = RunResult(y, (), 0, None)
                return y
        r = self.jm.F(w, y, fuel=max(self.fuel.left, 1), prefix_goal=self.prefix_goal)
        self.fuel.left -= r.steps_used
        self.steps = r.steps_used
        self._result = r
        self.status = r.status
        return self.status

    def result(self):
        return self._result


class JoinedMachine:
    """Interpreter-backed machine making one call: ``w -> F(w, o(G(w)))``.

    ``G(w)`` returns the query or ``NO_CALL``; ``F(w, y)`` returns a
    :class:`RunResult`.
    """

    def __init__(self, F: Callable, G: Callable, name="joined"):
        self.F = F
        self.G = G
        self.name = name

    def is_query_free(self):
        return False

    def start_execution(self, input, fuel, handler=None, *, detect_cycles=False,
                        prefix_goal=None, trace=None):
        return _JoinedExecution(self, input, fuel, handler, prefix_goal)


def graph_pre(G: MachineGraph, fuel: int = 1_000_000):
    """A query-free machine as a pre-processor callable."""
    def pre(w, fuel_=None):
        r = run(G, w, fuel_ or fuel, detect_cycles=True)
        if not r.status.has_output:
            raise WitnessDiverged(w, f"{G.name}: {r.status.value}")
        return r.output
    return pre


def graph_post(F: MachineGraph, fuel: int = 1_000_000):
    """A query-free machine reading ``<w, y>`` as a post-processor callable."""
    def post(w, y, fuel=fuel, prefix_goal=None):
        return run(F, interleave_view(w, y), fuel, detect_cycles=True, prefix_goal=prefix_goal)
    return post


def join_witness(F, G, name: Optional[str] = None):
    """One-call machine from a post-processor ``F`` and a pre-processor ``G``.

    With two graphs (``F`` not using work tape 2) the result is a plain
    :class:`MachineGraph` with a single query vertex.  Callables give a
    :class:`JoinedMachine`.
    """
    if isinstance(F, MachineGraph) and isinstance(G, MachineGraph):
        if not (F.is_query_free() and G.is_query_free()):
            raise ValueError("witness machines must be query-free")
        if F.uses_tape(2):
            return JoinedMachine(graph_post(F), graph_pre(G), name or f"join_{F.name}_{G.name}")
        return _graph_join(F, G, name or f"join_{F.name}_{G.name}")
    if isinstance(F, MachineGraph):
        F = graph_post(F)
    if isinstance(G, MachineGraph):
        G = graph_pre(G)
    return JoinedMachine(F, G, name or "joined")


# -- computable oracles -------------------------------------------------------

@dataclass
class InlineReport:
    machine: str
    depth: int
    per_sample: list = field(default_factory=list)  # (input, with oracle, inlined, agree)

    @property
    def passed(self) -> bool:
        return all(row[3] for row in self.per_sample)


def _guarded(fn):
    try:
        return fn()
    except OracleDivergence:
        return Observation("none")


def inline_computable_oracle(m, g: MachineGraph, depth: int, samples: Sequence,
                             fuel: int = 1_000_000, prefix_len: int = 64) -> InlineReport:
    """Compare depth ``depth`` against depth ``depth - 1`` with the last level inlined.

    On the reduced side a query met with no depth left is answered by running
    the query computation and then ``g`` on its output directly, without an
    oracle call.
    """
    if depth < 1:
        raise ValueError("depth must be at least 1")
    o = computable_oracle(g, fuel)
    report = InlineReport(getattr(m, "name", "?"), depth)
    kw = dict(detect_cycles=True, prefix_goal=prefix_len)
    for x in samples:
        a = _guarded(lambda: observe(run_with_oracle(m, o, x, depth, fuel, **kw).base, prefix_len))
        b = _guarded(lambda: observe(
            run_with_oracle(m, o, x, depth - 1, fuel, inline=g, **kw).base, prefix_len))
        report.per_sample.append((x, a, b, a == b))
    return report
