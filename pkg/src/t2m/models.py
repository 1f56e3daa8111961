"""MAX from repeated LPO calls, finitely revising output and the halting demo."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

from .errors import (BudgetExceeded, DecodeError, CallBudgetExceeded, CertificateRefuted,
                     CertificateUnverifiable, QueryUndecidedWithinFuel)
from .machine import Execution, Fuel, MachineGraph, Status, run
from .oracle import Oracle, OracleHandler, lpo
from .seq import ONE_ZEROS, ZERO, EvSeq

MARK = 2


def threshold(w: EvSeq, n: int) -> EvSeq:
    """``w^n(i) = 1`` iff ``w(i) > n``."""
    return EvSeq(tuple(int(s > n) for s in w.prefix), int(w.tail > n))


# -- MAX by an LPO loop --------------------------------------------------------

def max_by_lpo_loop(w: EvSeq, oracle_budget: Optional[int] = None,
                    oracle: Optional[Oracle] = None) -> tuple:
    """Ask LPO about ``w^0, w^1, ...`` until the answer is ``0^N``.

    Returns ``(value, calls, trace)`` where ``trace`` lists
    ``(n, query, answer)`` per call.
    """
    oracle = oracle or lpo()
    trace = []
    n = 0
    while True:
        if oracle_budget is not None and len(trace) >= oracle_budget:
            raise BudgetExceeded(f"no zero answer within {oracle_budget} calls")
        q = threshold(w, n)
        a = oracle(q)
        trace.append((n, q, a))
        if a.is_zero():
            return n, len(trace), trace
        n += 1


# -- revising output -----------------------------------------------------------

@dataclass(frozen=True)
class RevisingStream:
    """Output over ``{0, 1, MARK}``; each MARK discards everything before it.

    ``complete`` is false when only a prefix of the stream was produced; the
    tail symbol is then a placeholder.
    """

    symbols: EvSeq
    complete: bool = True
    status: Optional[Status] = None

    def __post_init__(self):
        if self.symbols.tail == MARK:
            raise ValueError("a revising stream cannot end in infinitely many marks")

    @property
    def mark_count(self) -> int:
        return self.symbols.prefix.count(MARK)


def revising_decode(s: RevisingStream) -> EvSeq:
    p = s.symbols.prefix
    last = max((i for i, b in enumerate(p) if b == MARK), default=-1)
    return EvSeq(p[last + 1:], s.symbols.tail)


_BLOCKS = {0: (0, 0), 1: (0, 1), MARK: (1, 0)}
_SYMBOLS = {v: k for k, v in _BLOCKS.items()}


def revising_to_bits(s: RevisingStream) -> EvSeq:
    """Binary form of a stream: 00 for 0, 01 for 1, 10 for MARK."""
    cells = [b for sym in s.symbols.prefix for b in _BLOCKS[sym]]
    if s.symbols.tail == 0:
        return EvSeq(tuple(cells), 0)
    # tail 1 is the repeated block 01, which is not eventually constant
    raise ValueError("only streams with tail 0 have an eventually constant block encoding")


def revising_from_bits(b: EvSeq) -> RevisingStream:
    if b.tail != 0 or not b.is_binary():
        raise DecodeError(f"{b} is not a block-encoded revising stream")
    cells = b.prefix + (0,) * (len(b.prefix) % 2)
    syms = []
    for i in range(0, len(cells), 2):
        pair = (cells[i], cells[i + 1])
        if pair not in _SYMBOLS:
            raise DecodeError(f"block {pair} at {i} is not a symbol")
        syms.append(_SYMBOLS[pair])
    return RevisingStream(EvSeq(tuple(syms), 0))


def revising_to_max(s: RevisingStream) -> tuple:
    """The MAX query for ``s`` and the map from its answer to the output.

    The query at position i is the largest position right after a mark at or
    before i, so its maximum is where the final output starts.
    """
    p = s.symbols.prefix
    q, best = [], 0
    for i, b in enumerate(p):
        if b == MARK:
            best = max(best, i + 1)
        q.append(best)

    def suffix(n: int) -> EvSeq:
        return s.symbols.drop(n)
    return EvSeq(tuple(q), best), suffix


@dataclass
class _Pending:
    checkpoint: tuple  # (vertex, tapes, heads, output length)
    query: Execution
    seen: int = 0


def _checkpoint(ex: Execution):
    t = ex.tapes
    return (ex.v, [t[0], t[1].copy(), t[2].copy(), t[3].copy()], list(ex.heads))


def simulate_lpo_by_revising(m: MachineGraph, input: EvSeq, fuel: int = 1_000_000,
                             call_budget: int = 64, min_output: int = 64) -> RevisingStream:
    """Run ``m`` as if every LPO answer were ``0^N``, checking queries alongside.

    Main computation and pending queries advance round-robin, one step each.
    When a query writes a 1 the stream gets a MARK, the main computation is
    restored to the moment of that query, and it continues with ``10^N``.
    """
    prog = m.program
    shared = Fuel(fuel)
    pending: list = []
    calls = [0]
    emitted: list = []
    streamed = [0]

    def on_query(ex):
        if calls[0] >= call_budget:
            raise CallBudgetExceeded(f"more than {call_budget} oracle calls")
        calls[0] += 1
        cp = _checkpoint(ex)
        pending.append(_Pending(cp, ex.spawn(None)))
        OracleHandler.resume(ex, ZERO)
        return None

    def start(cp, answer):
        v, tapes, heads = cp
        ex = Execution(prog, input, shared, handler=on_query, vertex=v,
                       tapes=[tapes[0], tapes[1].copy(), tapes[2].copy(), tapes[3].copy()],
                       heads=heads, detect_cycles=True)
        if answer is not None:
            OracleHandler.resume(ex, answer)
        return ex

    main = Execution(prog, input, shared, handler=on_query, detect_cycles=True)

    def stream_main():
        while streamed[0] < main.n3:
            emitted.append(main.out_at(streamed[0]))
            streamed[0] += 1

    def since_mark():
        last = max((i for i, b in enumerate(emitted) if b == MARK), default=-1)
        return len(emitted) - last - 1

    while True:
        if main.status is Status.PERIODIC:
            main.status = None
            main.detect = False
        if main.status is None:
            main.advance()
            stream_main()
        hit = None
        for k, p in enumerate(pending):
            q = p.query
            if q.status is None:
                q.advance()
            cells = q.tapes[3].cells
            upto = min(q.n3, len(cells))
            if any(cells[p.seen:upto]):
                hit = k
                break
            p.seen = upto
            if q.status is None:
                continue
            if q.status is Status.LOOPING and q.limit.tail == 1:
                hit = k
                break
            if q.status in (Status.ACCEPTED, Status.LOOPING):
                p.query = None  # confirmed all-zero
            elif q.status is Status.FUEL_EXHAUSTED:
                raise QueryUndecidedWithinFuel(f"query {k} undecided after {fuel} steps")
            else:
                raise QueryUndecidedWithinFuel(f"query {k} has no infinite output: {q.status.value}")
        if hit is not None:
            p = pending[hit]
            del pending[hit:]
            main = start(p.checkpoint, ONE_ZEROS)
            emitted.append(MARK)
            streamed[0] = 0
            stream_main()
            continue
        pending[:] = [p for p in pending if p.query is not None]
        done = main.status is not None and main.status is not Status.PERIODIC
        if not pending and (done or since_mark() >= min_output):
            break
        if shared.left <= 0:
            if pending:
                raise QueryUndecidedWithinFuel(f"{len(pending)} queries open when fuel ran out")
            break
    if main.status is Status.ACCEPTED:
        return RevisingStream(EvSeq(tuple(emitted), main.tapes[3].tail), True, main.status)
    if main.status is Status.LOOPING:
        rest = main.limit.drop(main.n3)
        return RevisingStream(EvSeq(tuple(emitted) + rest.prefix, rest.tail), True, main.status)
    complete = main.status in (Status.REJECTED, Status.STUCK, Status.SILENT,
                               Status.QUERY_ENCOUNTERED)
    return RevisingStream(EvSeq(tuple(emitted), 0), complete, main.status)


# -- halting ---------------------------------------------------------------------

@dataclass(frozen=True)
class Halts:
    step: int


@dataclass(frozen=True)
class Loops:
    pass


Certificate = Union[Halts, Loops]


@dataclass
class HaltingVerdict:
    verdict: str  # "halts" or "loops"
    query: EvSeq
    answer: EvSeq
    checked_steps: int


def halting_query(subject: MachineGraph, steps: int, input: EvSeq = ZERO) -> tuple:
    """Prefix of the query stream (one 0 per running step, 1 at the halt)."""
    r = run(subject, input, steps)
    if r.status in (Status.ACCEPTED, Status.REJECTED):
        return (0,) * r.steps_used + (1,), True
    return (0,) * r.steps_used, False


def parse_certificate(text: str) -> Certificate:
    text = text.strip().lower()
    if text == "loops":
        return Loops()
    if text.startswith("halts:"):
        return Halts(int(text[6:]))
    raise ValueError(f"certificate must be 'halts:<step>' or 'loops', not {text!r}")


def halting_demo(subject: MachineGraph, certificate: Certificate, fuel: int = 1_000_000,
                 input: EvSeq = ZERO, oracle: Optional[Oracle] = None) -> HaltingVerdict:
    """Decide halting of ``subject`` with one LPO call on its step stream.

    The stream cannot be computed to the end when the subject runs forever,
    so the caller supplies a certificate.  ``Halts(step)`` is replayed exactly
    within ``fuel``; ``Loops`` is checked for ``fuel`` steps and the
    certified stream is ``0^N``.
    """
    oracle = oracle or lpo()
    if isinstance(certificate, Halts):
        if certificate.step > fuel:
            raise CertificateUnverifiable(f"halting step {certificate.step} exceeds fuel {fuel}")
        cells, halted = halting_query(subject, certificate.step, input)
        if not halted:
            raise CertificateRefuted(f"{subject.name} still runs after {certificate.step} steps")
        query = EvSeq(cells, 0)
        checked = len(cells) - 1
    else:
        cells, halted = halting_query(subject, fuel, input)
        if halted:
            raise CertificateRefuted(f"{subject.name} halts after {len(cells) - 1} steps")
        query = ZERO
        checked = len(cells)
    answer = oracle(query)
    return HaltingVerdict("loops" if answer.is_zero() else "halts", query, answer, checked)
