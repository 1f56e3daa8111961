"""Eventually-constant sequences over the naturals and the pairing machinery.

An :class:`EvSeq` is a finite prefix followed by one symbol repeated forever.
Every tape a machine can reach from an eventually-constant input is again
eventually constant, so these values are exact stand-ins for points of
Baire space as far as finite computations are concerned.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import DecodeError, MixedTails, SeqSyntaxError, TailNotZero


@dataclass(frozen=True)
class EvSeq:
    prefix: tuple = ()
    tail: int = 0

    def __post_init__(self):
        prefix = tuple(int(s) for s in self.prefix)
        tail = int(self.tail)
        if tail < 0 or any(s < 0 for s in prefix):
            raise ValueError("symbols must be natural numbers")
        end = len(prefix)
        while end and prefix[end - 1] == tail:
            end -= 1
        object.__setattr__(self, "prefix", prefix[:end])
        object.__setattr__(self, "tail", tail)

    def at(self, i: int) -> int:
        return self.prefix[i] if i < len(self.prefix) else self.tail

    def take(self, k: int) -> tuple:
        return tuple(self.at(i) for i in range(k))

    def drop(self, k: int) -> "EvSeq":
        return EvSeq(self.prefix[k:], self.tail)

    def with_symbol(self, i: int, b: int) -> "EvSeq":
        cells = list(self.prefix) + [self.tail] * max(0, i + 1 - len(self.prefix))
        cells[i] = b
        return EvSeq(tuple(cells), self.tail)

    @property
    def settled_from(self) -> int:
        """Every position at or beyond this index holds ``tail``."""
        return len(self.prefix)

    def is_binary(self) -> bool:
        return self.tail in (0, 1) and all(s in (0, 1) for s in self.prefix)

    def is_zero(self) -> bool:
        return not self.prefix and self.tail == 0

    def symbols(self) -> set:
        return set(self.prefix) | {self.tail}

    def sort_key(self):
        # length-lexicographic on the canonical form
        return (len(self.prefix), self.prefix, self.tail)

    @classmethod
    def parse(cls, text: str) -> "EvSeq":
        text = text.strip()
        if text.count(":") != 1:
            raise SeqSyntaxError(f"expected 'prefix:tail', got {text!r}")
        head, tail = text.split(":")
        try:
            if "," in head:
                toks = head.split(",")
                if toks[-1] == "" and len(toks) == 2:
                    toks.pop()  # "10,:0" is the one-symbol form
                prefix = tuple(int(tok) for tok in toks)
            else:
                prefix = tuple(int(ch) for ch in head)
            return cls(prefix, int(tail))
        except ValueError:
            raise SeqSyntaxError(f"bad sequence literal {text!r}") from None

    def __str__(self):
        if any(s > 9 for s in self.prefix):
            head = ",".join(map(str, self.prefix))
            if len(self.prefix) == 1:
                head += ","
        else:
            head = "".join(map(str, self.prefix))
        return f"{head}:{self.tail}"

    def __repr__(self):
        return f"EvSeq({str(self)!r})"


ZERO = EvSeq()
ONE_ZEROS = EvSeq((1,), 0)


def make_seq(prefix: Iterable[int], tail: int) -> EvSeq:
    return EvSeq(tuple(prefix), tail)


def seq(text: str) -> EvSeq:
    """Shorthand for :meth:`EvSeq.parse`."""
    return EvSeq.parse(text)


# -- pairing ------------------------------------------------------------------

def cantor_pair(i: int, j: int) -> int:
    return (i + j) * (i + j + 1) // 2 + j


def cantor_unpair(k: int) -> tuple:
    w = (math.isqrt(8 * k + 1) - 1) // 2
    j = k - w * (w + 1) // 2
    return w - j, j


@dataclass(frozen=True)
class SeqTuple:
    """A finite-support tuple of sequences; absent components read as 0^N."""

    components: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))

    def __len__(self):
        return len(self.components)

    def component(self, i: int) -> EvSeq:
        return self.components[i] if i < len(self.components) else ZERO


def lambda_pack(t) -> EvSeq:
    """Pack a finite-support tuple into one sequence via Cantor pairing.

    Components must have tail 0: a non-zero tail would put that symbol on
    infinitely many scattered positions, which is not eventually constant.
    """
    comps = t.components if isinstance(t, SeqTuple) else tuple(t)
    for c in comps:
        if c.tail != 0:
            raise TailNotZero(f"component {c} has non-zero tail")
    length = 0
    for i, c in enumerate(comps):
        if c.prefix:
            length = max(length, cantor_pair(i, len(c.prefix) - 1) + 1)
    cells = [0] * length
    for i, c in enumerate(comps):
        for j, s in enumerate(c.prefix):
            cells[cantor_pair(i, j)] = s
    return EvSeq(tuple(cells), 0)


def lambda_unpack(s: EvSeq, count: int) -> SeqTuple:
    if s.tail != 0:
        raise TailNotZero(f"{s} has non-zero tail")
    n = len(s.prefix)
    comps = []
    for i in range(count):
        cells = []
        j = 0
        while cantor_pair(i, j) < n:
            cells.append(s.at(cantor_pair(i, j)))
            j += 1
        comps.append(EvSeq(tuple(cells), 0))
    return SeqTuple(tuple(comps))


# -- binary pairing -----------------------------------------------------------

def interleave_pair(x: EvSeq, y: EvSeq) -> EvSeq:
    if x.tail != y.tail:
        raise MixedTails(f"cannot interleave {x} and {y}: result is not eventually constant")
    n = max(len(x.prefix), len(y.prefix))
    cells = []
    for i in range(n):
        cells.append(x.at(i))
        cells.append(y.at(i))
    return EvSeq(tuple(cells), x.tail)


def split_pair(s: EvSeq) -> tuple:
    n = (len(s.prefix) + 1) // 2
    x = EvSeq(tuple(s.at(2 * i) for i in range(n)), s.tail)
    y = EvSeq(tuple(s.at(2 * i + 1) for i in range(n)), s.tail)
    return x, y


class PairView:
    """Read-only interleaving of two sequences with different tails.

    The result is eventually periodic rather than eventually constant, so it
    is not an :class:`EvSeq`; machines can still read it on their input tape.
    """

    settled_from = None

    def __init__(self, x: EvSeq, y: EvSeq):
        self.x = x
        self.y = y

    def at(self, i: int) -> int:
        return self.y.at(i // 2) if i % 2 else self.x.at(i // 2)

    def take(self, k: int) -> tuple:
        return tuple(self.at(i) for i in range(k))

    def __str__(self):
        return f"<{self.x}|{self.y}>"

    def __eq__(self, other):
        return isinstance(other, PairView) and (self.x, self.y) == (other.x, other.y)

    def __hash__(self):
        return hash((self.x, self.y))


def interleave_view(x: EvSeq, y: EvSeq):
    return interleave_pair(x, y) if x.tail == y.tail else PairView(x, y)


# -- encodings of naturals on binary tapes -----------------------------------

def encode_naturals(s: EvSeq) -> EvSeq:
    """Unary-delimited encoding: natural k becomes 1^k 0."""
    if s.tail != 0:
        raise TailNotZero("only tail-0 streams have an eventually constant encoding")
    cells = []
    for k in s.prefix:
        cells.extend([1] * k)
        cells.append(0)
    return EvSeq(tuple(cells), 0)


def decode_naturals(b: EvSeq) -> EvSeq:
    if not b.is_binary():
        raise DecodeError(f"{b} is not binary")
    if b.tail != 0:
        raise DecodeError(f"{b} ends in an unterminated block of ones")
    out = []
    run = 0
    for bit in b.prefix:
        if bit:
            run += 1
        else:
            out.append(run)
            run = 0
    if run:
        out.append(run)
    return EvSeq(tuple(out), 0)


def encode_natural(n: int) -> EvSeq:
    return EvSeq((1,) * n, 0)


def decode_natural(b: EvSeq) -> int:
    return decode_naturals(b).at(0)


def encode_index(i: int, x: EvSeq) -> EvSeq:
    """Prefix ``x`` with the unary-delimited index ``1^i 0``."""
    return EvSeq((1,) * i + (0,) + tuple(x.prefix), x.tail)


def decode_index(s: EvSeq) -> tuple:
    i = 0
    while s.at(i) == 1:
        i += 1
        if i > len(s.prefix):
            raise DecodeError(f"{s} has no index delimiter")
    if s.at(i) != 0:
        raise DecodeError(f"{s} does not start with a unary index")
    return i, s.drop(i + 1)


def encode_symbol_index(i: int, x: EvSeq) -> EvSeq:
    return EvSeq((i,) + tuple(x.prefix), x.tail)


def decode_symbol_index(s: EvSeq) -> tuple:
    return s.at(0), s.drop(1)


def split_view(s) -> tuple:
    """:func:`split_pair` that also takes apart a :class:`PairView`."""
    if isinstance(s, PairView):
        return s.x, s.y
    return split_pair(s)


def power_split(s, n: int) -> list:
    """Components of an n-fold iterated pair ``<<..<x0, x1>, ..>, x_{n-1}>``."""
    if n < 1:
        raise ValueError("n must be positive")
    out = []
    while n > 1:
        s, last = split_view(s)
        out.append(last)
        n -= 1
    out.append(s)
    return out[::-1]


def power_join(items: Sequence[EvSeq]) -> EvSeq:
    items = list(items)
    if not items:
        raise ValueError("need at least one component")
    acc = items[0]
    for x in items[1:]:
        acc = interleave_pair(acc, x)
    return acc


def power_view(items: Sequence):
    """Like :func:`power_join`, but falls back to a lazy view on mixed tails."""
    items = list(items)
    if all(isinstance(x, EvSeq) for x in items) and len({x.tail for x in items}) == 1:
        return power_join(items)
    acc = items[0]
    for x in items[1:]:
        acc = PairView(acc, x)
    return acc
