"""Reduced words over two involutive generators and the elephant step dynamics.

The walk lives on the group generated by two letters a, b subject to
a*a = b*b = identity.  Its Cayley graph is the bi-infinite path, so every
position is a reduced word whose letters strictly alternate.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

LETTERS = ("a", "b")


def complement(letter: str) -> str:
    """Swap the two generators: a <-> b."""
    if letter == "a":
        return "b"
    if letter == "b":
        return "a"
    raise ValueError(f"not a generator: {letter!r}")


@dataclass(frozen=True)
class GroupWord:
    """A reduced word over {a, b}, stored leftmost-letter-first.

    Both generators are involutions, so in a reduced word no two adjacent
    letters agree; the letters must alternate.  The pair (length, first
    letter) therefore determines the whole word, which keeps words O(1)
    regardless of how far the walk wanders.  The identity is the empty word.
    """

    length: int = 0
    first: Optional[str] = None

    def __post_init__(self):
        if self.length < 0:
            raise ValueError("word length cannot be negative")
        if self.length == 0 and self.first is not None:
            raise ValueError("the identity word carries no letters")
        if self.length > 0 and self.first not in LETTERS:
            raise ValueError(f"bad leading letter: {self.first!r}")

    @classmethod
    def identity(cls) -> "GroupWord":
        return cls(0, None)

    @classmethod
    def from_letters(cls, letters: Iterable[str]) -> "GroupWord":
        s = "".join(letters)
        for ch in s:
            if ch not in LETTERS:
                raise ValueError(f"not a generator: {ch!r}")
        for x, y in zip(s, s[1:]):
            if x == y:
                raise ValueError(f"word is not reduced: {s!r}")
        if not s:
            return cls.identity()
        return cls(len(s), s[0])

    @property
    def last(self) -> Optional[str]:
        """Rightmost letter (the first step's surviving side), None for e."""
        if self.length == 0:
            return None
        # letters alternate, so parity of the length decides
        return self.first if self.length % 2 == 1 else complement(self.first)

    def letters(self) -> str:
        if self.length == 0:
            return ""
        out = []
        cur = self.first
        for _ in range(self.length):
            out.append(cur)
            cur = complement(cur)
        return "".join(out)

    def __str__(self) -> str:
        return self.letters() or "e"


def reduce_left_multiply(g: str, w: GroupWord) -> GroupWord:
    """Reduced form of g*w for a generator g and a reduced word w.

    If w starts with g the two letters cancel, otherwise g is prepended;
    either way the length changes by exactly one.
    """
    if g not in LETTERS:
        raise ValueError(f"not a generator: {g!r}")
    if w.length == 0:
        return GroupWord(1, g)
    if w.first == g:
        if w.length == 1:
            return GroupWord.identity()
        return GroupWord(w.length - 1, complement(g))
    return GroupWord(w.length + 1, g)


def word_metric(w: GroupWord) -> int:
    """Graph distance from the identity: the letter count of the word."""
    return w.length


def signed_location(w: GroupWord) -> int:
    """Position of the word on the bi-infinite path, identity at 0.

    The branch containing the vertex a is positive.  A word sits on that
    branch exactly when its rightmost letter is a (the vertices ..., ab, b,
    e, a, ba, aba, ... from left to right), so the sign is read off the
    last letter.
    """
    if w.length == 0:
        return 0
    return w.length if w.last == "a" else -w.length


@dataclass(frozen=True)
class MemoryParams:
    """Memory parameter p in [0, 1] and its centred form q = 2p - 1.

    Doubles cannot make both q = 2p - 1 and p = (q + 1)/2 exact for
    non-dyadic values, so whichever parameter was given is stored verbatim
    and the relation must hold exactly in at least one direction.
    """

    p: float
    q: float

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must lie in [0, 1], got {self.p}")
        if not -1.0 <= self.q <= 1.0:
            raise ValueError(f"q must lie in [-1, 1], got {self.q}")
        if self.q != 2.0 * self.p - 1.0 and self.p != (self.q + 1.0) / 2.0:
            raise ValueError("p and q must satisfy q = 2p - 1")

    @classmethod
    def from_p(cls, p: float) -> "MemoryParams":
        p = float(p)
        return cls(p=p, q=2.0 * p - 1.0)

    @classmethod
    def from_q(cls, q: float) -> "MemoryParams":
        q = float(q)
        return cls(p=(q + 1.0) / 2.0, q=q)


def sample_next_letter(A: int, B: int, n: int, params: MemoryParams, rng) -> str:
    """Draw the next step letter given the running counts A (a's) and B (b's).

    The next letter is a with probability (p*A + (1-p)*B)/n.  This counts
    form has the same conditional law as remembering a uniform past index
    and repeating it with probability p, but needs only O(1) state.
    """
    if n < 1:
        raise ValueError("n must be at least 1 (the first step is uniform)")
    if A < 0 or B < 0 or A + B != n:
        raise ValueError(f"counts A={A}, B={B} inconsistent with n={n}")
    p = params.p
    prob_a = (p * A + (1.0 - p) * B) / n
    return "a" if rng.random() < prob_a else "b"


@dataclass
class WalkTrace:
    """One realised path: step letters g_1..g_n and positions w_0..w_n."""

    params: MemoryParams
    letters: list = field(default_factory=list)
    positions: list = field(default_factory=list)

    @property
    def n(self) -> int:
        return len(self.letters)

    def word_metrics(self) -> np.ndarray:
        return np.array([word_metric(w) for w in self.positions], dtype=np.int64)

    def signed_locations(self) -> np.ndarray:
        return np.array([signed_location(w) for w in self.positions], dtype=np.int64)

    def check_invariants(self) -> None:
        if len(self.positions) != self.n + 1:
            raise AssertionError("positions must hold one entry per step plus w_0")
        if self.positions[0] != GroupWord.identity():
            raise AssertionError("w_0 must be the identity")
        for k, g in enumerate(self.letters, start=1):
            w_prev, w_cur = self.positions[k - 1], self.positions[k]
            if reduce_left_multiply(g, w_prev) != w_cur:
                raise AssertionError(f"w_{k} is not reduce(g_{k} * w_{k-1})")
            if abs(w_cur.length - w_prev.length) != 1:
                raise AssertionError(f"length jump at step {k} is not +-1")


def simulate_walk(params: MemoryParams, steps: int, rng) -> WalkTrace:
    """Simulate one elephant path of the given length.

    The first letter is uniform on {a, b}; afterwards letters follow the
    counts form of the memory dynamics.  One uniform draw is consumed per
    step, which pins the path to the injected stream.
    """
    if steps < 1:
        raise ValueError("steps must be at least 1")
    trace = WalkTrace(params=params, positions=[GroupWord.identity()])
    g = "a" if rng.random() < 0.5 else "b"
    a_count = 1 if g == "a" else 0
    trace.letters.append(g)
    trace.positions.append(reduce_left_multiply(g, trace.positions[-1]))
    for n in range(1, steps):
        g = sample_next_letter(a_count, n - a_count, n, params, rng)
        if g == "a":
            a_count += 1
        trace.letters.append(g)
        trace.positions.append(reduce_left_multiply(g, trace.positions[-1]))
    return trace
