"""Exact points of the one-sided full shift on m symbols.

A point is an infinite sequence over the alphabet {1, ..., m}, stored as a
finite prefix followed by an infinitely repeated period.  This class of
points is closed under the left shift, under prepending symbols, and under
the prefix-splicing kernels used by the convolution of measures, so every
construction in this package can be carried out with exact symbolic data.

Every value is kept in canonical form: the period is primitive (not a power
of a shorter word) and the prefix is as short as possible.  The canonical
representation of an eventually periodic sequence is unique, hence
structural equality of canonical forms decides equality of the infinite
sequences.  ``equals`` double-checks by direct symbol comparison up to the
Fine-Wilf bound max(|prefix|) + |period_x| + |period_y|, which is sufficient
for two eventually periodic sequences to coincide everywhere.

The metric is d(x, y) = 2^{-k} with k the first index (1-based) where the
sequences disagree, and 0 when they are equal; distances are exact dyadic
doubles.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Alphabet:
    """The symbol set {1, ..., m} of the full shift."""

    m: int

    def __post_init__(self):
        if self.m < 2:
            raise ValueError(f"alphabet needs at least 2 symbols, got m={self.m}")

    @property
    def symbols(self) -> range:
        return range(1, self.m + 1)


def _primitive_root(word: tuple[int, ...]) -> tuple[int, ...]:
    """Shortest word whose repetition gives ``word``."""
    n = len(word)
    for d in range(1, n):
        if n % d:
            continue
        if all(word[i] == word[i % d] for i in range(d, n)):
            return word[:d]
    return word


class EventuallyPeriodic:
    """A sequence prefix . period . period . ... over {1, ..., m}.

    Instances are immutable and canonical: the period is primitive and the
    prefix is minimal.  Hash and ``==`` therefore agree with equality of the
    denoted infinite sequences.
    """

    __slots__ = ("m", "prefix", "period")

    def __init__(self, prefix, period, m: int):
        prefix = tuple(prefix)
        period = tuple(period)
        if not period:
            raise ValueError("period must be nonempty")
        if m < 2:
            raise ValueError(f"alphabet needs at least 2 symbols, got m={m}")
        for s in prefix + period:
            if not (isinstance(s, int) and 1 <= s <= m):
                raise ValueError(f"symbol {s!r} outside 1..{m}")
        period = _primitive_root(period)
        # Absorb prefix symbols that already follow the periodic pattern;
        # rotating the primitive period keeps it primitive, so the loop
        # terminates at the unique minimal representation.
        prefix_list = list(prefix)
        while prefix_list and prefix_list[-1] == period[-1]:
            prefix_list.pop()
            period = (period[-1],) + period[:-1]
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "prefix", tuple(prefix_list))
        object.__setattr__(self, "period", period)

    def __setattr__(self, name, value):
        raise AttributeError("EventuallyPeriodic is immutable")

    @classmethod
    def periodic(cls, period, m: int) -> "EventuallyPeriodic":
        """The purely periodic point period . period . ..."""
        return cls((), period, m)

    @classmethod
    def constant(cls, symbol: int, m: int) -> "EventuallyPeriodic":
        """The constant sequence (symbol, symbol, ...)."""
        return cls((), (symbol,), m)

    # -- sequence access -------------------------------------------------

    def symbol_at(self, i: int) -> int:
        """Symbol x_i, 1-based."""
        if i < 1:
            raise IndexError("positions are 1-based")
        np = len(self.prefix)
        if i <= np:
            return self.prefix[i - 1]
        return self.period[(i - np - 1) % len(self.period)]

    def first(self, k: int) -> tuple[int, ...]:
        """The initial word (x_1, ..., x_k)."""
        np = len(self.prefix)
        if k <= np:
            return self.prefix[:k]
        reps, rem = divmod(k - np, len(self.period))
        return self.prefix + self.period * reps + self.period[:rem]

    # -- dynamics --------------------------------------------------------

    def shift(self) -> "EventuallyPeriodic":
        """Drop the first symbol."""
        out = object.__new__(EventuallyPeriodic)
        object.__setattr__(out, "m", self.m)
        if self.prefix:
            # removing the head cannot create a new absorbable tail
            object.__setattr__(out, "prefix", self.prefix[1:])
            object.__setattr__(out, "period", self.period)
        else:
            q = self.period
            object.__setattr__(out, "prefix", ())
            object.__setattr__(out, "period", q[1:] + q[:1])
        return out

    def shift_by(self, steps: int) -> "EventuallyPeriodic":
        """Apply the shift ``steps`` times."""
        if steps < 0:
            raise ValueError("steps must be >= 0")
        np = len(self.prefix)
        if steps <= np:
            return EventuallyPeriodic(self.prefix[steps:], self.period, self.m)
        r = (steps - np) % len(self.period)
        return EventuallyPeriodic((), self.period[r:] + self.period[:r], self.m)

    def prepend(self, symbol: int) -> "EventuallyPeriodic":
        """The point (symbol, x_1, x_2, ...)."""
        if not (1 <= symbol <= self.m):
            raise ValueError(f"symbol {symbol!r} outside 1..{self.m}")
        out = object.__new__(EventuallyPeriodic)
        object.__setattr__(out, "m", self.m)
        if self.prefix or symbol != self.period[-1]:
            object.__setattr__(out, "prefix", (symbol,) + self.prefix)
            object.__setattr__(out, "period", self.period)
        else:
            q = self.period
            object.__setattr__(out, "prefix", ())
            object.__setattr__(out, "period", q[-1:] + q[:-1])
        return out

    def prepend_word(self, word) -> "EventuallyPeriodic":
        """The point word . x."""
        return EventuallyPeriodic(tuple(word) + self.prefix, self.period, self.m)

    # -- comparison ------------------------------------------------------

    def _comparison_bound(self, other: "EventuallyPeriodic") -> int:
        return (
            max(len(self.prefix), len(other.prefix))
            + len(self.period)
            + len(other.period)
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, EventuallyPeriodic):
            return NotImplemented
        return (
            self.m == other.m
            and self.prefix == other.prefix
            and self.period == other.period
        )

    def __hash__(self) -> int:
        return hash((self.m, self.prefix, self.period))

    def sort_key(self):
        return (self.prefix, self.period)

    def __repr__(self) -> str:
        pre = ",".join(map(str, self.prefix))
        per = ",".join(map(str, self.period))
        return f"EventuallyPeriodic({pre}|{per}; m={self.m})"

    # -- textual encoding ------------------------------------------------

    def to_text(self) -> str:
        """Compact encoding "p1p2...|q1q2..."; only for alphabets with m <= 9."""
        if self.m > 9:
            raise ValueError("textual encoding supports single-digit symbols only")
        return "".join(map(str, self.prefix)) + "|" + "".join(map(str, self.period))

    @classmethod
    def from_text(cls, text: str, m: int) -> "EventuallyPeriodic":
        if text.count("|") != 1:
            raise ValueError(f"expected one '|' in point encoding, got {text!r}")
        pre, per = text.split("|")
        return cls(tuple(int(c) for c in pre), tuple(int(c) for c in per), m)


@dataclass(frozen=True)
class CylinderWord:
    """A finite word of length k, naming the cylinder of sequences starting with it."""

    word: tuple[int, ...]
    m: int

    def __post_init__(self):
        if not self.word:
            raise ValueError("cylinder words have depth >= 1")
        for s in self.word:
            if not 1 <= s <= self.m:
                raise ValueError(f"symbol {s!r} outside 1..{self.m}")

    @property
    def depth(self) -> int:
        return len(self.word)

    def lex_index(self) -> int:
        """Position of the word in the lexicographic enumeration (0-based)."""
        return word_index(self.word, self.m)

    @classmethod
    def from_lex_index(cls, index: int, depth: int, m: int) -> "CylinderWord":
        return cls(word_from_index(index, depth, m), m)


def word_index(word, m: int) -> int:
    """0-based lexicographic rank of a word over {1, ..., m}."""
    idx = 0
    for s in word:
        idx = idx * m + (s - 1)
    return idx


def word_from_index(index: int, depth: int, m: int) -> tuple[int, ...]:
    """Inverse of :func:`word_index` for words of the given length."""
    if not 0 <= index < m**depth:
        raise ValueError(f"index {index} out of range for depth {depth}")
    out = []
    for _ in range(depth):
        index, r = divmod(index, m)
        out.append(r + 1)
    return tuple(reversed(out))


def all_words(m: int, depth: int):
    """All words of the given length in lexicographic order."""
    for idx in range(m**depth):
        yield word_from_index(idx, depth, m)


def distance(x: EventuallyPeriodic, y: EventuallyPeriodic) -> float:
    """2^{-k} with k the first disagreement index; 0 when the points coincide."""
    if x.m != y.m:
        raise ValueError(f"alphabet mismatch: m={x.m} vs m={y.m}")
    k = _first_disagreement(x, y)
    return 0.0 if k == 0 else 2.0 ** (-k)


def _first_disagreement(x: EventuallyPeriodic, y: EventuallyPeriodic) -> int:
    """1-based index of the first differing symbol, or 0 if the points agree."""
    bound = x._comparison_bound(y)
    for i in range(1, bound + 1):
        if x.symbol_at(i) != y.symbol_at(i):
            return i
    return 0


def equals(x: EventuallyPeriodic, y: EventuallyPeriodic) -> bool:
    """Equality of the denoted sequences, by symbol comparison up to the Fine-Wilf bound."""
    if x.m != y.m:
        raise ValueError(f"alphabet mismatch: m={x.m} vs m={y.m}")
    return _first_disagreement(x, y) == 0


def shift(x: EventuallyPeriodic) -> EventuallyPeriodic:
    """The left shift (x_1, x_2, ...) -> (x_2, x_3, ...)."""
    return x.shift()


def cylinder_of(x: EventuallyPeriodic, k: int) -> CylinderWord:
    """The depth-k cylinder containing x."""
    if k < 1:
        raise ValueError("cylinder depth must be >= 1")
    return CylinderWord(x.first(k), x.m)


def representative(w: CylinderWord) -> EventuallyPeriodic:
    """The periodic point w . w . w . ... inside the cylinder of w."""
    return EventuallyPeriodic.periodic(w.word, w.m)
