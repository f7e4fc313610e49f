"""Hierarchy words as grammar-compressed expressions.

A word is a tree of ``Run`` (a repeated symbol), ``Concat`` and ``Power``
nodes.  Length and zero count are cached at construction, random access
descends the tree, and windows can be expanded under a size cap.

Symbols are small integers: 0, 1, 2 for the base alphabet and 3, 4 for the two
copies of 0 in the duplicated alphabet.  Dense words are stored as strings over
those digits, so Python string operations (search, slicing, hashing) apply
directly and lexicographic order is 0 < 1 < 2.

Indices are 1-based throughout; windows are closed ranges [start, stop].
"""
from __future__ import annotations

import bisect
import re
from dataclasses import dataclass
from itertools import accumulate
from typing import Sequence

from ._util import int_str, parse_int
from .errors import BadInput, CapacityError
from .params import ParamState

DEFAULT_MATERIALIZE_CAP = 2**24


@dataclass(frozen=True)
class Alphabet:
    name: str
    symbols: tuple[int, ...]

    def __contains__(self, s) -> bool:
        return s in self.symbols

    @property
    def chars(self) -> str:
        return "".join(str(s) for s in self.symbols)


TILDE = Alphabet("tilde", (0, 1, 2))
# 0' -> 3, 0'' -> 4
DUPLICATED = Alphabet("duplicated", (1, 2, 3, 4))
ZERO_PRIME, ZERO_DPRIME = 3, 4
COLLAPSE = {ZERO_PRIME: 0, ZERO_DPRIME: 0, 1: 1, 2: 2}


def collapse(symbol: int) -> int:
    try:
        return COLLAPSE[symbol]
    except KeyError:
        raise BadInput(f"symbol {symbol} is not in the duplicated alphabet") from None


@dataclass(frozen=True)
class DenseWord:
    symbols: str
    alphabet: Alphabet = TILDE

    def __post_init__(self):
        allowed = set(self.alphabet.chars)
        if not set(self.symbols) <= allowed:
            bad = sorted(set(self.symbols) - allowed)
            raise BadInput(f"symbols {bad} not in alphabet {self.alphabet.name}")

    def __len__(self) -> int:
        return len(self.symbols)

    def __str__(self) -> str:
        return self.symbols

    def letter(self, i: int) -> int:
        """1-based access."""
        if not 1 <= i <= len(self.symbols):
            raise IndexError(f"index {i} outside [1, {len(self.symbols)}]")
        return int(self.symbols[i - 1])


class SuccinctWord:
    """Base class; use Run, Concat and Power."""

    __slots__ = ("length", "zeros")

    def depth(self) -> int:
        raise NotImplementedError

    def __eq__(self, other):
        return isinstance(other, SuccinctWord) and to_expr(self) == to_expr(other)

    def __hash__(self):
        return hash(to_expr(self))

    def __repr__(self) -> str:
        text = to_expr(self)
        return f"<{type(self).__name__} len={self.length} {text[:80]}{'...' if len(text) > 80 else ''}>"


class Run(SuccinctWord):
    __slots__ = ("symbol", "count")

    def __init__(self, symbol: int, count: int):
        if count < 0:
            raise BadInput("run count must be >= 0")
        if symbol not in (0, 1, 2, 3, 4):
            raise BadInput(f"unknown symbol {symbol}")
        self.symbol, self.count = symbol, count
        self.length = count
        self.zeros = count if symbol == 0 else 0

    def depth(self) -> int:
        return 1


class Concat(SuccinctWord):
    __slots__ = ("parts", "_ends")

    def __init__(self, parts: Sequence[SuccinctWord]):
        self.parts = tuple(parts)
        self._ends = list(accumulate(p.length for p in self.parts))
        self.length = self._ends[-1] if self._ends else 0
        self.zeros = sum(p.zeros for p in self.parts)

    def depth(self) -> int:
        return 1 + max((p.depth() for p in self.parts), default=0)


class Power(SuccinctWord):
    __slots__ = ("base", "exponent")

    def __init__(self, base: SuccinctWord, exponent: int):
        if exponent < 0:
            raise BadInput("power exponent must be >= 0")
        self.base, self.exponent = base, exponent
        self.length = base.length * exponent
        self.zeros = base.zeros * exponent

    def depth(self) -> int:
        return 1 + self.base.depth()


def word(text: str) -> SuccinctWord:
    """Succinct form of an explicit string, one run per maximal block."""
    parts = [Run(int(m.group(0)[0]), len(m.group(0))) for m in re.finditer(r"(.)\1*", text)]
    return parts[0] if len(parts) == 1 else Concat(parts)


def zero_count(w: SuccinctWord | DenseWord | str) -> int:
    if isinstance(w, SuccinctWord):
        return w.zeros
    return str(w).count("0")


def letter_at(w: SuccinctWord, i: int) -> int:
    if not 1 <= i <= w.length:
        raise IndexError(f"index {i} outside [1, {w.length}]")
    node = w
    while True:
        if isinstance(node, Run):
            return node.symbol
        if isinstance(node, Power):
            i = (i - 1) % node.base.length + 1
            node = node.base
        else:
            j = bisect.bisect_left(node._ends, i)
            if j:
                i -= node._ends[j - 1]
            node = node.parts[j]


def _expand(node: SuccinctWord, lo: int, hi: int, out: list[str]) -> None:
    # appends symbols at 0-based positions [lo, hi) of node
    if lo >= hi:
        return
    if isinstance(node, Run):
        out.append(str(node.symbol) * (hi - lo))
    elif isinstance(node, Power):
        b = node.base.length
        first, last = lo // b, (hi - 1) // b
        if first == last:
            _expand(node.base, lo - first * b, hi - first * b, out)
            return
        _expand(node.base, lo - first * b, b, out)
        full = last - first - 1
        if full:
            piece: list[str] = []
            _expand(node.base, 0, b, piece)
            out.append("".join(piece) * full)
        _expand(node.base, 0, hi - last * b, out)
    else:
        start = bisect.bisect_right(node._ends, lo)
        offset = node._ends[start - 1] if start else 0
        for part in node.parts[start:]:
            if offset >= hi:
                break
            end = offset + part.length
            _expand(part, max(lo - offset, 0), min(hi, end) - offset, out)
            offset = end


def materialize(w: SuccinctWord, start: int = 1, stop: int | None = None,
                cap: int = DEFAULT_MATERIALIZE_CAP, alphabet: Alphabet | None = None) -> DenseWord:
    """Symbols at 1-based positions start..stop inclusive (default: whole word)."""
    return DenseWord(expand(w, start, stop, cap), alphabet or _alphabet_of(w))


def expand(w: SuccinctWord, start: int = 1, stop: int | None = None,
           cap: int = DEFAULT_MATERIALIZE_CAP) -> str:
    """Like materialize but returns the raw symbol string."""
    if stop is None:
        stop = w.length
    if stop < start:
        return ""
    if start < 1 or stop > w.length:
        raise IndexError(f"window [{start}, {stop}] outside [1, {w.length}]")
    size = stop - start + 1
    if size > cap:
        raise CapacityError(f"materializing {int_str(size)} symbols exceeds the cap of {cap}")
    out: list[str] = []
    _expand(w, start - 1, stop, out)
    return "".join(out)


def _symbols(node: SuccinctWord, acc: set) -> set:
    if isinstance(node, Run):
        if node.count:
            acc.add(node.symbol)
    elif isinstance(node, Power):
        if node.exponent:
            _symbols(node.base, acc)
    else:
        for p in node.parts:
            _symbols(p, acc)
    return acc


def symbols_of(w: SuccinctWord) -> set[int]:
    return _symbols(w, set())


def _alphabet_of(w: SuccinctWord) -> Alphabet:
    return DUPLICATED if symbols_of(w) & {3, 4} else TILDE


# ---------------------------------------------------------------------------
# canonical text form

def to_expr(w: SuccinctWord) -> str:
    if isinstance(w, Run):
        return f"run({w.symbol},{int_str(w.count)})"
    if isinstance(w, Power):
        return f"pow({to_expr(w.base)},{int_str(w.exponent)})"
    return "cat(" + ",".join(to_expr(p) for p in w.parts) + ")"


_TOKEN = re.compile(r"\s*(run|pow|cat|\(|\)|,|\d+)")


def parse_expr(text: str) -> SuccinctWord:
    tokens = _TOKEN.findall(text)
    if "".join(tokens) != re.sub(r"\s+", "", text):
        raise BadInput(f"cannot parse word expression {text[:60]!r}")
    pos = 0

    def take(expected=None):
        nonlocal pos
        if pos >= len(tokens):
            raise BadInput("unexpected end of word expression")
        tok = tokens[pos]
        if expected is not None and tok != expected:
            raise BadInput(f"expected {expected!r}, got {tok!r}")
        pos += 1
        return tok

    def peek():
        if pos >= len(tokens):
            raise BadInput("unexpected end of word expression")
        return tokens[pos]

    def node() -> SuccinctWord:
        head = take()
        take("(")
        if head == "run":
            sym = parse_int(take())
            take(",")
            n = parse_int(take())
            take(")")
            return Run(sym, n)
        if head == "pow":
            base = node()
            take(",")
            e = parse_int(take())
            take(")")
            return Power(base, e)
        if head == "cat":
            parts = []
            if peek() != ")":
                parts.append(node())
                while peek() == ",":
                    take(",")
                    parts.append(node())
            take(")")
            return Concat(parts)
        raise BadInput(f"unknown node {head!r}")

    result = node()
    if pos != len(tokens):
        raise BadInput("trailing tokens in word expression")
    return result


# ---------------------------------------------------------------------------
# hierarchy levels

@dataclass(frozen=True)
class LevelWords:
    k: int
    a: SuccinctWord
    b: SuccinctWord
    one: SuccinctWord
    two: SuccinctWord

    def as_dict(self) -> dict[str, SuccinctWord]:
        return {"a": self.a, "b": self.b, "one": self.one, "two": self.two}

    @property
    def dict_a(self) -> tuple[SuccinctWord, SuccinctWord]:
        return (self.a, self.one)

    @property
    def dict_b(self) -> tuple[SuccinctWord, SuccinctWord]:
        return (self.b, self.two)


@dataclass(frozen=True)
class IntermediateWords:
    """Words at the intermediate scale; the double-primed words exist for one parity only."""

    k: int
    a_p: SuccinctWord
    a_pp: SuccinctWord | None
    b_p: SuccinctWord
    b_pp: SuccinctWord | None
    one: SuccinctWord
    two: SuccinctWord

    @property
    def dict_a(self) -> tuple[SuccinctWord, ...]:
        return tuple(w for w in (self.a_p, self.a_pp, self.one) if w is not None)

    @property
    def dict_b(self) -> tuple[SuccinctWord, ...]:
        return tuple(w for w in (self.b_p, self.b_pp, self.two) if w is not None)

    def as_dict(self) -> dict[str, SuccinctWord]:
        out = {"a_p": self.a_p, "a_pp": self.a_pp, "b_p": self.b_p, "b_pp": self.b_pp,
               "one": self.one, "two": self.two}
        return {k: v for k, v in out.items() if v is not None}


def _check_levels(k: int, states: Sequence[ParamState]) -> None:
    if k < 0:
        raise BadInput("level must be >= 0")
    if len(states) <= k or any(s.k != i for i, s in enumerate(states[: k + 1])):
        raise BadInput(f"states must cover levels 0..{k} in order")


def build_level(k: int, states: Sequence[ParamState]) -> LevelWords:
    _check_levels(k, states)
    a, b = word("01"), word("02")
    for j in range(1, k + 1):
        n, gap = states[j].n_big, (states[j].n_big - 2) * states[j - 1].ell
        if j % 2:
            a, b = Power(a, n), Concat([b, Run(2, gap), b])
        else:
            a, b = Concat([a, Run(1, gap), a]), Power(b, n)
    ell = states[k].ell
    return LevelWords(k, a, b, Run(1, ell), Run(2, ell))


def build_intermediate(k: int, states: Sequence[ParamState]) -> IntermediateWords:
    if k == 0:
        raise BadInput("the intermediate scale is undefined at level 0")
    _check_levels(k, states)
    prev = build_level(k - 1, states)
    np_, ell = states[k].n_prime, states[k - 1].ell
    marker = (np_ - 1) * ell
    if k % 2:
        a_p, a_pp = Power(prev.a, np_), None
        b_p, b_pp = Concat([prev.b, Run(2, marker)]), Concat([Run(2, marker), prev.b])
    else:
        a_p, a_pp = Concat([prev.a, Run(1, marker)]), Concat([Run(1, marker), prev.a])
        b_p, b_pp = Power(prev.b, np_), None
    ell_p = states[k].ell_prime
    return IntermediateWords(k, a_p, a_pp, b_p, b_pp, Run(1, ell_p), Run(2, ell_p))


class Hierarchy:
    """Words of every available level for a fixed list of states, with a size cap.

    Results are memoized; instances are safe to share once built because the
    caches only ever gain entries computed from immutable inputs.
    """

    def __init__(self, states: Sequence[ParamState], cap: int = DEFAULT_MATERIALIZE_CAP):
        if not states or states[0].k != 0:
            raise BadInput("states must start at level 0")
        _check_levels(len(states) - 1, states)
        self.states = tuple(states)
        self.cap = cap
        self._levels: dict[int, LevelWords] = {}
        self._inter: dict[int, IntermediateWords] = {}
        self._dense: dict[tuple, tuple[str, ...]] = {}

    @property
    def top(self) -> int:
        return len(self.states) - 1

    def ell(self, k: int) -> int:
        return self.states[k].ell

    def level(self, k: int) -> LevelWords:
        if k not in self._levels:
            if k > self.top:
                raise CapacityError(f"level {k} not available (top level {self.top})")
            self._levels[k] = build_level(k, self.states)
        return self._levels[k]

    def intermediate(self, k: int) -> IntermediateWords:
        if k not in self._inter:
            if k > self.top:
                raise CapacityError(f"level {k} not available (top level {self.top})")
            self._inter[k] = build_intermediate(k, self.states)
        return self._inter[k]

    def level_for(self, n: int) -> int:
        """Least level whose block length is at least n."""
        for s in self.states:
            if s.ell >= n:
                return s.k
        raise CapacityError(f"no available level has block length >= {n} (top level {self.top}, "
                            f"length {int_str(self.states[-1].ell)})")

    def dense_level(self, k: int) -> tuple[str, str, str, str]:
        """Materialized (a, b, 1-block, 2-block) at level k."""
        key = ("level", k)
        if key not in self._dense:
            lw = self.level(k)
            self._dense[key] = tuple(expand(w, cap=self.cap) for w in (lw.a, lw.b, lw.one, lw.two))
        return self._dense[key]

    def dense_intermediate(self, k: int) -> dict[str, str]:
        key = ("inter", k)
        if key not in self._dense:
            iw = self.intermediate(k)
            self._dense[key] = tuple(sorted((n, expand(w, cap=self.cap)) for n, w in iw.as_dict().items()))
        return dict(self._dense[key])
