"""Two-dimensional patterns over the base and duplicated alphabets.

Coordinates: a pattern of width W and height H has cells (x, y) with
1 <= x <= W (column) and 1 <= y <= H (row); ``rows[y-1][x-1]`` holds the
symbol.  Words are laid out horizontally, so a vertically aligned pattern has
all rows equal.

``compute_ijk`` finds the translates u = (ux, uy) whose window u + [1, m]^2 is
vertically constant with a row in the language (m = 2 ell'_k) or in one of the
intermediate dictionaries (m = ell'_k), then forms the covered position sets J
and their zero cells K.  Positions are stored as boolean masks indexed
``[y-1, x-1]``; the ``*_positions`` helpers convert them to sets.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable

import numpy as np

from .errors import BadInput
from .language import language_slice
from .words import DUPLICATED, TILDE, Alphabet, DenseWord, Hierarchy

_COLLAPSE_TABLE = str.maketrans({"3": "0", "4": "0"})


@dataclass(frozen=True)
class Pattern2D:
    rows: tuple[str, ...]
    alphabet: Alphabet = TILDE
    offset: tuple[int, int] = (1, 1)

    def __post_init__(self):
        if not self.rows or not self.rows[0]:
            raise BadInput("patterns must be non-empty")
        width = len(self.rows[0])
        if any(len(r) != width for r in self.rows):
            raise BadInput("all rows must have the same width")
        allowed = set(self.alphabet.chars)
        for r in self.rows:
            if not set(r) <= allowed:
                raise BadInput(f"symbols {sorted(set(r) - allowed)} not in alphabet {self.alphabet.name}")

    @property
    def width(self) -> int:
        return len(self.rows[0])

    @property
    def height(self) -> int:
        return len(self.rows)

    @property
    def cells(self) -> str:
        return "".join(self.rows)

    def at(self, x: int, y: int) -> int:
        return int(self.rows[y - 1][x - 1])

    def array(self) -> np.ndarray:
        return np.frombuffer("".join(self.rows).encode(), dtype=np.uint8).reshape(self.height, self.width) - 48

    def sub(self, x0: int, y0: int, w: int, h: int) -> "Pattern2D":
        """Window with top-left cell (x0, y0)."""
        return Pattern2D(tuple(r[x0 - 1:x0 - 1 + w] for r in self.rows[y0 - 1:y0 - 1 + h]), self.alphabet)

    def to_json(self) -> dict:
        return {"alphabet": self.alphabet.name, "width": self.width, "height": self.height,
                "rows": list(self.rows)}

    @classmethod
    def from_array(cls, arr: np.ndarray, alphabet: Alphabet = TILDE) -> "Pattern2D":
        arr = np.asarray(arr, dtype=np.uint8)
        return cls(tuple((row + 48).tobytes().decode() for row in arr), alphabet)


def verticalize(w, height: int) -> Pattern2D:
    if height < 1:
        raise BadInput("height must be >= 1")
    text = w.symbols if isinstance(w, DenseWord) else str(w)
    alphabet = w.alphabet if isinstance(w, DenseWord) else (DUPLICATED if set(text) & {"3", "4"} else TILDE)
    return Pattern2D((text,) * height, alphabet)


def project(p: Pattern2D) -> Pattern2D:
    if p.alphabet != DUPLICATED:
        raise BadInput("project expects a pattern over the duplicated alphabet")
    return Pattern2D(tuple(r.translate(_COLLAPSE_TABLE) for r in p.rows), TILDE)


def lift(p: Pattern2D, rng: np.random.Generator) -> Pattern2D:
    """A random preimage under the collapse map."""
    if p.alphabet != TILDE:
        raise BadInput("lift expects a pattern over {0,1,2}")
    arr = p.array()
    zeros = arr == 0
    arr = arr.copy()
    arr[zeros] = rng.integers(3, 5, size=int(zeros.sum()), dtype=np.uint8)
    return Pattern2D.from_array(arr, DUPLICATED)


def count_duplications(p: Pattern2D) -> int:
    return 2 ** p.cells.count("0")


# ---------------------------------------------------------------------------
# index sets

def _down_runs(arr: np.ndarray) -> np.ndarray:
    """down[y, x] = length of the constant vertical run starting at (x, y) going down."""
    h = arr.shape[0]
    down = np.ones(arr.shape, dtype=np.int64)
    same = arr[1:] == arr[:-1]
    for y in range(h - 2, -1, -1):
        down[y] = np.where(same[y], down[y + 1] + 1, 1)
    return down


def _window_min(arr: np.ndarray, m: int) -> np.ndarray:
    """Minimum over horizontal windows of width m: out[:, x] = min(arr[:, x:x+m])."""
    width = arr.shape[1]
    if m > width:
        return np.empty((arr.shape[0], 0), dtype=arr.dtype)
    cur, span = arr, 1
    while span * 2 <= m:
        cur = np.minimum(cur[:, :-span], cur[:, span:])
        span *= 2
    n_out = width - m + 1
    return np.minimum(cur[:, :n_out], cur[:, m - span:m - span + n_out])


def _aligned_translates(p: Pattern2D, down: np.ndarray, m: int, limit: int, accepted: frozenset) -> np.ndarray:
    """Mask over u in [0, limit]^2 (indexed [uy, ux]) of m-windows that are vertically
    constant with their row in ``accepted``."""
    if limit < 0:
        return np.zeros((0, 0), dtype=bool)
    const = _window_min(down[: limit + 1], m)[:, : limit + 1] >= m
    if not const.any():
        return const
    # rows of a vertically constant window repeat, so test each distinct row once
    member = np.zeros_like(const)
    seen: dict[str, np.ndarray] = {}
    for uy in np.flatnonzero(const.any(axis=1)):
        row = p.rows[uy]
        vec = seen.get(row)
        if vec is None:
            vec = seen[row] = np.fromiter((row[x:x + m] in accepted for x in range(limit + 1)),
                                          dtype=bool, count=limit + 1)
        member[uy] = vec
    return const & member


def _cover(translates: np.ndarray, m: int, shape: tuple[int, int]) -> np.ndarray:
    """Cells covered by some square u + [1, m]^2 with u in the translate mask."""
    h, w = shape
    marks = np.zeros((h, w), dtype=np.int64)
    th, tw = translates.shape
    marks[:th, :tw] = translates
    # cell (y, x) is covered iff a translate lies in [y-m+1, y] x [x-m+1, x]
    integral = np.zeros((h + 1, w + 1), dtype=np.int64)
    integral[1:, 1:] = marks.cumsum(axis=0).cumsum(axis=1)
    ys, xs = np.arange(h), np.arange(w)
    y0, x0 = np.maximum(ys - m + 1, 0), np.maximum(xs - m + 1, 0)
    y1, x1 = ys + 1, xs + 1
    total = (integral[np.ix_(y1, x1)] - integral[np.ix_(y0, x1)]
             - integral[np.ix_(y1, x0)] + integral[np.ix_(y0, x0)])
    return total > 0


def _translate_set(mask: np.ndarray) -> frozenset:
    return frozenset((int(ux), int(uy)) for uy, ux in np.argwhere(mask))


def _mask_positions(mask: np.ndarray) -> frozenset:
    return frozenset((int(x) + 1, int(y) + 1) for y, x in np.argwhere(mask))


@dataclass(frozen=True)
class IJKReport:
    k: int
    side: int
    ell_prime: int
    I_mask: np.ndarray
    I_A_mask: np.ndarray
    I_B_mask: np.ndarray
    J_A_mask: np.ndarray
    J_B_mask: np.ndarray
    K_A_mask: np.ndarray
    K_B_mask: np.ndarray

    @property
    def I(self) -> frozenset:
        return _translate_set(self.I_mask)

    @property
    def I_A(self) -> frozenset:
        return _translate_set(self.I_A_mask)

    @property
    def I_B(self) -> frozenset:
        return _translate_set(self.I_B_mask)

    @property
    def J_A(self) -> frozenset:
        return _mask_positions(self.J_A_mask)

    @property
    def J_B(self) -> frozenset:
        return _mask_positions(self.J_B_mask)

    @property
    def K_A(self) -> frozenset:
        return _mask_positions(self.K_A_mask)

    @property
    def K_B(self) -> frozenset:
        return _mask_positions(self.K_B_mask)

    def cardinalities(self) -> dict[str, int]:
        return {
            "I": int(self.I_mask.sum()), "I_A": int(self.I_A_mask.sum()), "I_B": int(self.I_B_mask.sum()),
            "J_A": int(self.J_A_mask.sum()), "J_B": int(self.J_B_mask.sum()),
            "K_A": int(self.K_A_mask.sum()), "K_B": int(self.K_B_mask.sum()),
        }

    def to_json(self, positions: bool = False) -> dict:
        out = {"k": self.k, "side": self.side, "ell_prime": self.ell_prime, **self.cardinalities()}
        if positions:
            for name in ("I", "I_A", "I_B", "J_A", "J_B", "K_A", "K_B"):
                out[name + "_positions"] = sorted(map(list, getattr(self, name)))
        return out


@lru_cache(maxsize=64)
def _language_words(hier: Hierarchy, m: int) -> frozenset:
    return language_slice(m, hier).words


def _check_square(p: Pattern2D, k: int, hier: Hierarchy) -> int:
    if p.alphabet != TILDE:
        raise BadInput("index sets are defined for patterns over {0,1,2}")
    if p.width != p.height:
        raise BadInput(f"pattern must be square, got {p.width}x{p.height}")
    if k < 1 or k > hier.top:
        raise BadInput(f"level {k} unavailable (need 1 <= k <= {hier.top})")
    ell_p = hier.states[k].ell_prime
    if p.width <= 2 * ell_p:
        raise BadInput(f"side {p.width} must exceed 2*ell'_k = {2 * ell_p}")
    return ell_p


def compute_ijk(p: Pattern2D, k: int, hier: Hierarchy) -> IJKReport:
    ell_p = _check_square(p, k, hier)
    n = p.width
    arr = p.array()
    down = _down_runs(arr)
    inter = hier.dense_intermediate(k)
    dict_a = frozenset(v for key, v in inter.items() if key in ("a_p", "a_pp", "one"))
    dict_b = frozenset(v for key, v in inter.items() if key in ("b_p", "b_pp", "two"))
    if down.max() < ell_p:
        no = np.zeros(arr.shape, dtype=bool)
        return IJKReport(k, n, ell_p, np.zeros((n - 2 * ell_p + 1,) * 2, dtype=bool),
                         np.zeros((n - ell_p + 1,) * 2, dtype=bool), np.zeros((n - ell_p + 1,) * 2, dtype=bool),
                         no, no, no, no)
    lang = _language_words(hier, 2 * ell_p)
    m2 = 2 * ell_p
    I = _aligned_translates(p, down, m2, n - m2, lang)
    I_A = _aligned_translates(p, down, ell_p, n - ell_p, dict_a)
    I_B = _aligned_translates(p, down, ell_p, n - ell_p, dict_b)
    J_A = _cover(I_A, ell_p, arr.shape)
    J_B = _cover(I_B, ell_p, arr.shape)
    zero = arr == 0
    return IJKReport(k, n, ell_p, I, I_A, I_B, J_A, J_B, J_A & zero, J_B & zero)


@dataclass(frozen=True)
class CoverReport:
    disjoint: bool
    covered: bool
    uncovered: tuple[tuple[int, int], ...] = ()

    @property
    def ok(self) -> bool:
        return self.disjoint and self.covered


def admissibility_cover(p: Pattern2D, k: int, hier: Hierarchy, ijk: IJKReport | None = None) -> CoverReport:
    ijk = ijk or compute_ijk(p, k, hier)
    ell_p = ijk.ell_prime
    disjoint = not bool((ijk.J_A_mask & ijk.J_B_mask).any())
    union = ijk.J_A_mask | ijk.J_B_mask
    # position u + (ell', ell') is the cell (ux + ell', uy + ell'), i.e. index [uy + ell' - 1, ux + ell' - 1]
    th, tw = ijk.I_mask.shape
    hit = union[ell_p - 1:ell_p - 1 + th, ell_p - 1:ell_p - 1 + tw]
    missing = tuple(sorted((int(ux), int(uy)) for uy, ux in np.argwhere(ijk.I_mask & ~hit)))
    return CoverReport(disjoint, not missing, missing)


def check_admissibility_cover(p: Pattern2D, k: int, hier: Hierarchy, ijk: IJKReport | None = None) -> bool:
    return admissibility_cover(p, k, hier, ijk).ok


@dataclass(frozen=True)
class FrequencyReport:
    k: int
    dominant: str
    k_dom: int
    j_dom: int
    rhs_dom: Fraction
    k_other: int
    j_other: int
    rhs_other: Fraction

    @property
    def ok_dom(self) -> bool:
        return self.k_dom <= self.rhs_dom

    @property
    def ok_other(self) -> bool:
        return self.k_other <= self.rhs_other

    @property
    def ok(self) -> bool:
        return self.ok_dom and self.ok_other

    def to_json(self) -> dict:
        other = "A" if self.dominant == "B" else "B"
        return {
            "k": self.k,
            f"K_{self.dominant}": self.k_dom, f"J_{self.dominant}": self.j_dom,
            f"rhs_{self.dominant}": str(self.rhs_dom), f"ok_{self.dominant}": self.ok_dom,
            f"K_{other}": self.k_other, f"J_{other}": self.j_other,
            f"rhs_{other}": str(self.rhs_other), f"ok_{other}": self.ok_other,
        }


def _frequency(p, k, hier, ijk, dominant) -> FrequencyReport:
    if k < 2:
        raise BadInput("the zero-frequency bounds need N_{k-1}, i.e. k >= 2")
    ijk = ijk or compute_ijk(p, k, hier)
    prev, cur = hier.states[k - 1], hier.states[k]
    card = ijk.cardinalities()
    other = "A" if dominant == "B" else "B"
    slack = 1 / (1 - Fraction(1, prev.n_big))
    rhs_dom = slack * card["J_" + dominant] * prev.freq(dominant)
    rhs_other = Fraction(2, cur.n_prime) * card["J_" + other] * prev.freq(other)
    return FrequencyReport(k, dominant, card["K_" + dominant], card["J_" + dominant], rhs_dom,
                           card["K_" + other], card["J_" + other], rhs_other)


def check_frequency_bounds(p: Pattern2D, k: int, hier: Hierarchy, ijk: IJKReport | None = None) -> FrequencyReport:
    """Zero counts in J^B and J^A against their bounds (k even)."""
    if k % 2:
        raise BadInput(f"k={k} is odd; use check_frequency_bounds_mirrored, which swaps A and B")
    return _frequency(p, k, hier, ijk, "B")


def check_frequency_bounds_mirrored(p: Pattern2D, k: int, hier: Hierarchy,
                                    ijk: IJKReport | None = None) -> FrequencyReport:
    """The odd-k statement: A and B exchange roles."""
    if k % 2 == 0:
        raise BadInput(f"k={k} is even; use check_frequency_bounds")
    return _frequency(p, k, hier, ijk, "A")


def frequency_bounds(p: Pattern2D, k: int, hier: Hierarchy, ijk: IJKReport | None = None) -> FrequencyReport:
    """Parity-appropriate version of the zero-frequency check."""
    return (check_frequency_bounds if k % 2 == 0 else check_frequency_bounds_mirrored)(p, k, hier, ijk)


# ---------------------------------------------------------------------------
# forbidden-position counting

def aligned_window_ok(hier: Hierarchy, m: int) -> Callable[[Pattern2D], bool]:
    """Local test for an m x m window: vertically constant with a row in the language."""
    words = _language_words(hier, m)

    def test(w: Pattern2D) -> bool:
        first = w.rows[0]
        return all(r == first for r in w.rows) and first in words
    return test


def forbidden_position_density(p: Pattern2D, D: int, block_side: int, hier: Hierarchy | None = None,
                               window_ok: Callable[[Pattern2D], bool] | None = None,
                               block_ok: Callable[[Pattern2D], bool] | None = None) -> Fraction:
    """Fraction of translates u in [0, n-1]^2 whose D x D window is bad.

    A window is bad when it sticks out of the pattern or fails ``window_ok``
    (default: vertically constant with a row in the length-D language).  The
    pattern must be tiled exactly by side-``block_side`` blocks accepted by
    ``block_ok`` (default: the same test at size block_side).
    """
    if p.width != p.height:
        raise BadInput("pattern must be square")
    n = p.width
    if D < 1 or D > block_side:
        raise BadInput(f"window side must satisfy 1 <= D <= {block_side}")
    if n % block_side:
        raise BadInput(f"side {n} is not a multiple of the block side {block_side}")
    if window_ok is None or block_ok is None:
        if hier is None:
            raise BadInput("a hierarchy is needed for the default admissibility tests")
        window_ok = window_ok or aligned_window_ok(hier, D)
        block_ok = block_ok or aligned_window_ok(hier, block_side)
    for by in range(0, n, block_side):
        for bx in range(0, n, block_side):
            if not block_ok(p.sub(bx + 1, by + 1, block_side, block_side)):
                raise BadInput(f"block at ({bx + 1}, {by + 1}) fails the block admissibility test")
    bad = n * n - (n - D + 1) ** 2
    memo: dict = {}
    for uy in range(n - D + 1):
        for ux in range(n - D + 1):
            key = tuple(r[ux:ux + D] for r in p.rows[uy:uy + D])
            ok = memo.get(key)
            if ok is None:
                ok = memo[key] = window_ok(Pattern2D(key, p.alphabet))
            bad += not ok
    return Fraction(bad, n * n)


# ---------------------------------------------------------------------------
# test-pattern generators

def _random_row(hier: Hierarchy, k: int, n: int, rng: np.random.Generator) -> str:
    blocks = hier.dense_level(k)
    ell = hier.ell(k)
    count = n // ell + 2
    text = "".join(blocks[int(i)] for i in rng.integers(0, 4, size=count))
    start = int(rng.integers(0, ell))
    return text[start:start + n]


def structured_pattern(hier: Hierarchy, k: int, n: int, rng: np.random.Generator) -> Pattern2D:
    """Window of a vertically aligned concatenation of level-k block words."""
    return verticalize(_random_row(hier, k, n, rng), n)


def mosaic_pattern(hier: Hierarchy, k: int, n: int, rng: np.random.Generator, bands: int | None = None) -> Pattern2D:
    """Horizontal bands, each a vertically aligned admissible row, with random heights."""
    bands = bands or int(rng.integers(1, 4))
    cuts = sorted(int(c) for c in rng.choice(np.arange(1, n), size=min(bands - 1, n - 1), replace=False))
    heights = [b - a for a, b in zip([0] + cuts, cuts + [n])]
    rows: list[str] = []
    for h in heights:
        rows.extend([_random_row(hier, k, n, rng)] * h)
    return Pattern2D(tuple(rows))


def corrupt(p: Pattern2D, rng: np.random.Generator, flips: int) -> Pattern2D:
    arr = p.array().copy()
    ys = rng.integers(0, p.height, size=flips)
    xs = rng.integers(0, p.width, size=flips)
    for y, x in zip(ys, xs):
        arr[y, x] = (arr[y, x] + int(rng.integers(1, 3))) % 3
    return Pattern2D.from_array(arr, p.alphabet)


def uniform_pattern(n: int, rng: np.random.Generator) -> Pattern2D:
    return Pattern2D.from_array(rng.integers(0, 3, size=(n, n), dtype=np.uint8))


def default_side(hier: Hierarchy, k: int) -> int:
    ell_p = hier.states[k].ell_prime
    return 2 * ell_p + max(8, ell_p // 4)


def tiled_pattern(hier: Hierarchy, k: int, blocks: int, rng: np.random.Generator,
                  dictionary: str | None = None) -> Pattern2D:
    """blocks x blocks grid of vertically aligned level-k block words.

    ``dictionary`` restricts the words to "A" (a_k, 1^ell) or "B" (b_k, 2^ell).
    """
    a, b, one, two = hier.dense_level(k)
    words = {"A": (a, one), "B": (b, two), None: (a, b, one, two)}[dictionary]
    ell = hier.ell(k)
    rows: list[str] = []
    for _ in range(blocks):
        row = "".join(words[int(i)] for i in rng.integers(0, len(words), size=blocks))
        rows.extend([row] * ell)
    return Pattern2D(tuple(rows))
