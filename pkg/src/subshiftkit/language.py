"""Language, forbidden words and reconstruction for the one-dimensional layer.

Two independent routes compute the words of length n that occur in the subshift:

* the full-word route (``language_slice``, ``globally_admissible``) slides a
  window over every concatenation of two block words at the least level k
  with ell_k >= n;
* the segment route (``segment_language``, used by ``forbidden_slice``) only
  looks at concatenations of a terminal and an initial segment of length
  (p+1) ell_{k-1}, where p is the number of level-(k-1) blocks needed to
  cover n.  When p is close to N_k the segments are clamped to full words.

Forbidden words are the complement in {0,1,2}^n of the language, and are
produced lazily in lexicographic order by walking the prefix tree of the
language.
"""
from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import product
from typing import Iterable, Iterator

from ._util import ceil_div
from .errors import BadInput, CapacityError
from .words import DenseWord, Hierarchy, expand

ALPHABET = "012"


def _text(w) -> str:
    s = str(w)
    if set(s) - set(ALPHABET):
        raise BadInput(f"word {s!r} is not over {{0,1,2}}")
    return s


def _windows(blocks: Iterable[str], tails: Iterable[str], n: int) -> set[str]:
    out: set[str] = set()
    tails = tuple(tails)
    for head in blocks:
        for tail in tails:
            s = head + tail
            out.update(s[i:i + n] for i in range(len(s) - n + 1))
    return out


def block_decomposition(n: int, hier: Hierarchy) -> tuple[int, int]:
    """(k, p) with ell_{k-1} < n <= ell_k and (p-1) ell_{k-1} < n <= p ell_{k-1}.

    For n <= ell_0 the level is 0 and p = n (blocks of length one).
    """
    if n < 1:
        raise BadInput("length must be >= 1")
    k = hier.level_for(n)
    if k == 0:
        return 0, n
    return k, ceil_div(n, hier.ell(k - 1))


# ---------------------------------------------------------------------------
# full-word route

def globally_admissible(w, hier: Hierarchy) -> bool:
    s = _text(w)
    if not s:
        raise BadInput("the empty word has no level")
    k = hier.level_for(len(s))
    blocks = hier.dense_level(k)
    return any(s in b1 + b2 for b1 in blocks for b2 in blocks)


@dataclass(frozen=True)
class LanguageSlice:
    n: int
    words: frozenset
    level: int

    @property
    def count(self) -> int:
        return len(self.words)

    def sorted(self) -> list[str]:
        return sorted(self.words)


def language_slice(n: int, hier: Hierarchy, level: int | None = None) -> LanguageSlice:
    """All length-n windows of concatenations of two level-k block words."""
    if n < 1:
        raise BadInput("length must be >= 1")
    k = hier.level_for(n) if level is None else level
    if hier.ell(k) < n:
        raise BadInput(f"level {k} blocks are shorter than {n}")
    blocks = hier.dense_level(k)
    return LanguageSlice(n, frozenset(_windows(blocks, blocks, n)), k)


def complexity_function(n_max: int, hier: Hierarchy, workers: int = 1) -> list[tuple[int, int, float]]:
    """Rows (n, C(n), ln C(n) / n) for n = 1..n_max."""
    counts = _ordered_map(lambda n: language_slice(n, hier).count, range(1, n_max + 1), workers)
    return [(n, c, math.log(c) / n) for n, c in zip(range(1, n_max + 1), counts)]


# ---------------------------------------------------------------------------
# segment route

def segment_language(n: int, hier: Hierarchy) -> frozenset:
    """Admissible words of length n computed from terminal/initial block segments."""
    k, p = block_decomposition(n, hier)
    if k == 0:
        return frozenset("".join(t) for t in product(ALPHABET, repeat=n)
                         if globally_admissible("".join(t), hier))
    lw = hier.level(k)
    ell = hier.ell(k)
    seg = min((p + 1) * hier.ell(k - 1), ell)
    words = (lw.a, lw.b, lw.one, lw.two)
    tails = [expand(w, ell - seg + 1, ell, cap=hier.cap) for w in words]
    heads = [expand(w, 1, seg, cap=hier.cap) for w in words]
    return frozenset(_windows(tails, heads, n))


@dataclass(frozen=True)
class ForbiddenWordRecord:
    n: int
    word: str
    level_k: int
    block_p: int

    @property
    def dense(self) -> DenseWord:
        return DenseWord(self.word)

    def to_json(self) -> dict:
        return {"n": self.n, "word": self.word, "k": self.level_k, "p": self.block_p}


class ForbiddenSlice:
    """Forbidden words of one length, as the lazily listed complement of the language."""

    def __init__(self, n: int, admissible: frozenset, level_k: int, block_p: int):
        self.n = n
        self.admissible = admissible
        self.level_k = level_k
        self.block_p = block_p

    def __len__(self) -> int:
        return 3**self.n - len(self.admissible)

    def __contains__(self, w) -> bool:
        s = str(w)
        return len(s) == self.n and not set(s) - set(ALPHABET) and s not in self.admissible

    def words(self) -> Iterator[str]:
        return _complement_lex(self.n, self.admissible)

    def __iter__(self) -> Iterator[ForbiddenWordRecord]:
        for w in self.words():
            yield ForbiddenWordRecord(self.n, w, self.level_k, self.block_p)

    def to_list(self, limit: int | None = None) -> list[ForbiddenWordRecord]:
        if limit is not None and len(self) > limit:
            raise CapacityError(f"{len(self)} forbidden words of length {self.n} exceed the limit {limit}")
        return list(self)


def _complement_lex(n: int, admissible: frozenset) -> Iterator[str]:
    if n == 0:
        return
    prefixes = [set() for _ in range(n)]
    for w in admissible:
        for m in range(1, n):
            prefixes[m].add(w[:m])
    # stack entries: (kind, word); "node" = partially admissible prefix,
    # "free" = prefix with no admissible extension
    stack = [("node", "")]
    while stack:
        kind, q = stack.pop()
        if kind == "leaf":
            yield q
        elif kind == "free":
            rest = n - len(q)
            for tail in product(ALPHABET, repeat=rest):
                yield q + "".join(tail)
        else:
            m = len(q) + 1
            children = []
            for a in ALPHABET:
                c = q + a
                if m == n:
                    if c not in admissible:
                        children.append(("leaf", c))
                elif c in prefixes[m]:
                    children.append(("node", c))
                else:
                    children.append(("free", c))
            stack.extend(reversed(children))


def forbidden_slice(n: int, hier: Hierarchy) -> ForbiddenSlice:
    k, p = block_decomposition(n, hier)
    return ForbiddenSlice(n, segment_language(n, hier), k, p)


def minimal_forbidden_slice(n: int, hier: Hierarchy) -> list[ForbiddenWordRecord]:
    """Forbidden words of length n all of whose proper factors are admissible."""
    k, p = block_decomposition(n, hier)
    here = segment_language(n, hier)
    if n == 1:
        cands = set(ALPHABET)
    else:
        shorter = segment_language(n - 1, hier)
        cands = {u + a for u in shorter for a in ALPHABET if (u + a)[1:] in shorter}
    return [ForbiddenWordRecord(n, w, k, p) for w in sorted(cands - here)]


@dataclass(frozen=True)
class SliceStats:
    n: int
    level_k: int
    block_p: int
    forbidden: int
    candidates: int
    seconds: float

    def to_json(self) -> dict:
        return {"n": self.n, "k": self.level_k, "p": self.block_p, "forbidden": self.forbidden,
                "candidates": self.candidates, "seconds": self.seconds}


def _ordered_map(fn, items, workers: int):
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def enumerate_forbidden(n_max: int, hier: Hierarchy, minimal: bool = False,
                        stats: list | None = None, workers: int = 1) -> Iterator[ForbiddenWordRecord]:
    """Forbidden words ordered by (length, lexicographic) for lengths 1..n_max.

    With ``minimal`` only words whose proper factors are all admissible are
    listed.  If ``stats`` is a list it receives one SliceStats per length; the
    candidate count is the number of length-n words the prefix walk tests,
    i.e. 3 * C(n-1).
    """
    if n_max < 0:
        raise BadInput("n_max must be >= 0")

    def work(n):
        t0 = time.perf_counter()
        if minimal:
            recs = minimal_forbidden_slice(n, hier)
            size = len(recs)
        else:
            recs = forbidden_slice(n, hier)
            size = len(recs)
        cands = 3 * (len(segment_language(n - 1, hier)) if n > 1 else 1)
        k, p = block_decomposition(n, hier)
        return recs, SliceStats(n, k, p, size, cands, time.perf_counter() - t0)

    results = _ordered_map(work, range(1, n_max + 1), workers)
    prev = None
    for recs, st in results:
        if stats is not None:
            stats.append(st)
        for rec in recs:
            key = (rec.n, rec.word)
            assert prev is None or key > prev
            prev = key
            yield rec


# ---------------------------------------------------------------------------
# reconstruction

@dataclass(frozen=True)
class ReconstructionReport:
    n: int
    length: int
    locally_admissible: int
    nodes_visited: int
    failures: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.failures

    def to_json(self) -> dict:
        return {"n": self.n, "length": self.length, "locally_admissible": self.locally_admissible,
                "nodes_visited": self.nodes_visited, "failures": list(self.failures), "ok": self.ok}


def reconstruction_report(n: int, hier: Hierarchy) -> ReconstructionReport:
    """Check that every locally admissible word of length 2n+1 is globally admissible.

    Local admissibility uses the segment route for every length up to 2n+1;
    words are grown one symbol at a time and a prefix is dropped as soon as one
    of its suffixes is forbidden.  Survivors are then tested with the full-word
    route.
    """
    if n < 0:
        raise BadInput("n must be >= 0")
    if n == 0:
        return ReconstructionReport(0, 1, 0, 0, ())
    m = 2 * n + 1
    hier.level_for(m)
    lang = {j: segment_language(j, hier) for j in range(1, m + 1)}
    survivors, failures, visited = 0, [], 0
    stack = [""]
    while stack:
        q = stack.pop()
        for a in reversed(ALPHABET):
            c = q + a
            visited += 1
            if all(c[-j:] in lang[j] for j in range(1, len(c) + 1)):
                if len(c) == m:
                    survivors += 1
                    if not globally_admissible(c, hier):
                        failures.append(c)
                else:
                    stack.append(c)
    return ReconstructionReport(n, m, survivors, visited, tuple(sorted(failures)))


def verify_reconstruction(n: int, hier: Hierarchy) -> bool:
    return reconstruction_report(n, hier).ok
