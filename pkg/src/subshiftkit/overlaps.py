"""Suffix/prefix overlaps between hierarchy words.

A shift s (0 < s < L) of v against u is reported when the last L - s symbols of
u equal the first L - s symbols of v, i.e. v placed s positions to the right of
u agrees with u on their common part.  The match length is L - s.

For even k the "sparse" words are a_k, a'_k, a''_k (ones in the middle) and the
"periodic" word is b_k = b_{k-1}^N; odd k swaps A and B.  The classification
checks, for the level's parity:

  (i)   sparse_k against itself: every shift is >= (N_k - 1) ell_{k-1}
  (ii)  periodic_k against itself: every shift is a multiple of ell_{k-1},
        or the match has length <= ell_{k-2} (confined to the end copies of
        the level k-2 word)
  (iii) sparse'_k against itself and sparse''_k against itself: no shifts
  (iv)  sparse'_k then sparse''_k: shifts >= ell_{k-1} (markers only);
        sparse''_k then sparse'_k: shifts >= (N'_k - 1) ell_{k-1} and the
        match is a border of the level k-1 word allowed by (ii) one level down
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .errors import BadInput
from .words import DEFAULT_MATERIALIZE_CAP, DenseWord, Hierarchy, SuccinctWord, expand

PASS, FAIL, SKIPPED = "pass", "fail", "skipped"


def _dense(w, cap: int) -> str:
    if isinstance(w, SuccinctWord):
        return expand(w, cap=cap)
    if isinstance(w, DenseWord):
        return w.symbols
    return str(w)


def prefix_function(s: str) -> list[int]:
    pi = [0] * len(s)
    for i in range(1, len(s)):
        j = pi[i - 1]
        while j and s[i] != s[j]:
            j = pi[j - 1]
        if s[i] == s[j]:
            j += 1
        pi[i] = j
    return pi


def overlap_shifts(u, v, cap: int = DEFAULT_MATERIALIZE_CAP) -> frozenset[int]:
    su, sv = _dense(u, cap), _dense(v, cap)
    if len(su) != len(sv):
        raise BadInput(f"overlap needs equal lengths, got {len(su)} and {len(sv)}")
    n = len(su)
    # every border of v#u ending at the last position is a suffix of u that is a prefix of v
    pi = prefix_function(sv + "#" + su)
    m = pi[-1] if pi else 0
    shifts = set()
    while m:
        if m < n:
            shifts.add(n - m)
        m = pi[m - 1]
    return frozenset(shifts)


@dataclass(frozen=True)
class OverlapReport:
    u_name: str
    v_name: str
    shifts: tuple[int, ...]

    def to_json(self) -> dict:
        return {"u": self.u_name, "v": self.v_name, "shifts": list(self.shifts)}


def _report(u_name, u, v_name, v, cap) -> OverlapReport:
    return OverlapReport(u_name, v_name, tuple(sorted(overlap_shifts(u, v, cap))))


def cross_overlaps(k: int, hier: Hierarchy) -> list[OverlapReport]:
    """Overlap reports for every A-word/B-word pair of equal length, both orders.

    Intermediate-scale markers are named one' and two' to tell them apart
    from the level-k ones.
    """
    lw = hier.level(k).as_dict()
    groups = [(_names(lw, ("a", "one")), _names(lw, ("b", "two")))]
    if k >= 1:
        inter = {(key + "'" if key in ("one", "two") else key): w for key, w in hier.intermediate(k).as_dict().items()}
        groups.append((_names(inter, ("a_p", "a_pp", "one'")), _names(inter, ("b_p", "b_pp", "two'"))))
    out = []
    for side_a, side_b in groups:
        for an, aw in side_a:
            for bn, bw in side_b:
                out.append(_report(an, aw, bn, bw, hier.cap))
                out.append(_report(bn, bw, an, aw, hier.cap))
    return out


def _names(d: dict, keys: Sequence[str]) -> list[tuple[str, SuccinctWord]]:
    return [(key, d[key]) for key in keys if key in d]


def verify_no_cross_overlap(k: int, hier: Hierarchy) -> bool:
    return all(not r.shifts for r in cross_overlaps(k, hier))


@dataclass(frozen=True)
class ClassVerdict:
    label: str
    status: str
    detail: str
    offending: tuple[int, ...] = ()

    def to_json(self) -> dict:
        return {"class": self.label, "status": self.status, "detail": self.detail,
                "offending_shifts": list(self.offending)}


@dataclass(frozen=True)
class Classification:
    k: int
    sparse: str
    periodic: str
    classes: tuple[ClassVerdict, ...]
    pairs: tuple[OverlapReport, ...]
    notices: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return all(c.status != FAIL for c in self.classes)

    def verdict(self, label: str) -> ClassVerdict:
        return next(c for c in self.classes if c.label == label)

    def to_json(self) -> dict:
        return {"k": self.k, "sparse": self.sparse, "periodic": self.periodic, "ok": self.ok,
                "classes": [c.to_json() for c in self.classes],
                "pairs": [p.to_json() for p in self.pairs], "notices": list(self.notices)}


def _allowed_border(m: int, k: int, ells: Sequence[int]) -> bool:
    """Is m an admissible self-match length of the periodic word at level k?"""
    if m % ells[k - 1] == 0:
        return True
    return k >= 2 and m <= ells[k - 2]


def classify_self_overlaps(k: int, hier: Hierarchy) -> Classification:
    if k < 1:
        raise BadInput("classification needs k >= 1")
    st = hier.states
    ells = [s.ell for s in st]
    n_big, n_prime = st[k].n_big, st[k].n_prime
    even = k % 2 == 0
    sp, pe = ("a", "b") if even else ("b", "a")
    lw, iw = hier.level(k).as_dict(), hier.intermediate(k).as_dict()
    cap = hier.cap
    notices = []
    pairs = []

    def scan(u_name, u, v_name, v):
        r = _report(u_name, u, v_name, v, cap)
        pairs.append(r)
        return r.shifts

    classes = []
    # (i)
    sh = scan(sp, lw[sp], sp, lw[sp])
    bound = (n_big - 1) * ells[k - 1]
    bad = tuple(s for s in sh if s < bound)
    classes.append(ClassVerdict("i", FAIL if bad else PASS, f"{sp}_k self shifts >= {bound}", bad))
    # (ii)
    sh = scan(pe, lw[pe], pe, lw[pe])
    if k < 2:
        classes.append(ClassVerdict("ii", SKIPPED, "needs ell_{k-2}; undefined for k < 2"))
        notices.append("class ii skipped: ell_{k-2} undefined at k=1")
    else:
        length = ells[k]
        bad = tuple(s for s in sh if not _allowed_border(length - s, k, ells))
        literal = all(s % ells[k - 1] == 0 or length - s == ells[k - 2] for s in sh)
        classes.append(ClassVerdict(
            "ii", FAIL if bad else PASS,
            f"{pe}_k self shifts are multiples of {ells[k - 1]} or leave a match of length <= {ells[k - 2]}"
            f"; exact-length-{ells[k - 2]} reading {'holds' if literal else 'does not hold'}", bad))
    # (iii)
    bad_iii, found = [], []
    for name in (sp + "_p", sp + "_pp"):
        sh = scan(name, iw[name], name, iw[name])
        bad_iii.extend(sh)
        if sh:
            found.append(f"{name} match lengths {sorted(iw[name].length - s for s in sh)}")
    classes.append(ClassVerdict("iii", FAIL if bad_iii else PASS,
                                f"{sp}'_k and {sp}''_k have no self overlaps"
                                + (f"; found {', '.join(found)}" if found else ""), tuple(sorted(bad_iii))))
    # (iv)
    ell_p, prev = st[k].ell_prime, ells[k - 1]
    sh1 = scan(sp + "_p", iw[sp + "_p"], sp + "_pp", iw[sp + "_pp"])
    bad1 = [s for s in sh1 if s < prev]
    sh2 = scan(sp + "_pp", iw[sp + "_pp"], sp + "_p", iw[sp + "_p"])
    lo = (n_prime - 1) * prev
    bad2 = []
    for s in sh2:
        m = ell_p - s
        if s < lo:
            bad2.append(s)
        elif k >= 2 and not _allowed_border(m, k - 1, ells):
            bad2.append(s)
    if k < 2:
        notices.append("class iv: border rule one level down needs ell_{k-2}; only the end-segment bound is checked")
    bad = tuple(sorted(set(bad1) | set(bad2)))
    classes.append(ClassVerdict("iv", FAIL if bad else PASS,
                                f"{sp}'_k/{sp}''_k overlap on markers (shift >= {prev}) or on end segments "
                                f"(shift >= {lo})", bad))
    return Classification(k, sp, pe, tuple(classes), tuple(pairs), tuple(notices))
