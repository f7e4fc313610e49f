"""Scale parameters of the hierarchy.

Each level k carries a block length, an inverse temperature, the maximal zero
counts of the two dictionaries and (for k >= 1) the multipliers N and N'.  Two
modes are supported:

* ``paper``: the exact recurrence with ceilings on big integers.  Level 2 is
  already ~2^32787 long, so computation is capped (default cap 2).
* ``toy``: N, N' and beta come from a schedule; only the length and zero-count
  updates are applied.  Toy hierarchies are small enough to materialize.

Public entry points: ``initial_state``, ``step``, ``compute_states``,
``check_remark3``, ``check_constraints_c1_c4`` and the ``Schedule`` loader.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from ._util import ceil_div, cmp_scaled, digit_summary, frac_str, int_str, parse_int
from .errors import BadInput, CapacityError, ConstraintViolation

PAPER = "paper"
TOY = "toy"
DEFAULT_PAPER_CAP = 2


@dataclass(frozen=True)
class ParamState:
    k: int
    ell: int
    beta: int
    rho_a: int
    rho_b: int
    n_big: int | None = None
    n_prime: int | None = None
    ell_prime: int | None = None

    @property
    def f_a(self) -> Fraction:
        return Fraction(self.rho_a, self.ell)

    @property
    def f_b(self) -> Fraction:
        return Fraction(self.rho_b, self.ell)

    def rho(self, which: str) -> int:
        return self.rho_a if which == "A" else self.rho_b

    def freq(self, which: str) -> Fraction:
        return self.f_a if which == "A" else self.f_b

    def to_dict(self, summary: bool = False) -> dict:
        out: dict = {"k": self.k}
        for name in ("n_prime", "ell_prime", "beta", "n_big", "ell", "rho_a", "rho_b"):
            value = getattr(self, name)
            if value is None:
                out[name] = None
            elif summary and value.bit_length() > 256:
                out[name] = {"log2": value.bit_length() - 1, **digit_summary(value)}
            else:
                out[name] = int_str(value)
        out["f_a"] = frac_str(self.f_a) if not summary else _frac_summary(self.f_a)
        out["f_b"] = frac_str(self.f_b) if not summary else _frac_summary(self.f_b)
        return out


def _frac_summary(q: Fraction):
    if q.numerator.bit_length() + q.denominator.bit_length() <= 512:
        return frac_str(q)
    return {"num_digits": digit_summary(q.numerator)["digits"],
            "den_digits": digit_summary(q.denominator)["digits"]}


@dataclass(frozen=True)
class ToyLevel:
    n_big: int
    n_prime: int
    beta: int


@dataclass(frozen=True)
class Schedule:
    mode: str = PAPER
    toy_levels: tuple[ToyLevel, ...] = ()
    cap: int = DEFAULT_PAPER_CAP
    name: str = field(default="", compare=False)

    def __post_init__(self):
        if self.mode not in (PAPER, TOY):
            raise BadInput(f"unknown schedule mode {self.mode!r}")

    @classmethod
    def paper(cls, cap: int = DEFAULT_PAPER_CAP) -> "Schedule":
        return cls(PAPER, (), cap, name="paper")

    @classmethod
    def toy(cls, levels: Iterable[Sequence[int]], name: str = "") -> "Schedule":
        """Build from (N, N', beta) triples for levels 1, 2, ..."""
        toy_levels = tuple(ToyLevel(int(n), int(np), int(b)) for n, np, b in levels)
        sched = cls(TOY, toy_levels, len(toy_levels), name=name)
        for k, lvl in enumerate(toy_levels, start=1):
            validate_toy_level(k, lvl)
        return sched

    @property
    def max_level(self) -> int:
        return self.cap if self.mode == PAPER else len(self.toy_levels)

    def to_json(self) -> dict:
        if self.mode == PAPER:
            return {"mode": PAPER, "cap": self.cap}
        return {
            "mode": TOY,
            "levels": [
                {"k": k, "N": int_str(t.n_big), "N_prime": int_str(t.n_prime), "beta": int_str(t.beta)}
                for k, t in enumerate(self.toy_levels, start=1)
            ],
        }

    @classmethod
    def from_json(cls, obj: Mapping, name: str = "") -> "Schedule":
        try:
            mode = obj.get("mode", TOY)
            if mode == PAPER:
                return cls.paper(int(obj.get("cap", DEFAULT_PAPER_CAP)))
            if mode != TOY:
                raise BadInput(f"unknown schedule mode {mode!r}")
            rows = sorted(obj["levels"], key=lambda r: int(r["k"]))
            for expect, row in enumerate(rows, start=1):
                if int(row["k"]) != expect:
                    raise BadInput(f"schedule levels must be consecutive from 1; got k={row['k']}")
            triples = [(parse_int(r["N"]), parse_int(r["N_prime"]), parse_int(r.get("beta", 0))) for r in rows]
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, BadInput):
                raise
            raise BadInput(f"malformed schedule: {exc}") from exc
        return cls.toy(triples, name=name)

    @classmethod
    def load(cls, path: str | Path) -> "Schedule":
        try:
            obj = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise BadInput(f"cannot read schedule {path}: {exc}") from exc
        return cls.from_json(obj, name=Path(path).stem)


def validate_toy_level(k: int, lvl: ToyLevel) -> None:
    n, np_, beta = lvl.n_big, lvl.n_prime, lvl.beta
    checks = [
        (np_ >= 2, f"N'_k >= 2 (N'={np_})"),
        (n >= 4, f"N_k >= 4 (N={n})"),
        (np_ > 0 and n % np_ == 0, f"N'_k divides N_k (N={n}, N'={np_})"),
        (np_ > 0 and n // np_ >= 2, f"N_k/N'_k >= 2 (N={n}, N'={np_})"),
        (beta >= 0, f"beta_k >= 0 (beta={beta})"),
    ]
    for ok, what in checks:
        if not ok:
            raise ConstraintViolation(f"level {k}: {what} fails")


# Materializable toy schedules used by tests, the CLI and the report.
TOY_SCHEDULES: dict[str, Schedule] = {
    "t1": Schedule.toy([(4, 2, 8), (4, 2, 32), (4, 2, 128), (4, 2, 512), (4, 2, 2048)], name="t1"),
    "t2": Schedule.toy([(8, 4, 16), (4, 2, 64), (4, 2, 256), (4, 2, 1024), (4, 2, 4096)], name="t2"),
    "t3": Schedule.toy([(8, 2, 16), (6, 3, 96), (4, 2, 384), (4, 2, 1536), (4, 2, 6144)], name="t3"),
}

# Parameter-only toy schedules shaped to follow the growth pattern of the exact
# recurrence (N'_k >= 2k, N_{k-1} <= N'_k, parity of the zero counts).
# beta is set to floor(ell_k / k), the largest value allowed by the upper bound.
def _remark3_schedule(name: str, n_primes: Sequence[int], ratio: int) -> Schedule:
    ell, triples = 2, []
    for k, np_ in enumerate(n_primes, start=1):
        n = np_ * ratio
        ell *= n
        triples.append((n, np_, ell // k))
    return Schedule.toy(triples, name=name)


REMARK3_TOY_SCHEDULES: dict[str, Schedule] = {
    "r1": _remark3_schedule("r1", (2, 4, 8, 16, 32), 2),
    "r2": _remark3_schedule("r2", (3, 6, 12, 24, 48), 2),
    "r3": _remark3_schedule("r3", (2, 6, 18, 54, 162), 3),
}


def initial_state() -> ParamState:
    return ParamState(k=0, ell=2, beta=0, rho_a=1, rho_b=1)


def _advance(prev: ParamState, n_big: int, n_prime: int, beta: int, even: bool) -> ParamState:
    if even:
        rho_a, rho_b = 2 * prev.rho_a, n_big * prev.rho_b
    else:
        rho_a, rho_b = n_big * prev.rho_a, 2 * prev.rho_b
    return ParamState(
        k=prev.k + 1,
        ell=n_big * prev.ell,
        beta=beta,
        rho_a=rho_a,
        rho_b=rho_b,
        n_big=n_big,
        n_prime=n_prime,
        ell_prime=n_prime * prev.ell,
    )


def _paper_multipliers(prev: ParamState, k: int) -> tuple[int, int, int]:
    # For even k the B dictionary is the "slow" one; odd k swaps the roles.
    top, bottom = (prev.rho_a, prev.rho_b) if k % 2 == 0 else (prev.rho_b, prev.rho_a)
    n_prime = ceil_div(2 * k * top, bottom)
    ell_prime = n_prime * prev.ell
    beta = ceil_div(prev.ell**2 * 2 ** (k * ell_prime), bottom**2)
    n_big = n_prime * ceil_div(k * beta, n_prime * bottom)
    return n_big, n_prime, beta


def step(prev: ParamState, schedule: Schedule) -> ParamState:
    k = prev.k + 1
    if schedule.mode == PAPER:
        if k > schedule.cap:
            raise CapacityError(
                f"paper-exact level {k} exceeds the cap {schedule.cap}; raise it explicitly to proceed"
            )
        n_big, n_prime, beta = _paper_multipliers(prev, k)
    else:
        if k > len(schedule.toy_levels):
            raise CapacityError(f"toy schedule defines {len(schedule.toy_levels)} levels, level {k} requested")
        lvl = schedule.toy_levels[k - 1]
        validate_toy_level(k, lvl)
        n_big, n_prime, beta = lvl.n_big, lvl.n_prime, lvl.beta
    return _advance(prev, n_big, n_prime, beta, even=(k % 2 == 0))


def compute_states(schedule: Schedule, levels: int) -> list[ParamState]:
    """States for levels 0..levels."""
    if levels < 0:
        raise BadInput("levels must be >= 0")
    states = [initial_state()]
    for _ in range(levels):
        states.append(step(states[-1], schedule))
    return states


def mirror(state: ParamState) -> ParamState:
    """Swap the A and B labels."""
    return ParamState(state.k, state.ell, state.beta, state.rho_b, state.rho_a,
                      state.n_big, state.n_prime, state.ell_prime)


# ---------------------------------------------------------------------------
# Remark-style inequality checks

HOLDS, FAILS, NA = "holds", "fails", "n/a"


@dataclass(frozen=True)
class ItemVerdict:
    item: int
    status: str
    detail: str

    def to_dict(self) -> dict:
        return {"item": self.item, "status": self.status, "detail": self.detail}


@dataclass(frozen=True)
class LevelChecks:
    k: int
    items: tuple[ItemVerdict, ...]
    ratios: dict

    def item(self, number: int) -> ItemVerdict:
        return next(v for v in self.items if v.item == number)

    def to_dict(self) -> dict:
        return {"k": self.k, "items": [v.to_dict() for v in self.items], "ratios": self.ratios}


@dataclass(frozen=True)
class Remark3Report:
    mode: str
    levels: tuple[LevelChecks, ...]

    def failures(self, items: Iterable[int] = (1, 2, 3, 4, 5)) -> list[tuple[int, ItemVerdict]]:
        wanted = set(items)
        return [(lv.k, v) for lv in self.levels for v in lv.items if v.item in wanted and v.status == FAILS]

    def all_hold(self, items: Iterable[int] = (1, 2, 3, 4, 5)) -> bool:
        return not self.failures(items)

    def to_dict(self) -> dict:
        return {"mode": self.mode, "levels": [lv.to_dict() for lv in self.levels]}


def _verdict(item: int, ok: bool, detail: str) -> ItemVerdict:
    return ItemVerdict(item, HOLDS if ok else FAILS, detail)


def _short(n: int) -> str:
    return int_str(n) if n.bit_length() <= 64 else f"2^{n.bit_length() - 1}..(<2^{n.bit_length()})"


def _next_beta_lower(state: ParamState) -> tuple[Fraction, int]:
    """Exact lower bound coef * 2**exp on the next level's beta (exact recurrence).

    beta_{k+1} = ceil(ell_k^2 2^{(k+1) ell'_{k+1}} / y^2) >= coef * 2**exp.
    """
    k = state.k + 1
    top, bottom = (state.rho_a, state.rho_b) if k % 2 == 0 else (state.rho_b, state.rho_a)
    n_prime = ceil_div(2 * k * top, bottom)
    ell_prime = n_prime * state.ell
    return Fraction(state.ell**2, bottom**2), k * ell_prime


def _item5(state: ParamState, nxt: ParamState | None, mode: str) -> ItemVerdict:
    k = state.k
    if nxt is not None:
        coef, exp, exact = Fraction(nxt.beta), 0, True
        if nxt.beta == 0:
            return _verdict(5, state.beta == 0, "beta_{k+1} = 0")
    elif mode == PAPER:
        coef, exp = _next_beta_lower(state)
        exact = False
    else:
        return ItemVerdict(5, NA, "next level unavailable")
    # left: beta_k * k * 2^{(k+1) ell_k} <= ell_k * beta_{k+1}
    e = (k + 1) * state.ell
    if state.beta == 0:
        left_ok = True
    else:
        left_ok = cmp_scaled(Fraction(state.beta * k), e, coef * state.ell, exp) <= 0
    # right: ell_k * beta_{k+1} <= beta_{k+1} * k * 2^{(k+1) ell_k}  <=>  ell_k <= k 2^{(k+1) ell_k}
    right_ok = cmp_scaled(Fraction(state.ell), 0, Fraction(k), e) <= 0
    how = "exact next level" if exact else "exact lower bound on next beta"
    return _verdict(5, left_ok and right_ok,
                    f"{how}; left {'ok' if left_ok else 'violated'}, right {'ok' if right_ok else 'violated'}")


def _ratio(q: Fraction):
    return _frac_summary(q)


def check_remark3(states: Sequence[ParamState], mode: str = PAPER) -> Remark3Report:
    """Evaluate the five exact inequalities and the asymptotic ratio tables per level.

    ``states`` may start at level 0 or 1; level 0 rows are skipped.  When the next
    level is absent in paper mode, item 5 uses an exact lower bound on beta_{k+1}.
    """
    by_k = {s.k: s for s in states}
    rows = []
    for s in states:
        if s.k < 1:
            continue
        k = s.k
        prev = by_k.get(k - 1)
        nxt = by_k.get(k + 1)
        items = []
        if prev is None:
            raise BadInput(f"level {k - 1} missing; states must be consecutive")
        np_ = s.n_prime
        items.append(_verdict(1, 2 * k <= np_ <= 2 * k * prev.ell,
                              f"{2 * k} <= {_short(np_)} <= {_short(2 * k * prev.ell)}"))
        lower_ok = s.beta.bit_length() > k * s.ell_prime if s.beta > 0 else False
        upper_ok = k * s.beta <= s.ell
        items.append(_verdict(2, lower_ok and upper_ok,
                              f"2^{_short(k * s.ell_prime)} <= {_short(s.beta)} <= {_short(s.ell)}/{k}"
                              f" (lower {'ok' if lower_ok else 'violated'}, upper {'ok' if upper_ok else 'violated'})"))
        if prev.n_big is None:
            items.append(ItemVerdict(3, NA, "N_{k-1} undefined at k=1"))
        else:
            items.append(_verdict(3, prev.n_big <= np_ <= s.n_big,
                                  f"{_short(prev.n_big)} <= {_short(np_)} <= {_short(s.n_big)}"))
        if k % 2:
            items.append(_verdict(4, s.rho_a >= s.rho_b, f"odd k: rho_A={_short(s.rho_a)} >= rho_B={_short(s.rho_b)}"))
        else:
            items.append(_verdict(4, s.rho_b >= s.rho_a, f"even k: rho_B={_short(s.rho_b)} >= rho_A={_short(s.rho_a)}"))
        items.append(_item5(s, nxt, mode))
        ratios = {
            "f_a": _ratio(s.f_a),
            "f_b": _ratio(s.f_b),
            "N_over_N_prime": _ratio(Fraction(s.n_big, np_)),
            "N_prime_over_N_prev": None if prev.n_big is None else _ratio(Fraction(np_, prev.n_big)),
            "beta_next_over_beta": None if (nxt is None or s.beta == 0) else _ratio(Fraction(nxt.beta, s.beta)),
            "f_a_over_f_b": _ratio(s.f_a / s.f_b),
        }
        rows.append(LevelChecks(k, tuple(items), ratios))
    return Remark3Report(mode, tuple(rows))


# ---------------------------------------------------------------------------
# Constraints C1-C4

@dataclass(frozen=True)
class ConstraintRow:
    k: int
    c1: Fraction
    c2: Fraction | None
    c3: Fraction
    c4: bool
    notes: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "c1_ratio": _ratio(self.c1),
            "c2_ratio": None if self.c2 is None else _ratio(self.c2),
            "c3_ratio": _ratio(self.c3),
            "c4_holds": self.c4,
            "notes": list(self.notes),
        }


@dataclass(frozen=True)
class ConstraintReport:
    rows: tuple[ConstraintRow, ...]
    # per constraint, per parity ("even"/"odd"): True/False, or None with < 2 entries
    monotone: dict

    @property
    def c4_holds(self) -> bool:
        return all(r.c4 for r in self.rows)

    def to_dict(self) -> dict:
        return {"rows": [r.to_dict() for r in self.rows], "monotone_decreasing": self.monotone}


def check_constraints_c1_c4(states: Sequence[ParamState], r_prime: Mapping[int, int] | None = None) -> ConstraintReport:
    """Ratio sequences for the three asymptotic constraints and the exact frequency identity.

    For even k the dominant dictionary is B; odd k swaps A and B.  Each ratio is
    (left side) / (right side) of the corresponding ``<<`` statement, so a
    decreasing sequence is the finite-prefix trend the constraint asks for.
    """
    r_prime = dict(r_prime or {})
    by_k = {s.k: s for s in states}
    rows = []
    for s in states:
        if s.k < 1:
            continue
        prev = by_k.get(s.k - 1)
        if prev is None:
            raise BadInput(f"level {s.k - 1} missing; states must be consecutive")
        dom, other = ("B", "A") if s.k % 2 == 0 else ("A", "B")
        notes = []
        c1 = Fraction(s.beta, s.ell) / s.freq(dom)
        if s.k in r_prime and s.beta > 0:
            c2 = Fraction(r_prime[s.k] ** 2, s.beta) / prev.freq(dom) ** 2
        else:
            c2 = None
            notes.append("C2 unevaluable" + (" (beta_k = 0)" if s.k in r_prime else ""))
        c3 = (prev.freq(other) / s.n_prime) / prev.freq(dom)
        c4 = s.freq(dom) == prev.freq(dom)
        rows.append(ConstraintRow(s.k, c1, c2, c3, c4, tuple(notes)))
    monotone: dict = {}
    for name in ("c1", "c2", "c3"):
        monotone[name] = {}
        for parity, rem in (("even", 0), ("odd", 1)):
            seq = [getattr(r, name) for r in rows if r.k % 2 == rem and getattr(r, name) is not None]
            monotone[name][parity] = None if len(seq) < 2 else all(b < a for a, b in zip(seq, seq[1:]))
    return ConstraintReport(tuple(rows), monotone)
