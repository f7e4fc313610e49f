import json
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from subshiftkit._util import cmp_scaled, int_str, parse_int
from subshiftkit.errors import BadInput, CapacityError, ConstraintViolation
from subshiftkit.params import (
    PAPER, REMARK3_TOY_SCHEDULES, TOY, TOY_SCHEDULES, Schedule, check_constraints_c1_c4,
    check_remark3, compute_states, initial_state, mirror, step,
)


def oracle_paper_step(ell, rho_a, rho_b, k):
    """Second implementation of the exact recurrence, written with math.ceil on Fractions."""
    top, bottom = (rho_a, rho_b) if k % 2 == 0 else (rho_b, rho_a)
    n_prime = math.ceil(Fraction(2 * k * top, bottom))
    ell_prime = n_prime * ell
    beta = math.ceil(Fraction(ell * ell * 2 ** (k * ell_prime), bottom * bottom))
    n_big = n_prime * math.ceil(Fraction(k * beta, n_prime * bottom))
    if k % 2 == 0:
        rho_a, rho_b = 2 * rho_a, n_big * rho_b
    else:
        rho_a, rho_b = n_big * rho_a, 2 * rho_b
    return dict(n_prime=n_prime, ell_prime=ell_prime, beta=beta, n_big=n_big, ell=n_big * ell,
                rho_a=rho_a, rho_b=rho_b)


def test_initial_state():
    s = initial_state()
    assert (s.k, s.ell, s.beta, s.rho_a, s.rho_b) == (0, 2, 0, 1, 1)
    assert s.ell_prime is None and s.n_big is None and s.n_prime is None


def test_paper_level_one(paper_states):
    s = paper_states[1]
    assert (s.n_prime, s.ell_prime, s.beta, s.n_big, s.ell, s.rho_a, s.rho_b) == (2, 4, 64, 64, 128, 64, 2)


def test_paper_levels_match_second_implementation(paper_states):
    prev = paper_states[0]
    for s in paper_states[1:]:
        want = oracle_paper_step(prev.ell, prev.rho_a, prev.rho_b, s.k)
        assert {key: getattr(s, key) for key in want} == want
        prev = s


def test_paper_level_two_logs(paper_states):
    s = paper_states[2]
    assert s.beta == 2**32780 and s.ell == 2**32787
    assert s.n_prime == 128 and s.ell_prime == 16384 and s.n_big == 2**32780
    # decimal length of 2^32780
    assert len(int_str(s.beta)) == math.floor(32780 * math.log10(2)) + 1 == 9868


def test_paper_cap():
    with pytest.raises(CapacityError):
        compute_states(Schedule.paper(), 3)


def test_toy_level_one():
    s = compute_states(TOY_SCHEDULES["t1"], 1)[1]
    assert (s.ell_prime, s.ell, s.rho_a, s.rho_b) == (4, 8, 4, 2)


def test_toy_beyond_schedule():
    with pytest.raises(CapacityError):
        step(compute_states(TOY_SCHEDULES["t1"], 5)[-1], TOY_SCHEDULES["t1"])


@pytest.mark.parametrize("triple", [(4, 3, 1), (4, 4, 1), (2, 1, 1), (6, 2, -1)])
def test_toy_level_validation(triple):
    with pytest.raises(ConstraintViolation):
        Schedule.toy([triple])


def test_schedule_json_roundtrip(tmp_path):
    sched = TOY_SCHEDULES["t3"]
    path = tmp_path / "s.json"
    path.write_text(json.dumps(sched.to_json()))
    assert Schedule.load(path).toy_levels == sched.toy_levels


@pytest.mark.parametrize("obj", [{"levels": [{"k": 2, "N": 4, "N_prime": 2}]}, {"levels": [{"k": 1}]},
                                 {"mode": "weird"}, {"levels": [{"k": 1, "N": "x", "N_prime": 2}]}])
def test_schedule_json_rejects(obj):
    with pytest.raises(BadInput):
        Schedule.from_json(obj)


def test_remark3_level_one(paper_states):
    rep = check_remark3(paper_states[:2], PAPER)
    row = rep.levels[0]
    assert row.item(1).status == "holds" and "2 <= 2 <= 4" in row.item(1).detail
    assert row.item(2).status == "holds"
    assert row.item(3).status == "n/a"


def test_remark3_paper_all_hold(paper_states):
    assert check_remark3(paper_states, PAPER).all_hold()


def test_remark3_empty():
    assert check_remark3([], PAPER).levels == ()


def test_c4_paper_level_two(paper_states):
    rep = check_constraints_c1_c4(paper_states)
    assert rep.c4_holds
    assert paper_states[2].f_b == paper_states[1].f_b == Fraction(1, 64)


def test_c4_toy_level_one(toy_states):
    s = toy_states["t1"]
    assert s[1].f_a == Fraction(4, 8) == s[0].f_a
    rep = check_constraints_c1_c4(s[:2])
    assert rep.rows[0].c4
    assert all(v is None for par in rep.monotone.values() for v in par.values())


def test_c2_needs_reconstruction_length(toy_states):
    rep = check_constraints_c1_c4(toy_states["t1"])
    assert all("C2 unevaluable" in r.notes for r in rep.rows)
    rep = check_constraints_c1_c4(toy_states["t1"], {k: 10 for k in range(1, 6)})
    assert all(r.c2 is not None for r in rep.rows)


def test_mirror_is_involution(toy_states):
    for s in toy_states["t2"]:
        assert mirror(mirror(s)) == s
        assert mirror(s).f_a == s.f_b


def test_cmp_scaled_small():
    assert cmp_scaled(Fraction(3), 2, Fraction(12), 0) == 0
    assert cmp_scaled(Fraction(1, 3), 10, Fraction(341), 0) == 1
    assert cmp_scaled(Fraction(1), 10**6, Fraction(1), 10**6 + 1) == -1


def test_parse_int_big():
    n = 7**20000
    assert parse_int(int_str(n)) == n
    with pytest.raises(ValueError):
        parse_int("12a")


toy_levels = st.lists(
    st.tuples(st.integers(2, 5), st.integers(2, 4), st.integers(0, 50)).map(
        lambda t: (t[0] * t[1], t[0], t[2])),
    min_size=1, max_size=5)


@settings(max_examples=60, deadline=None)
@given(toy_levels)
def test_toy_state_invariants(levels):
    sched = Schedule.toy(levels)
    states = compute_states(sched, len(levels))
    for prev, s in zip(states, states[1:]):
        assert s.ell == s.n_big * prev.ell and s.ell_prime == s.n_prime * prev.ell
        assert s.rho_a <= s.ell and s.rho_b <= s.ell
        # the slow dictionary keeps its frequency
        dom = "B" if s.k % 2 == 0 else "A"
        assert s.freq(dom) == prev.freq(dom)
    assert check_constraints_c1_c4(states).c4_holds


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 60), st.integers(-80, 80), st.integers(1, 60), st.integers(-80, 80))
def test_cmp_scaled_matches_direct(a, e1, b, e2):
    lhs, rhs = Fraction(a) * Fraction(2) ** e1, Fraction(b) * Fraction(2) ** e2
    assert cmp_scaled(Fraction(a), e1, Fraction(b), e2) == (lhs > rhs) - (lhs < rhs)


def test_remark3_toy_schedules_report_expected_failures():
    # toy beta cannot reach 2^{k ell'_k}; only the beta lower bound and item 5's left side can fail
    for sched in REMARK3_TOY_SCHEDULES.values():
        rep = check_remark3(compute_states(sched, sched.max_level), TOY)
        assert {item.item for _, item in rep.failures()} <= {2, 5}
        assert rep.all_hold((1, 3, 4))
