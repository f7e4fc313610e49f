import itertools
from decimal import Context, Decimal, localcontext
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from subshiftkit.errors import BadInput, ConstraintViolation
from subshiftkit.grid2d import count_duplications, verticalize
from subshiftkit.params import ParamState, mirror
from subshiftkit.thermo import (
    NO_FORCING, PROOF, STATEMENT, BoundInputs, LogLinear, binary_entropy, chaotic_report,
    dictionary_log_count, entropy_lower_bound, epsilon_coefficient, epsilon_k, pressure_lower_bound,
    pressure_upper_bound_rhs, surrogate_inputs, upper_bound_at,
)
from subshiftkit.words import zero_count

from . import oracles

LN2 = Decimal(2).ln(Context(prec=60))


def close(a, b, digits=40):
    with localcontext(Context(prec=80)):
        return _close(Decimal(a), Decimal(b), digits)


def _close(a, b, digits):
    return abs(a - b) <= Decimal(10) ** -digits * max(Decimal(1), abs(a), abs(b))


def synthetic(k=2, **over):
    """A consistent pair of states with tiny correction terms."""
    prev = ParamState(k - 1, 2**20, 0, 2**19, 2**10, n_big=2**10, n_prime=2, ell_prime=2**11)
    n_big, n_prime = 2**150, 2**30
    state = ParamState(k, n_big * prev.ell, 2**130, 2 * prev.rho_a, n_big * prev.rho_b,
                       n_big=n_big, n_prime=n_prime, ell_prime=n_prime * prev.ell)
    args = dict(R_prime=state.ell_prime, C_prime=1)
    args.update(over)
    return BoundInputs(k, state, prev, **args)


def test_entropy_lower_bound_examples(paper_states, toy_states):
    assert entropy_lower_bound(paper_states[1]) == Fraction(1, 64)
    assert entropy_lower_bound(paper_states[0]) == Fraction(1, 2)
    s = toy_states["t1"]
    assert entropy_lower_bound(s[2]) == entropy_lower_bound(s[1])


def test_entropy_lower_bound_is_zero_density(hiers):
    for h in hiers.values():
        for k in range(h.top + 1):
            b = h.level(k).b
            assert entropy_lower_bound(h.states[k]) == Fraction(zero_count(b), b.length)


def test_pressure_lower_bound_examples(paper_states):
    lb = pressure_lower_bound(paper_states[1], 2)
    assert (lb.frequency, lb.penalty) == (Fraction(1, 64), Fraction(2))
    assert lb.value() < 0
    zero_beta = ParamState(1, 8, 0, 4, 2)
    with localcontext(Context(prec=60)):
        assert close(pressure_lower_bound(zero_beta, 2).value(), LN2 / 4)
    assert pressure_lower_bound(paper_states[1], 4).penalty == 2 * lb.penalty


def test_epsilon_examples(paper_states):
    prev = ParamState(0, 2, 0, 1, 1)
    st_ = ParamState(1, 8, 81, 4, 2, n_big=4, n_prime=2, ell_prime=4)
    inp = BoundInputs(1, st_, prev, R_prime=9, C_prime=1, card_A=2)
    assert epsilon_coefficient(inp) == 1
    assert close(epsilon_k(inp).value(), LN2)
    doubled = BoundInputs(1, ParamState(1, 8, 162, 4, 2, n_big=4, n_prime=2, ell_prime=4), prev, 9, 1, card_A=2)
    assert epsilon_coefficient(doubled) == Fraction(1, 2)
    assert epsilon_coefficient(surrogate_inputs(paper_states, 1)) == Fraction(81, 64)
    with pytest.raises(BadInput):
        epsilon_coefficient(BoundInputs(1, ParamState(1, 8, 0, 4, 2, n_big=4, n_prime=2, ell_prime=4), prev, 9, 1))


def test_epsilon_scaling():
    base = synthetic(R_prime=2**50)
    quad = synthetic(R_prime=2**52)
    assert epsilon_coefficient(quad) == 16 * epsilon_coefficient(base)


def test_binary_entropy_examples():
    assert close(binary_entropy(Fraction(1, 2)), LN2)
    assert binary_entropy(0) == 0 and binary_entropy(1) == 0
    with localcontext(Context(prec=60)):
        quarter = Decimal(1) / 4 * Decimal(4).ln() + Decimal(3) / 4 * (Decimal(4) / 3).ln()
    assert close(binary_entropy(Fraction(1, 4)), quarter)
    for bad in (Fraction(-1, 10), Fraction(11, 10)):
        with pytest.raises(ConstraintViolation):
            binary_entropy(bad)


@settings(max_examples=60, deadline=None)
@given(st.fractions(min_value=0, max_value=1))
def test_binary_entropy_range(e):
    h = binary_entropy(e)
    assert 0 <= h <= LN2 + Decimal(10) ** -45


def test_loglinear_factorizes():
    assert LogLinear.log(12) == LogLinear.log(2, 2) + LogLinear.log(3)
    prod = LogLinear.log(6) * LogLinear.log(2)
    assert prod.coefficient((2, 2)) == 1 and prod.coefficient((2, 3)) == 1
    with localcontext(Context(prec=60)):
        assert close(prod.value(), Decimal(6).ln() * LN2)
    assert (LogLinear.log(5) - LogLinear.log(5)).is_zero()
    with pytest.raises(BadInput):
        LogLinear.log(1)


def test_upper_bound_terms_reduce():
    inp = synthetic()
    ub = pressure_upper_bound_rhs(inp, 1)
    st_, prev = inp.state, inp.prev
    assert ub.term("complexity").expr.is_zero()
    assert ub.term("a_leak").expr == LogLinear.log(2, Fraction(2, st_.n_prime) * prev.f_a)
    assert ub.term("boundary").expr == LogLinear.log(3, Fraction(1, st_.ell_prime))
    assert ub.term("reconstruction_boundary").expr == LogLinear.log(3, Fraction(8, inp.R_prime))
    slope = Fraction(prev.n_big, prev.n_big - 1) * prev.f_b
    assert ub.term("duplication").expr.coefficient((2,)) == slope
    at_zero = pressure_upper_bound_rhs(inp, 0)
    assert at_zero.term("duplication").expr.coefficient((2,)) == 0
    assert not at_zero.term("duplication").expr.is_zero()


def test_statement_and_proof_forms_agree():
    rng = np.random.default_rng(4)
    for _ in range(20):
        prev, state, extra, mu = oracles.random_bound_case(rng)
        inp = BoundInputs(state.k, state, prev, **extra)
        a = pressure_upper_bound_rhs(inp, mu, form=PROOF)
        b = pressure_upper_bound_rhs(inp, mu, form=STATEMENT)
        assert a.exact_part == b.exact_part
        assert close(a.total, b.total, 45)
        assert {t.name for t in a.terms} - {t.name for t in b.terms} == {"epsilon_two"}


def test_matches_mpmath_oracle():
    rng = np.random.default_rng(8)
    for _ in range(30):
        prev, state, extra, mu = oracles.random_bound_case(rng)
        inp = BoundInputs(state.k, state, prev, **extra)
        dup, leak = ("B", "A") if state.k % 2 == 0 else ("A", "B")
        want = oracles.monolithic_upper_bound(
            state.n_prime, state.ell_prime, prev.n_big, prev.freq(dup), prev.freq(leak), state.beta,
            extra["R_prime"], extra["C_prime"], extra["card_A"], extra["card_A_tilde"], extra["card_A_hat"], mu)
        got = pressure_upper_bound_rhs(inp, mu).total
        assert close(got, Decimal(mpmath.nstr(want, 55)), 40)


def test_upper_bound_errors(paper_states, toy_states):
    with pytest.raises(ConstraintViolation, match="duplication"):
        pressure_upper_bound_rhs(surrogate_inputs(paper_states, 1), 1)
    with pytest.raises(ConstraintViolation, match="binary_entropy"):
        pressure_upper_bound_rhs(surrogate_inputs(toy_states["t1"], 2), 1)
    with pytest.raises(ConstraintViolation, match="duplication"):
        pressure_upper_bound_rhs(synthetic(), Fraction(3, 2))
    with pytest.raises(BadInput):
        synthetic(R_prime=5)
    with pytest.raises(BadInput):
        synthetic(card_A=1)


@settings(max_examples=40, deadline=None)
@given(st.fractions(0, 1), st.fractions(0, 1))
def test_monotone_in_mu(m1, m2):
    inp = synthetic()
    lo, hi = sorted((m1, m2))
    assert pressure_upper_bound_rhs(inp, lo).total <= pressure_upper_bound_rhs(inp, hi).total


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 10**6), st.integers(1, 10**6))
def test_monotone_in_complexity(c1, c2):
    lo, hi = sorted((c1, c2))
    assert pressure_upper_bound_rhs(synthetic(C_prime=lo), 1).total <= \
        pressure_upper_bound_rhs(synthetic(C_prime=hi), 1).total


def _with_beta(beta, card_a=2):
    prev = ParamState(1, 16, 8, 8, 2, n_big=8, n_prime=2, ell_prime=4)
    state = ParamState(2, 64, beta, 16, 8, n_big=4, n_prime=2, ell_prime=32)
    return BoundInputs(2, state, prev, R_prime=32, C_prime=1, card_A=card_a, card_A_tilde=2, card_A_hat=2)


@settings(max_examples=40, deadline=None)
@given(st.integers(1420, 10**7), st.integers(1420, 10**7))
def test_monotone_in_epsilon_below_half(b1, b2):
    # beta >= 1420 keeps epsilon = 1024 ln 2 / beta below 1/2, where H is increasing
    small, large = sorted((b1, b2), reverse=True)
    assert pressure_upper_bound_rhs(_with_beta(small), 1).total <= pressure_upper_bound_rhs(_with_beta(large), 1).total


def test_epsilon_monotonicity_breaks_near_one():
    # close to epsilon = 1 the drop of H(eps) outweighs the linear epsilon terms
    eps = [epsilon_k(_with_beta(b)).value() for b in (760, 720)]
    assert eps[0] < eps[1] < 1
    assert pressure_upper_bound_rhs(_with_beta(760), 1).total > pressure_upper_bound_rhs(_with_beta(720), 1).total


def test_chaotic_forcing_above_half():
    row = chaotic_report([synthetic()])[0]
    assert row.implied_mu > Decimal(1) / 2
    assert row.roundtrip_ok
    assert close(upper_bound_at(synthetic(), row.implied_mu), row.lower, 45)


def test_chaotic_no_forcing(paper_states):
    row = chaotic_report([surrogate_inputs(paper_states, 2)])[0]
    assert row.implied_mu <= 0 and row.verdict == NO_FORCING
    assert row.roundtrip_ok


def test_chaotic_mirror_symmetry():
    even = synthetic(k=2)
    odd = BoundInputs(3, ParamState(3, *_fields(mirror(even.state))), ParamState(2, *_fields(mirror(even.prev))),
                      even.R_prime, even.C_prime)
    a, b = chaotic_report([even])[0], chaotic_report([odd])[0]
    assert (a.parity, b.parity) == ("even", "odd")
    assert a.implied_mu == b.implied_mu and a.lower == b.lower


def _fields(s):
    return (s.ell, s.beta, s.rho_a, s.rho_b, s.n_big, s.n_prime, s.ell_prime)


def test_chaotic_roundtrip_random():
    rng = np.random.default_rng(21)
    inputs = []
    for _ in range(25):
        prev, state, extra, _ = oracles.random_bound_case(rng)
        inputs.append(BoundInputs(state.k, state, prev, **extra))
    for inp in inputs:
        row = chaotic_report([inp])[0]
        assert row.roundtrip_ok
        assert close(upper_bound_at(inp, row.implied_mu), row.lower, 40)


def test_dictionary_log_count_examples(toy_states, t1):
    s = toy_states["t1"]
    assert dictionary_log_count(s, 0, "B", 2) == 2
    assert dictionary_log_count(s, 1, "B", 8) == 16
    assert count_duplications(verticalize(t1.dense_level(1)[1], 8)) == 2**16
    assert dictionary_log_count(s, 1, "A", 8, word="1" * 8) == 0
    with pytest.raises(BadInput):
        dictionary_log_count(s, 1, "C", 8)


def test_duplication_brute_force(toy_states, t1):
    s = toy_states["t1"]
    for k in (0, 1):
        b = t1.dense_level(k)[1]
        ell = len(b)
        zeros = [i for i, c in enumerate(b * ell) if c == "0"]
        cells = list(b * ell)
        seen = set()
        for choice in itertools.product("34", repeat=len(zeros)):
            for i, c in zip(zeros, choice):
                cells[i] = c
            seen.add("".join(cells))
        assert len(seen) == 2 ** dictionary_log_count(s, k, "B", ell) == 2 ** (ell * s[k].rho_b)
