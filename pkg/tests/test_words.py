import pytest
from hypothesis import given, settings, strategies as st

from subshiftkit.errors import BadInput, CapacityError
from subshiftkit.words import (
    COLLAPSE, DUPLICATED, Concat, DenseWord, Power, Run, build_intermediate, build_level, collapse,
    expand, letter_at, materialize, parse_expr, to_expr, word, zero_count,
)


def test_collapse_is_total():
    assert {collapse(s) for s in DUPLICATED.symbols} == {0, 1, 2}
    assert COLLAPSE[3] == COLLAPSE[4] == 0


def test_level_zero(toy_states):
    lw = build_level(0, toy_states["t1"])
    assert expand(lw.a) == "01" and expand(lw.b) == "02"


def test_toy_level_one_and_two(toy_states):
    s = toy_states["t1"]
    lw1 = build_level(1, s)
    assert expand(lw1.a) == "01010101"
    assert expand(lw1.b) == "02222202"
    lw2 = build_level(2, s)
    assert expand(lw2.b) == "02222202" * 4
    assert expand(lw2.a) == "01010101" + "1" * 16 + "01010101"


def test_toy_intermediate(toy_states):
    s = toy_states["t1"]
    iw2 = build_intermediate(2, s)
    assert expand(iw2.a_p) == "01010101" + "1" * 8
    assert expand(iw2.a_pp) == "1" * 8 + "01010101"
    assert iw2.a_p.length == iw2.a_pp.length == s[2].ell_prime
    iw1 = build_intermediate(1, s)
    assert expand(iw1.a_p) == "0101"
    with pytest.raises(BadInput):
        build_intermediate(0, s)


def test_letter_at_examples(paper_states):
    assert letter_at(word("01"), 1) == 0
    assert letter_at(Power(Run(2, 1), 10**30), 10**29) == 2
    assert letter_at(build_level(1, paper_states).b, 3) == 2
    with pytest.raises(IndexError):
        letter_at(word("01"), 3)


def test_zero_count_examples(paper_states, toy_states):
    assert zero_count(build_level(1, paper_states).a) == 64
    assert zero_count(Run(1, 1000)) == 0
    assert zero_count(build_level(2, toy_states["t1"]).b) == 8


def test_materialize_examples(toy_states):
    b1 = build_level(1, toy_states["t1"]).b
    assert str(materialize(word("01"))) == "01"
    assert str(materialize(b1, 3, 6)) == "2222"
    assert str(materialize(b1, 5, 4)) == ""


def test_materialize_cap(paper_states):
    with pytest.raises(CapacityError):
        expand(build_level(2, paper_states).a)
    with pytest.raises(CapacityError):
        expand(Run(1, 100), cap=10)


def test_paper_level_two_random_access(paper_states):
    lw = build_level(2, paper_states)
    ell = paper_states[2].ell
    assert lw.a.length == lw.b.length == ell
    assert letter_at(lw.b, ell) == 2 and letter_at(lw.b, ell - 1) == 0
    assert letter_at(lw.a, ell // 2) == 1
    assert zero_count(lw.a) == paper_states[2].rho_a and zero_count(lw.b) == paper_states[2].rho_b


def test_zero_counts_match_params(toy_states, paper_states):
    for states in list(toy_states.values()) + [paper_states]:
        for k in range(len(states)):
            lw = build_level(k, states)
            assert zero_count(lw.a) == states[k].rho_a
            assert zero_count(lw.b) == states[k].rho_b


def test_dictionary_alphabets(hiers):
    for h in hiers.values():
        for k in range(4):
            a, b, one, two = h.dense_level(k)
            assert set(a + one) <= {"0", "1"} and set(b + two) <= {"0", "2"}


def test_factorization_invariant(hiers):
    for h in hiers.values():
        for k in range(1, 5):
            s = h.states[k]
            reps = s.n_big // s.n_prime
            lw, iw = h.dense_level(k), h.dense_intermediate(k)
            if k % 2 == 0:
                assert lw[0] == iw["a_p"] + "1" * s.ell_prime * (reps - 2) + iw["a_pp"]
                assert lw[1] == iw["b_p"] * reps
            else:
                assert lw[1] == iw["b_p"] + "2" * s.ell_prime * (reps - 2) + iw["b_pp"]
                assert lw[0] == iw["a_p"] * reps


def test_factorization_sampled_paper(paper_states):
    # level 1 is odd: b_1 = b'_1 2^{...} b''_1 and a_1 = (a'_1)^{N/N'}
    lw, iw = build_level(1, paper_states), build_intermediate(1, paper_states)
    s = paper_states[1]
    reps = s.n_big // s.n_prime
    assert expand(lw.b) == expand(iw.b_p) + "2" * s.ell_prime * (reps - 2) + expand(iw.b_pp)
    assert expand(lw.a) == expand(iw.a_p) * reps


def test_expr_roundtrip(toy_states):
    for k in range(4):
        for w in build_level(k, toy_states["t3"]).as_dict().values():
            assert parse_expr(to_expr(w)) == w
            assert expand(parse_expr(to_expr(w))) == expand(w)


def test_empty_concat_is_empty_word():
    assert parse_expr("cat()").length == 0


@pytest.mark.parametrize("bad", ["run(0)", "pow(run(0,1))", "cat(", "cat(run(0,1),", "run(0,1) junk", "run(7,1)"])
def test_parse_expr_rejects(bad):
    with pytest.raises(BadInput):
        parse_expr(bad)


def test_dense_word_validation():
    assert DenseWord("0120").letter(3) == 2
    with pytest.raises(BadInput):
        DenseWord("013")


def _tree():
    leaf = st.builds(Run, st.integers(0, 2), st.integers(1, 4))
    return st.recursive(
        leaf,
        lambda kids: st.one_of(
            st.builds(lambda ps: Concat(ps), st.lists(kids, min_size=1, max_size=3)),
            st.builds(Power, kids, st.integers(1, 3))),
        max_leaves=8)


@settings(max_examples=150, deadline=None)
@given(_tree(), st.data())
def test_random_access_matches_materialization(w, data):
    text = expand(w)
    assert len(text) == w.length and text.count("0") == w.zeros
    i = data.draw(st.integers(1, w.length))
    assert letter_at(w, i) == int(text[i - 1])
    lo = data.draw(st.integers(1, w.length))
    hi = data.draw(st.integers(lo - 1, w.length))
    assert expand(w, lo, hi) == text[lo - 1:hi]


def test_letter_at_every_position(hiers):
    for k in range(3):
        for w in hiers["t2"].level(k).as_dict().values():
            text = expand(w)
            assert all(letter_at(w, i) == int(text[i - 1]) for i in range(1, len(text) + 1))
