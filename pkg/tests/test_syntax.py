from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pgclkit.syntax import (
    And, Assign, BinOp, Choice, Cmp, Not, Or, PgclSyntaxError,
    ProbabilityRangeError, Rat, Seq, VarRef, While, is_ordinary, parse,
    pretty_print, seq_of, vars_of,
)
from tests.corpus import DIVERGE_SRC, FAIR_SRC, GEO_SRC, deterministic_run
from pgclkit.semantics import Valuation


def test_parse_assignment():
    assert parse("x := 3") == Assign("x", Rat(Fraction(3)))


def test_parse_fair_coin():
    # [TRIVIAL] shape of a one-line probabilistic choice
    assert parse(FAIR_SRC) == Choice(
        Assign("x", Rat(Fraction(1))), Fraction(1, 2), Assign("x", Rat(Fraction(0))))


def test_parse_sequence_right_nested():
    p = parse("x := 1; y := 2; z := 3")
    assert isinstance(p, Seq)
    assert p.first == Assign("x", Rat(Fraction(1)))
    assert isinstance(p.second, Seq)
    assert p.second.second == Assign("z", Rat(Fraction(3)))


def test_parse_while():
    p = parse(DIVERGE_SRC)
    assert p == While(Cmp("=", VarRef("x"), Rat(Fraction(0))),
                      Assign("x", VarRef("x")))


def test_literal_fraction_folds():
    # "1/2" in expression position is a single rational literal
    assert parse("x := 1/2") == Assign("x", Rat(Fraction(1, 2)))
    assert parse("p := 3/4 + 1") == Assign(
        "p", BinOp("+", Rat(Fraction(3, 4)), Rat(Fraction(1))))


def test_decimal_literal():
    assert parse("x := 0.25") == Assign("x", Rat(Fraction(1, 4)))


def test_division_of_nonliterals_stays_an_operator():
    assert parse("x := y / 2") == Assign(
        "x", BinOp("/", VarRef("y"), Rat(Fraction(2))))


def test_precedence_and_associativity():
    assert parse("x := 1 + 2 * 3") == Assign(
        "x", BinOp("+", Rat(Fraction(1)),
                   BinOp("*", Rat(Fraction(2)), Rat(Fraction(3)))))
    assert parse("x := 1 - 2 - 3") == Assign(
        "x", BinOp("-", BinOp("-", Rat(Fraction(1)), Rat(Fraction(2))),
                   Rat(Fraction(3))))


def test_flipped_comparisons():
    assert parse("while (x > 1) { x := x }") == parse("while (1 < x) { x := x }")
    assert parse("while (x >= 1) { x := x }") == parse("while (1 <= x) { x := x }")


def test_bool_connectives():
    p = parse("while (x < 1 && y = 2 || !(z != 3)) { x := x }")
    assert p.cond == Or(
        And(Cmp("<", VarRef("x"), Rat(Fraction(1))),
            Cmp("=", VarRef("y"), Rat(Fraction(2)))),
        Not(Cmp("!=", VarRef("z"), Rat(Fraction(3)))))


def test_parenthesized_bool_vs_arith_operand():
    # "(" may open a boolean group or an arithmetic operand; both must parse
    grouped = parse("while ((x < 1)) { x := x }")
    assert grouped.cond == Cmp("<", VarRef("x"), Rat(Fraction(1)))
    arith = parse("while ((x + 1) * 2 < 3) { x := x }")
    assert arith.cond == Cmp(
        "<", BinOp("*", BinOp("+", VarRef("x"), Rat(Fraction(1))),
                   Rat(Fraction(2))), Rat(Fraction(3)))


def test_comments_and_whitespace():
    src = "x := 1;  # set up\n# a full-line comment\ny := x + 1"
    assert parse(src) == parse("x := 1; y := x + 1")


def test_comment_does_not_join_statements():
    with pytest.raises(PgclSyntaxError):
        parse("x := 1 # comment\ny := 2")  # still needs the semicolon


def test_probability_out_of_range():
    with pytest.raises(ProbabilityRangeError):
        parse("{x := 1} [3/2] {x := 0}")
    with pytest.raises(ProbabilityRangeError):
        parse("{x := 1} [2] {x := 0}")


def test_boundary_probabilities_allowed():
    parse("{x := 1} [0] {x := 0}")
    parse("{x := 1} [1] {x := 0}")


def test_syntax_error_position():
    with pytest.raises(PgclSyntaxError) as info:
        parse("x := 1;\ny := @")
    assert info.value.line == 2
    assert info.value.column == 6


def test_zero_denominator_rejected():
    with pytest.raises(PgclSyntaxError):
        parse("{x := 1} [1/0] {x := 0}")


def test_trailing_input_rejected():
    with pytest.raises(PgclSyntaxError):
        parse("x := 1 y := 2")


# ---------- Desugaring ----------

def test_skip_desugars_to_unit_assignment():
    p = parse("skip")
    assert p == Assign("__unit", Rat(Fraction(0)))
    assert is_ordinary(p)


def test_if_desugars_into_core_constructs():
    p = parse("if (x < 1) { y := 1 } else { y := 2 }")
    # no Choice appears and the observable behavior matches both branches
    assert is_ordinary(p)
    env_then, _ = deterministic_run(p, Valuation())
    assert env_then.get("y") == 1
    env_else, _ = deterministic_run(p, Valuation({"x": Fraction(5)}))
    assert env_else.get("y") == 2


def test_if_runs_exactly_one_branch_once():
    p = parse("y := 0; if (y < 1) { y := y + 5 } else { y := y + 9 }")
    env, _ = deterministic_run(p, Valuation())
    assert env.get("y") == 5


@pytest.mark.parametrize("x0, expected", [(0, 7), (3, 9)])
def test_if_branch_selection(x0, expected):
    p = parse("if (x = 0) { y := 7 } else { y := 9 }")
    env, _ = deterministic_run(p, Valuation({"x": Fraction(x0)}))
    assert env.get("y") == expected


# ---------- Queries ----------

def test_is_ordinary():
    assert is_ordinary(parse(DIVERGE_SRC))
    assert not is_ordinary(parse(FAIR_SRC))
    assert not is_ordinary(parse(GEO_SRC))


def test_vars_of_first_occurrence_order():
    assert vars_of(parse(GEO_SRC)) == ["i", "c"]
    assert vars_of(parse("x := y + z; a := x")) == ["x", "y", "z", "a"]
    assert vars_of(parse("while (b < 1) { a := b }")) == ["b", "a"]


def test_seq_of_flattens():
    a, b, c = (Assign(v, Rat(Fraction(0))) for v in "abc")
    nested = seq_of([Seq(Seq(a, b), c)])
    assert nested == Seq(a, Seq(b, c))


# ---------- Pretty-printer round trips ----------

@pytest.mark.parametrize("src", [
    FAIR_SRC, GEO_SRC, DIVERGE_SRC,
    "x := 1; y := x * (x + 1); z := y div 2; w := y mod 3",
    "{ x := 1; y := 2 } [1/3] { while (x < 4) { x := x + 1 } }",
    "x := 1/2; y := x div (1/2)",
    "while (x < 1 && y = 0 || !(z <= 2)) { x := x + 1 }",
])
def test_round_trip_examples(src):
    p = parse(src)
    assert parse(pretty_print(p)) == p


_names = st.sampled_from(["x", "y", "z", "acc", "n1"])
_small = st.integers(min_value=0, max_value=9)
_rats = st.builds(lambda a, b: Rat(Fraction(a, b)), _small, st.integers(1, 9))
_probs = st.builds(Fraction, st.integers(0, 6), st.just(6))


_arith = st.recursive(
    st.one_of(_rats, st.builds(VarRef, _names)),
    lambda children: st.builds(
        BinOp, st.sampled_from(["+", "-", "*", "/", "div", "mod"]),
        children, children).filter(
            lambda e: not (e.op == "/" and isinstance(e.left, Rat)
                           and isinstance(e.right, Rat))),
    max_leaves=6)

_cmp = st.builds(Cmp, st.sampled_from(["<", "<=", "=", "!="]), _arith, _arith)
_bool = st.recursive(
    _cmp,
    lambda children: st.one_of(
        st.builds(And, children, children),
        st.builds(Or, children, children),
        st.builds(Not, children)),
    max_leaves=4)

_program = st.recursive(
    st.builds(Assign, _names, _arith),
    lambda children: st.one_of(
        st.builds(seq_of, st.lists(children, min_size=2, max_size=3)),
        st.builds(Choice, children, _probs, children),
        st.builds(While, _bool, children)),
    max_leaves=8)


@settings(max_examples=200, deadline=None)
@given(_program)
def test_round_trip_random_programs(program):
    text = pretty_print(program)
    assert parse(text) == program
    # printing is a normal form: a second trip is byte-identical
    assert pretty_print(parse(text)) == text
