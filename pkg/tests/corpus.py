"""Shared example programs, random generators, and independent oracles."""

from __future__ import annotations

import random
from fractions import Fraction

from pgclkit.semantics import DONE, State, Valuation, is_choice_headed, step, step_prob
from pgclkit.syntax import (
    Assign, BinOp, Choice, Cmp, Program, Rat, Seq, VarRef, While, parse,
)

FAIR_SRC = "{x := 1} [1/2] {x := 0}"
GEO_SRC = ("i := 0; {c := 0} [1/2] {c := 1}; "
           "while (c != 0) { i := i + 1; {c := 0} [1/2] {c := 1} }")
DIVERGE_SRC = "while (x = 0) { x := x }"
CLAMP_SRC = "x := 5 - 6"

FAIR = parse(FAIR_SRC)
GEO = parse(GEO_SRC)
DIVERGE = parse(DIVERGE_SRC)
CLAMP = parse(CLAMP_SRC)

# (name, source, matched exploration depth) pairs for the exact-equivalence
# suite; depths are chosen so the double-sum oracle stays affordable
EQUIVALENCE_CORPUS = [
    ("fair", FAIR_SRC, 6),
    ("geo", GEO_SRC, 10),
    ("diverge", DIVERGE_SRC, 8),
    ("clamp", CLAMP_SRC, 4),
    ("assign-chain", "x := 1; y := x + 1; z := y * y", 8),
    ("biased", "{x := 2} [1/3] {x := 5}", 6),
    ("skewed", "{x := 1} [1] {x := 0}", 6),
    ("nested-choice", "{ {x := 1} [1/2] {x := 2} } [1/4] { x := 3 }", 7),
    ("choice-then-loop",
     "{c := 0} [2/3] {c := 1}; while (c != 0) { c := c - 1 }", 9),
    ("countdown", "x := 3; while (x != 0) { x := x - 1 }", 12),
    ("if-sugar", "x := 1; if (x < 2) { y := 7 } else { y := 9 }", 12),
    ("rational-walk",
     "x := 1/2; {x := x * 1/2} [1/2] {x := x + 1}", 8),
    ("double-flip", "{a := 1} [1/2] {a := 0}; {b := 1} [1/2] {b := 0}", 8),
    ("mod-loop", "x := 7; while (1 <= x) { x := x - 2 }; y := x mod 2", 12),
]


def deterministic_run(program: Program, env: Valuation,
                      max_steps: int = 10 ** 6) -> tuple[Valuation, int]:
    """Run an ordinary program to termination; (final valuation, steps)."""
    state = State(program, env, Fraction(1), "")
    for steps in range(max_steps):
        if state.control is DONE:
            return state.env, steps
        state = step(state)
    raise RuntimeError("step budget exhausted")


def _head_is_assign(control) -> bool:
    while isinstance(control, Seq):
        if control.first is DONE:
            return False
        control = control.first
    return isinstance(control, Assign)


def assign_cost(program: Program, env: Valuation,
                max_steps: int = 10 ** 6) -> int | None:
    """Host-level cost oracle: executed assignments until termination.

    None if the program does not halt within max_steps.
    """
    state = State(program, env, Fraction(1), "")
    cost = 0
    for _ in range(max_steps):
        if state.control is DONE:
            return cost
        if _head_is_assign(state.control):
            cost += 1
        state = step(state)
    return None


def replay(program: Program, steps: int, choices: str):
    """Drive the semantics by hand: step_prob at choices, step otherwise.

    Returns the state after `steps` inferences or None if the path ends
    early or needs more choices than provided.
    """
    from pgclkit.semantics import initial_state

    state = initial_state(program)
    remaining = choices
    for _ in range(steps):
        if state.control is DONE:
            return None
        if is_choice_headed(state.control):
            if not remaining:
                return None
            state = step_prob(state, remaining[0])
            remaining = remaining[1:]
        else:
            state = step(state)
    if remaining:
        return None
    return state


# ---------- Random program generation ----------

_VARS = ["x", "y", "z"]
_PROBS = [Fraction(0), Fraction(1, 4), Fraction(1, 3), Fraction(1, 2),
          Fraction(2, 3), Fraction(1)]


def _random_expr(rng: random.Random, depth: int):
    if depth <= 0 or rng.random() < 0.4:
        if rng.random() < 0.5:
            return Rat(Fraction(rng.randrange(4)))
        return VarRef(rng.choice(_VARS))
    op = rng.choice(["+", "-", "*", "div", "mod"])
    return BinOp(op, _random_expr(rng, depth - 1), _random_expr(rng, depth - 1))


def _random_cond(rng: random.Random):
    op = rng.choice(["<", "<=", "=", "!="])
    return Cmp(op, _random_expr(rng, 1), _random_expr(rng, 1))


def random_program(rng: random.Random, size: int) -> Program:
    """Random core-language program with at most `size` statement nodes."""
    if size <= 1:
        return Assign(rng.choice(_VARS), _random_expr(rng, 2))
    kind = rng.random()
    if kind < 0.35:
        left_size = rng.randrange(1, size)
        return Seq(random_program(rng, left_size),
                   random_program(rng, size - left_size))
    if kind < 0.6:
        half = max(1, size // 2)
        return Choice(random_program(rng, half), rng.choice(_PROBS),
                      random_program(rng, size - half))
    if kind < 0.8:
        # loops count down a fresh-ish variable so they usually terminate
        var = rng.choice(_VARS)
        body = Seq(Assign(var, BinOp("-", VarRef(var), Rat(Fraction(1)))),
                   random_program(rng, size - 1))
        return Seq(Assign(var, Rat(Fraction(rng.randrange(3)))),
                   While(Cmp("<=", Rat(Fraction(1)), VarRef(var)), body))
    return While(_random_cond(rng), random_program(rng, size - 1))
