"""Small-step execution of probabilistic programs over exact rationals.

A state holds the remaining control (or the terminal marker), a valuation,
the exact probability of the path taken so far, and the L/R trace of the
probabilistic choices made along that path.  All arithmetic is done with
`fractions.Fraction`; no floats anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .syntax import (
    And, ArithExpr, Assign, BinOp, BoolExpr, Choice, Cmp, Not, Or, Program,
    Rat, Seq, VarRef, While,
)

ZERO = Fraction(0)
ONE = Fraction(1)


class ChoiceHeaded(Exception):
    """step() was given a state whose next statement is a probabilistic choice."""


class NotChoiceHeaded(Exception):
    """step_prob() was given a state whose next statement is not a choice."""


class _Done:
    """Terminal control marker."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "DONE"


DONE = _Done()


class _Top:
    """Invalid-query marker returned by step() and run()."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "TOP"


TOP = _Top()


class Valuation:
    """Immutable map from variable names to nonnegative rationals.

    Absent variables read as 0; entries equal to 0 are never stored, so two
    valuations agreeing on all variables compare equal.
    """

    __slots__ = ("_items",)

    def __init__(self, items: dict[str, Fraction] | None = None):
        clean = {}
        if items:
            for name, value in items.items():
                if value < 0:
                    raise ValueError(f"negative value {value} for {name}")
                if value != 0:
                    clean[name] = value
        self._items = clean

    def get(self, name: str) -> Fraction:
        return self._items.get(name, ZERO)

    def set(self, name: str, value: Fraction) -> "Valuation":
        items = dict(self._items)
        if value == 0:
            items.pop(name, None)
        else:
            items[name] = value
        v = Valuation.__new__(Valuation)
        v._items = items
        return v

    def as_dict(self) -> dict[str, Fraction]:
        return dict(self._items)

    def __eq__(self, other):
        return isinstance(other, Valuation) and self._items == other._items

    def __hash__(self):
        return hash(frozenset(self._items.items()))

    def __repr__(self):
        inner = ", ".join(f"{k}={v}" for k, v in sorted(self._items.items()))
        return f"Valuation({inner})"


EMPTY_VALUATION = Valuation()


@dataclass(frozen=True, slots=True)
class State:
    control: object  # Program or DONE
    env: Valuation
    prob: Fraction
    trace: str  # string over {L, R}

    def is_terminal(self) -> bool:
        return self.control is DONE


def initial_state(program: Program) -> State:
    return State(program, EMPTY_VALUATION, ONE, "")


# ---------- Expression evaluation ----------

def eval_arith(e: ArithExpr, env: Valuation) -> Fraction:
    """Exact value of an arithmetic expression; total (x/0 = x div 0 = x mod 0 = 0)."""
    if isinstance(e, Rat):
        return e.value
    if isinstance(e, VarRef):
        return env.get(e.name)
    left = eval_arith(e.left, env)
    right = eval_arith(e.right, env)
    op = e.op
    if op == "+":
        return left + right
    if op == "-":
        return left - right
    if op == "*":
        return left * right
    if right == 0:
        return ZERO
    if op == "/":
        return left / right
    floor = Fraction(left // right)
    if op == "div":
        return floor
    return left - right * floor  # mod


def eval_bool(b: BoolExpr, env: Valuation) -> bool:
    if isinstance(b, Cmp):
        left = eval_arith(b.left, env)
        right = eval_arith(b.right, env)
        if b.op == "<":
            return left < right
        if b.op == "<=":
            return left <= right
        if b.op == "=":
            return left == right
        return left != right
    if isinstance(b, Not):
        return not eval_bool(b.operand, env)
    if isinstance(b, And):
        return eval_bool(b.left, env) and eval_bool(b.right, env)
    return eval_bool(b.left, env) or eval_bool(b.right, env)


# ---------- Single steps ----------

def is_choice_headed(control) -> bool:
    """True iff the next statement to execute is a probabilistic choice."""
    while isinstance(control, Seq):
        if control.first is DONE:
            return False
        control = control.first
    return isinstance(control, Choice)


def _step_control(control, env: Valuation):
    if isinstance(control, Assign):
        value = max(eval_arith(control.expr, env), ZERO)
        return DONE, env.set(control.var, value)
    if isinstance(control, Seq):
        if control.first is DONE:
            return control.second, env
        inner, env2 = _step_control(control.first, env)
        return Seq(inner, control.second), env2
    if isinstance(control, While):
        if eval_bool(control.cond, env):
            return Seq(control.body, control), env
        return DONE, env
    raise ChoiceHeaded("next statement is a probabilistic choice; use step_prob")


def step(s: State):
    """One non-probabilistic inference step; TOP for terminal states."""
    if s.control is DONE:
        return TOP
    control, env = _step_control(s.control, s.env)
    return State(control, env, s.prob, s.trace)


def _resolve_choice(control, direction: str):
    if isinstance(control, Choice):
        if direction == "L":
            return control.left, control.prob
        return control.right, ONE - control.prob
    if isinstance(control, Seq) and control.first is not DONE:
        inner, factor = _resolve_choice(control.first, direction)
        return Seq(inner, control.second), factor
    raise NotChoiceHeaded(f"next statement is not a probabilistic choice: {control!r}")


def step_prob(s: State, direction: str) -> State:
    """Resolve the head probabilistic choice with L or R.

    A branch taken with probability 0 yields a zero-mass state; callers that
    sum path masses may prune it.
    """
    if direction not in ("L", "R"):
        raise ValueError(f"direction must be 'L' or 'R', got {direction!r}")
    if s.control is DONE:
        raise NotChoiceHeaded("terminal state")
    control, factor = _resolve_choice(s.control, direction)
    return State(control, s.env, s.prob * factor, s.trace + direction)


def run(s: State, k: int, w: str):
    """The state reached after exactly k steps using exactly the choices w.

    Returns TOP whenever no such state exists: the path terminates in fewer
    than k steps, needs more than |w| choices, or consumes fewer than |w|.
    """
    current = s
    remaining = w
    for steps_left in range(k, 0, -1):
        if current.control is DONE:
            return TOP
        if len(remaining) > steps_left:
            return TOP  # each leftover choice costs at least one step
        if is_choice_headed(current.control):
            if not remaining:
                return TOP
            current = step_prob(current, remaining[0])
            remaining = remaining[1:]
        else:
            current = step(current)
    if remaining:
        return TOP
    return current


# ---------- Helper functions over outcomes ----------

def alpha(outcome) -> Fraction:
    """Path probability of a terminal state; 0 for anything else."""
    if isinstance(outcome, State) and outcome.control is DONE:
        return outcome.prob
    return ZERO


def weight(outcome, var: str) -> Fraction:
    """Terminal value of var times the path probability; 0 for anything else."""
    if isinstance(outcome, State) and outcome.control is DONE:
        return outcome.env.get(var) * outcome.prob
    return ZERO


# ---------- Choice-string enumeration ----------

def h(n: int) -> str:
    """n-th L/R string in length-then-lexicographic order (L before R)."""
    if n < 0:
        raise ValueError("n must be a natural number")
    length = (n + 1).bit_length() - 1
    index = n + 1 - (1 << length)
    bits = format(index, f"0{length}b") if length else ""
    return bits.replace("0", "L").replace("1", "R")


def h_inv(w: str) -> int:
    """Inverse of h."""
    index = 0
    for c in w:
        if c == "L":
            index = 2 * index
        elif c == "R":
            index = 2 * index + 1
        else:
            raise ValueError(f"invalid choice character {c!r}")
    return (1 << len(w)) - 1 + index
