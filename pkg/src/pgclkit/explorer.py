"""Exact anytime analysis: truncated enumeration sums and frontier exploration.

Two interchangeable engines compute lower bounds on expected outcomes and
termination probability:

* `expected_partial` / `termination_partial` evaluate the defining double
  sum over choice-string indices i <= y1 and step counts j <= y2 literally,
  replaying each path prefix.  They are the reference oracle.
* `explore` unfolds the step relation breadth-first, visiting each state
  once, and reports the same masses far more efficiently.  A fully explored
  depth D corresponds to the double sum at (y1, y2) = coverage_budget(D).

All masses are exact rationals, so results are independent of summation
order and safe to compare for equality.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

from .semantics import (
    ONE, ZERO, DONE, State, alpha, h, initial_state, is_choice_headed, run,
    step, step_prob, weight,
)
from .syntax import Program


class DeltaNonPositive(ValueError):
    """uexp_refute() requires a strictly positive slack."""


@dataclass(frozen=True)
class Budget:
    """Either a (y1, y2) truncation of the double sum or a node budget."""

    y1: int | None = None
    y2: int | None = None
    node_budget: int | None = None

    def __post_init__(self):
        if self.node_budget is None and (self.y1 is None or self.y2 is None):
            raise ValueError("need either (y1, y2) or node_budget")


def coverage_budget(completed_depth: int) -> tuple[int, int]:
    """(y1, y2) such that the double sum covers every path of length <= depth."""
    return (1 << (completed_depth + 1)) - 2, completed_depth


@dataclass(frozen=True)
class BoundReport:
    terminated_mass: Fraction
    live_mass: Fraction
    divergent_mass: Fraction
    expectation_mass: dict[str, Fraction]
    budget_used: Budget
    completed_depth: int
    nodes_expanded: int


@dataclass(frozen=True)
class Witness:
    y1: int
    y2: int
    partial_sum: Fraction


@dataclass(frozen=True)
class Unknown:
    budget_exhausted: Budget
    best_sum: Fraction


@dataclass(frozen=True)
class Refuted:
    y1: int
    y2: int
    partial_sum: Fraction


@dataclass(frozen=True)
class NotRefuted:
    best_sum: Fraction


# ---------- Literal double sums ----------

def _double_sum(program: Program, y1: int, y2: int, term) -> Fraction:
    start = initial_state(program)
    total = ZERO
    for i in range(y1 + 1):
        w = h(i)
        if len(w) > y2:
            continue  # consuming w takes at least |w| steps, always TOP here
        for j in range(y2 + 1):
            total += term(run(start, j, w))
    return total


def expected_partial(program: Program, var: str, y1: int, y2: int) -> Fraction:
    """Truncated expected-outcome sum; monotone nondecreasing in y1 and y2."""
    return _double_sum(program, y1, y2, lambda outcome: weight(outcome, var))


def termination_partial(program: Program, y1: int, y2: int) -> Fraction:
    """Truncated termination-probability sum; always <= 1."""
    return _double_sum(program, y1, y2, alpha)


# ---------- Divergence certificates ----------

def certify_divergence(s: State, max_steps: int = 1000) -> bool:
    """Sound, incomplete nontermination check for choice-free continuations.

    True only if the deterministic continuation from s revisits an identical
    (control, valuation) pair, which proves an infinite loop.
    """
    seen = set()
    current = s
    for _ in range(max_steps):
        if current.control is DONE or is_choice_headed(current.control):
            return False
        key = (current.control, current.env)
        if key in seen:
            return True
        seen.add(key)
        current = step(current)
    return False


# ---------- Frontier exploration ----------

def _expand_chunk(chunk: list[State], variables: list[str]):
    next_states = []
    terminated = ZERO
    expectation = {v: ZERO for v in variables}
    for state in chunk:
        if is_choice_headed(state.control):
            children = [step_prob(state, "L"), step_prob(state, "R")]
            children = [c for c in children if c.prob > 0]
        else:
            children = [step(state)]
        for child in children:
            if child.control is DONE:
                terminated += child.prob
                for v in variables:
                    expectation[v] += child.env.get(v) * child.prob
            else:
                next_states.append(child)
    return next_states, terminated, expectation


@dataclass
class _Exploration:
    """Incremental breadth-first unfolding with exact mass accounting."""

    program: Program
    variables: list[str]
    workers: int = 1
    frontier: list[State] = field(init=False)
    depth: int = field(default=0, init=False)
    terminated: Fraction = field(default=ZERO, init=False)
    expectation: dict[str, Fraction] = field(init=False)
    expanded: int = field(default=0, init=False)

    def __post_init__(self):
        self.frontier = [initial_state(self.program)]
        self.expectation = {v: ZERO for v in self.variables}

    def _merge(self, results):
        for next_states, terminated, expectation in results:
            self.terminated += terminated
            for v, mass in expectation.items():
                self.expectation[v] += mass
            yield from next_states

    def expand(self, states: list[State]) -> list[State]:
        if self.workers > 1 and len(states) > self.workers:
            size = -(-len(states) // self.workers)
            chunks = [states[k:k + size] for k in range(0, len(states), size)]
            with ThreadPoolExecutor(max_workers=self.workers) as pool:
                results = list(pool.map(
                    lambda c: _expand_chunk(c, self.variables), chunks))
        else:
            results = [_expand_chunk(states, self.variables)]
        self.expanded += len(states)
        return list(self._merge(results))

    def run_level(self) -> None:
        self.frontier = self.expand(self.frontier)
        self.depth += 1


def explore(program: Program, node_budget: int, variables: list[str], *,
            max_depth: int | None = None, certify: bool = False,
            certify_steps: int = 500, workers: int = 1) -> BoundReport:
    """Breadth-first exploration bounded by a count of expanded states.

    Splits at probabilistic choices (pruning zero-mass branches), absorbs
    terminal children into the terminated and per-variable expectation
    masses, and stops after expanding `node_budget` states or `max_depth`
    levels.  Deterministic for fixed inputs regardless of `workers`.
    """
    if node_budget < 1:
        raise ValueError("node_budget must be >= 1")
    ex = _Exploration(program, list(variables), workers=workers)
    while ex.frontier and (max_depth is None or ex.depth < max_depth):
        room = node_budget - ex.expanded
        if room <= 0:
            break
        if len(ex.frontier) <= room:
            ex.run_level()
        else:
            # budget ends mid-level: expand a deterministic prefix and stop
            rest = ex.frontier[room:]
            ex.frontier = ex.expand(ex.frontier[:room]) + rest
            break

    divergent = ZERO
    live = ZERO
    for state in ex.frontier:
        if certify and certify_divergence(state, max_steps=certify_steps):
            divergent += state.prob
        else:
            live += state.prob
    return BoundReport(
        terminated_mass=ex.terminated,
        live_mass=live,
        divergent_mass=divergent,
        expectation_mass=dict(ex.expectation),
        budget_used=Budget(node_budget=node_budget),
        completed_depth=ex.depth,
        nodes_expanded=ex.expanded,
    )


# ---------- Semi-decision and refutation ----------

def _best_partial(program: Program, var: str, budget: Budget):
    """Largest lower bound on the expectation reachable within the budget.

    Yields (y1, y2, partial_sum) checkpoints with nondecreasing sums.
    """
    if budget.node_budget is not None:
        ex = _Exploration(program, [var])
        while ex.frontier and ex.expanded + len(ex.frontier) <= budget.node_budget:
            ex.run_level()
            y1, y2 = coverage_budget(ex.depth)
            yield y1, y2, ex.expectation[var]
    else:
        yield budget.y1, budget.y2, expected_partial(program, var, budget.y1, budget.y2)


def lexp_semidecide(program: Program, var: str, q: Fraction, budget: Budget):
    """Search for a truncation witnessing q < E(var); sound, never complete.

    Returns Witness(y1, y2, partial_sum) with partial_sum > q, or
    Unknown(budget, best_sum) when the budget runs out first.
    """
    if q < 0:
        raise ValueError("q must be nonnegative")
    best = ZERO
    for y1, y2, partial in _best_partial(program, var, budget):
        best = partial
        if partial > q:
            return Witness(y1, y2, partial)
    return Unknown(budget, best)


def uexp_refute(program: Program, var: str, q: Fraction, delta: Fraction,
                budget: Budget):
    """Check the candidate certificate "every truncation stays below q - delta".

    Refuted(y1, y2, s) reports a truncation with s >= q - delta, killing the
    candidate; NotRefuted means it survived this budget (no guarantee beyond).
    """
    if delta <= 0:
        raise DeltaNonPositive(f"delta must be > 0, got {delta}")
    best = ZERO
    for y1, y2, partial in _best_partial(program, var, budget):
        best = partial
        if partial >= q - delta:
            return Refuted(y1, y2, partial)
    return NotRefuted(best)
