"""Seeded Monte-Carlo execution, a statistical cross-check of the exact engine.

Each run draws from its own Philox counter-based substream keyed by
(seed, run index), so runs are independent, reproducible bit-for-bit, and
trivially parallelizable.  Choice thresholds are compared exactly: a draw of
64 random bits k resolves a choice left iff k / 2^64 < p as rationals.

Unfinished runs (fuel exhausted) contribute 0 to the expectation estimate
and count as nontermination, keeping both estimators lower-bound companions
of the exact analyzer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .semantics import DONE, State, initial_state, is_choice_headed, step, step_prob
from .syntax import Program

_SCALE = 1 << 64


@dataclass(frozen=True)
class SampleConfig:
    n: int
    seed: int
    fuel: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.fuel < 1:
            raise ValueError("fuel must be >= 1")


@dataclass(frozen=True)
class Estimate:
    mean: float
    ci_halfwidth: float  # 95%, normal approximation
    timeout_fraction: float


class ChoiceStream:
    """Exact-rational uniform draws from a keyed Philox substream."""

    def __init__(self, seed: int, index: int):
        self._gen = np.random.Generator(
            np.random.Philox(key=[seed & (_SCALE - 1), index]))

    def draw(self) -> Fraction:
        k = int(self._gen.integers(0, _SCALE - 1, dtype=np.uint64, endpoint=True))
        return Fraction(k, _SCALE)


def sample_run(program: Program, stream: ChoiceStream, fuel: int):
    """Execute one randomized run for at most `fuel` steps.

    Returns (terminated, final valuation, steps taken).
    """
    state: State = initial_state(program)
    for steps in range(1, fuel + 1):
        if is_choice_headed(state.control):
            head_prob = _head_choice_prob(state)
            state = step_prob(state, "L" if stream.draw() < head_prob else "R")
        else:
            state = step(state)
        if state.control is DONE:
            return True, state.env, steps
    return False, state.env, fuel


def _head_choice_prob(state: State) -> Fraction:
    control = state.control
    while hasattr(control, "first"):
        control = control.first
    return control.prob


def _summarize(values: list[float], timeouts: int, n: int) -> Estimate:
    mean = sum(values) / n
    variance = sum((v - mean) ** 2 for v in values) / (n - 1) if n > 1 else 0.0
    ci = 1.96 * math.sqrt(variance / n) if n > 1 else 0.0
    return Estimate(mean=mean, ci_halfwidth=ci, timeout_fraction=timeouts / n)


def estimate_expectation(program: Program, var: str, cfg: SampleConfig) -> Estimate:
    """Monte-Carlo estimate of the expected terminal value of var.

    Timed-out runs contribute 0, biasing the estimate downward, which matches
    the exact analyzer's lower-bound character.
    """
    values = []
    timeouts = 0
    for index in range(cfg.n):
        terminated, env, _ = sample_run(program, ChoiceStream(cfg.seed, index), cfg.fuel)
        if terminated:
            values.append(float(env.get(var)))
        else:
            values.append(0.0)
            timeouts += 1
    return _summarize(values, timeouts, cfg.n)


def estimate_termination(program: Program, cfg: SampleConfig) -> Estimate:
    """Fraction of runs that terminate within the fuel limit."""
    values = []
    timeouts = 0
    for index in range(cfg.n):
        terminated, _, _ = sample_run(program, ChoiceStream(cfg.seed, index), cfg.fuel)
        values.append(1.0 if terminated else 0.0)
        if not terminated:
            timeouts += 1
    return _summarize(values, timeouts, cfg.n)
