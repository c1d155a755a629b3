"""Hardness-reduction program generators and the encodings they rely on.

Three generators emit object-language programs: wrapping a probabilistic
program so its expectation equals its termination probability, and two
constructions that feed geometrically distributed naturals through an
in-language input decoder into an ordinary program (optionally instrumented
to test for an exact step count).

Inputs are encoded as naturals via iterated Cantor pairing, one component
per program variable, each component mapped to a nonnegative rational
through the Calkin-Wilf enumeration (with 0 prepended).
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from fractions import Fraction

from .semantics import Valuation
from .syntax import (
    And, Assign, BinOp, Choice, Cmp, FreshNames, Program, Rat, Seq, VarRef,
    While, is_ordinary, make_if, make_skip, pretty_print, seq_of, vars_of,
)


class NotOrdinary(ValueError):
    """The construction requires a choice-free input program."""


class ReservedVarClash(ValueError):
    """The input program uses variable names reserved for generated code."""


COUNTER_VAR = "__cnt"
ABORT_VAR = "__abort"
FLAG_VAR = "__flag"


@dataclass(frozen=True)
class InputCodec:
    """Variable order and scheme id for the natural <-> valuation bijection."""

    variables: tuple[str, ...]
    scheme: str = "cantor-calkin-wilf-v1"


@dataclass(frozen=True)
class ReductionOutput:
    program: Program
    target_var: str | None
    target_value: Fraction | None
    kind: str  # uh_to_uexp | ast_to_exp | uh_to_ast
    source_hash: str


def codec_for(program: Program) -> InputCodec:
    return InputCodec(tuple(vars_of(program)))


def _source_hash(program: Program) -> str:
    return hashlib.sha256(pretty_print(program).encode()).hexdigest()


# ---------- Pairing and rational enumeration ----------

def cantor_pair(a: int, b: int) -> int:
    return (a + b) * (a + b + 1) // 2 + b


def cantor_unpair(n: int) -> tuple[int, int]:
    if n < 0:
        raise ValueError("n must be a natural number")
    w = (math.isqrt(8 * n + 1) - 1) // 2
    b = n - w * (w + 1) // 2
    return w - b, b


def nat_to_rat(n: int) -> Fraction:
    """Bijection from naturals onto the nonnegative rationals.

    0 maps to 0; n >= 1 maps to the (n-1)-th entry of the Calkin-Wilf
    sequence 1, 1/2, 2, 1/3, 3/2, ...
    """
    if n < 0:
        raise ValueError("n must be a natural number")
    if n == 0:
        return Fraction(0)
    a, b = 1, 1
    for bit in bin(n)[3:]:  # path from the tree root, skipping the leading 1
        if bit == "0":
            b = a + b
        else:
            a = a + b
    return Fraction(a, b)


def rat_to_nat(q: Fraction) -> int:
    if q < 0:
        raise ValueError("q must be nonnegative")
    if q == 0:
        return 0
    a, b = q.numerator, q.denominator
    bits = []
    while a != b:
        if a < b:
            bits.append("0")
            b = b - a
        else:
            bits.append("1")
            a = a - b
    return int("1" + "".join(reversed(bits)), 2)


def g_decode(codec: InputCodec, i: int) -> Valuation:
    """Valuation number i, supported only on the codec's variables."""
    if i < 0:
        raise ValueError("i must be a natural number")
    if not codec.variables:
        return Valuation()
    components = []
    rest = i
    for _ in codec.variables[:-1]:
        first, rest = cantor_unpair(rest)
        components.append(first)
    components.append(rest)
    return Valuation({
        var: nat_to_rat(n) for var, n in zip(codec.variables, components)})


def g_encode(codec: InputCodec, valuation: Valuation) -> int:
    support = set(valuation.as_dict())
    extra = support - set(codec.variables)
    if extra:
        raise ValueError(f"valuation supported outside codec variables: {sorted(extra)}")
    if not codec.variables:
        return 0
    components = [rat_to_nat(valuation.get(v)) for v in codec.variables]
    rest = components[-1]
    for first in reversed(components[:-1]):
        rest = cantor_pair(first, rest)
    return rest


# ---------- In-language decoder generation ----------

def _lit(n) -> Rat:
    return Rat(Fraction(n))


def _unpair_stmts(rem: str, first: str, names: FreshNames) -> list[Program]:
    """Statements computing (first, rem) := cantor_unpair(rem)."""
    w = names.fresh("w")
    t = names.fresh("t")
    w_ref, t_ref, rem_ref = VarRef(w), VarRef(t), VarRef(rem)
    tri_next = BinOp("/", BinOp("*", BinOp("+", w_ref, _lit(1)),
                                BinOp("+", w_ref, _lit(2))), _lit(2))
    tri = BinOp("/", BinOp("*", w_ref, BinOp("+", w_ref, _lit(1))), _lit(2))
    return [
        Assign(w, _lit(0)),
        While(Cmp("<=", tri_next, rem_ref), Assign(w, BinOp("+", w_ref, _lit(1)))),
        Assign(t, BinOp("-", rem_ref, tri)),
        Assign(first, BinOp("-", w_ref, t_ref)),
        Assign(rem, t_ref),
    ]


def _nat_to_rat_stmts(n: str, target: str, names: FreshNames) -> list[Program]:
    """Statements computing target := nat_to_rat(n); n is left untouched."""
    k = names.fresh("k")
    t_ref, k_ref = VarRef(target), VarRef(k)
    # Calkin-Wilf successor: q |-> 1 / (2*floor(q) - q + 1)
    successor = BinOp("/", _lit(1),
                      BinOp("+", BinOp("-", BinOp("*", _lit(2), BinOp("div", t_ref, _lit(1))),
                                       t_ref), _lit(1)))
    walk = seq_of([
        Assign(target, _lit(1)),
        Assign(k, BinOp("-", VarRef(n), _lit(1))),
        While(Cmp("!=", k_ref, _lit(0)),
              Seq(Assign(target, successor), Assign(k, BinOp("-", k_ref, _lit(1))))),
    ])
    return [make_if(Cmp("=", VarRef(n), _lit(0)), Assign(target, _lit(0)), walk, names)]


def gen_decoder_program(codec: InputCodec, i_var: str, names: FreshNames | None = None) -> Program:
    """Ordinary program mapping a natural in i_var to g_decode(codec, i).

    Started with all codec variables 0, it terminates with them holding the
    decoded valuation; i_var is preserved.
    """
    if i_var in codec.variables:
        raise ValueError(f"index variable {i_var!r} collides with codec variables")
    if not codec.variables:
        return make_skip()
    names = names or FreshNames()
    rem = names.fresh("rem")
    stmts: list[Program] = [Assign(rem, VarRef(i_var))]
    for var in codec.variables[:-1]:
        component = names.fresh("n")
        stmts.extend(_unpair_stmts(rem, component, names))
        stmts.extend(_nat_to_rat_stmts(component, var, names))
    stmts.extend(_nat_to_rat_stmts(rem, codec.variables[-1], names))
    return seq_of(stmts)


# ---------- Exact-step-count instrumentation ----------

def _check_input_vars(q: Program, forbidden: set[str]) -> None:
    for name in vars_of(q):
        if name.startswith("__") or name in forbidden:
            raise ReservedVarClash(f"input program uses reserved variable {name!r}")


def _instrument(p: Program, s_var: str, names: FreshNames) -> Program:
    if isinstance(p, Assign):
        bump = Assign(COUNTER_VAR, BinOp("+", VarRef(COUNTER_VAR), _lit(1)))
        over = make_if(Cmp("<", VarRef(s_var), VarRef(COUNTER_VAR)),
                       Assign(ABORT_VAR, _lit(1)), make_skip(), names)
        return seq_of([bump, over, p])
    if isinstance(p, Seq):
        return seq_of([_instrument(p.first, s_var, names),
                       _instrument(p.second, s_var, names)])
    if isinstance(p, While):
        # a completed iteration that bumps nothing leaves the valuation
        # unchanged and would spin forever; abort on that stasis so the
        # instrumented program terminates for every s
        mark = names.fresh("m")
        body = seq_of([
            Assign(mark, VarRef(COUNTER_VAR)),
            _instrument(p.body, s_var, names),
            make_if(Cmp("=", VarRef(COUNTER_VAR), VarRef(mark)),
                    Assign(ABORT_VAR, _lit(1)), make_skip(), names),
        ])
        return While(And(p.cond, Cmp("=", VarRef(ABORT_VAR), _lit(0))), body)
    raise NotOrdinary("input program contains a probabilistic choice")


def instrument_exact_steps(q: Program, s_var: str) -> Program:
    """Always-terminating variant of an ordinary q testing its exact cost.

    Started with s_var holding a natural s and q's inputs set, it finishes
    with __flag = 1 iff q halts on those inputs executing exactly s original
    assignments, else __flag = 0.
    """
    if not is_ordinary(q):
        raise NotOrdinary("input program contains a probabilistic choice")
    _check_input_vars(q, {s_var})
    names = FreshNames()
    hit = And(Cmp("=", VarRef(ABORT_VAR), _lit(0)),
              Cmp("=", VarRef(COUNTER_VAR), VarRef(s_var)))
    return seq_of([
        _instrument(q, s_var, names),
        Assign(FLAG_VAR, _lit(0)),
        make_if(hit, Assign(FLAG_VAR, _lit(1)), make_skip(), names),
    ])


# ---------- The three reductions ----------

def _fresh_target(q: Program) -> str:
    used = set(vars_of(q))
    if "v" not in used:
        return "v"
    k = 0
    while f"v{k}" in used:
        k += 1
    return f"v{k}"


def _geometric_stmts(counter: str, coin: str) -> list[Program]:
    """The coin-flip loop putting P(counter = k) = 2^-(k+1)."""
    flip = Choice(Assign(coin, _lit(0)), Fraction(1, 2), Assign(coin, _lit(1)))
    return [
        Assign(counter, _lit(0)),
        flip,
        While(Cmp("!=", VarRef(coin), _lit(0)),
              Seq(Assign(counter, BinOp("+", VarRef(counter), _lit(1))), flip)),
    ]


def reduce_ast_to_exp(q: Program) -> ReductionOutput:
    """Wrap q so the target's expectation equals q's termination probability."""
    v = _fresh_target(q)
    program = seq_of([Assign(v, _lit(0)), q, Assign(v, _lit(1))])
    return ReductionOutput(program, v, Fraction(1), "ast_to_exp", _source_hash(q))


def reduce_uh_to_ast(q: Program) -> ReductionOutput:
    """Program terminating almost-surely iff ordinary q halts on every input."""
    if not is_ordinary(q):
        raise NotOrdinary("input program contains a probabilistic choice")
    _check_input_vars(q, set())
    names = FreshNames()
    i_var = names.fresh("i")
    coin = names.fresh("c")
    decoder = gen_decoder_program(codec_for(q), i_var, names)
    program = seq_of(_geometric_stmts(i_var, coin) + [decoder, q])
    return ReductionOutput(program, None, None, "uh_to_ast", _source_hash(q))


def reduce_uh_to_uexp(q: Program) -> ReductionOutput:
    """Program whose target expectation is 1 iff ordinary q halts everywhere.

    Two geometric generators pick an input number i and a step count s; the
    decoded input feeds the instrumented q, and the 2^(s+1) payout exactly
    cancels the probability of guessing the unique halting step count.
    """
    if not is_ordinary(q):
        raise NotOrdinary("input program contains a probabilistic choice")
    _check_input_vars(q, set())
    names = FreshNames()
    i_var = names.fresh("i")
    coin_i = names.fresh("c")
    s_var = names.fresh("s")
    coin_s = names.fresh("c")
    power = names.fresh("pow")
    countdown = names.fresh("pc")
    v = _fresh_target(q)
    decoder = gen_decoder_program(codec_for(q), i_var, names)
    instrumented = instrument_exact_steps(q, s_var)
    payout = [
        Assign(power, _lit(2)),
        Assign(countdown, VarRef(s_var)),
        While(Cmp("!=", VarRef(countdown), _lit(0)),
              Seq(Assign(power, BinOp("*", VarRef(power), _lit(2))),
                  Assign(countdown, BinOp("-", VarRef(countdown), _lit(1))))),
        Assign(v, BinOp("*", VarRef(FLAG_VAR), VarRef(power))),
    ]
    program = seq_of(
        _geometric_stmts(i_var, coin_i) + _geometric_stmts(s_var, coin_s)
        + [decoder, instrumented] + payout)
    return ReductionOutput(program, v, Fraction(1), "uh_to_uexp", _source_hash(q))
