"""Exact analyzer toolkit for a probabilistic guarded-command language."""

from .syntax import (
    Assign, Choice, Program, Seq, While, PgclSyntaxError, ProbabilityRangeError,
    is_ordinary, parse, pretty_print, vars_of,
)
from .semantics import (
    DONE, TOP, State, Valuation, alpha, eval_arith, eval_bool, h, h_inv,
    initial_state, run, step, step_prob, weight,
)
from .explorer import (
    BoundReport, Budget, certify_divergence, expected_partial, explore,
    lexp_semidecide, termination_partial, uexp_refute,
)
from .sampler import Estimate, SampleConfig, estimate_expectation, estimate_termination
from .reductions import (
    InputCodec, ReductionOutput, cantor_pair, cantor_unpair, g_decode, g_encode,
    gen_decoder_program, instrument_exact_steps, nat_to_rat, rat_to_nat,
    reduce_ast_to_exp, reduce_uh_to_ast, reduce_uh_to_uexp,
)

__version__ = "0.1.0"
