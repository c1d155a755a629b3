"""HTTP service exposing the analyzer, plus the shared request/response layer.

All analysis endpoints are POST routes taking program text in the request
body.  Exact quantities travel as "numerator/denominator" strings so no
precision is lost to JSON numbers; only sampler statistics are floats.
The CLI reuses the same handler functions in-process.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Literal

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from . import explorer, reductions, sampler
from .explorer import Budget, BoundReport, Unknown, Witness, Refuted
from .semantics import TOP, initial_state, run
from .syntax import PgclSyntaxError, is_ordinary, parse, pretty_print, vars_of

SCHEMA_VERSION = "1"


class OptionsError(ValueError):
    """Invalid or inconsistent request options."""


def frac_str(value: Fraction) -> str:
    return f"{value.numerator}/{value.denominator}"


def parse_frac(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise OptionsError(f"not a rational: {text!r}") from exc


# ---------- Request/response models ----------

class ReportBase(BaseModel):
    schema_version: str = SCHEMA_VERSION
    command: str


class ParseRequest(BaseModel):
    program: str


class ParseResponse(ReportBase):
    command: str = "parse"
    pretty: str
    ordinary: bool
    variables: list[str]


class RunRequest(BaseModel):
    program: str
    choices: str = ""
    max_steps: int = Field(ge=0)


class RunResponse(ReportBase):
    command: str = "run"
    top: bool
    terminal: bool | None = None
    valuation: dict[str, str] | None = None
    prob: str | None = None
    trace: str | None = None


class BudgetOptions(BaseModel):
    nodes: int | None = None
    y1: int | None = None
    y2: int | None = None

    def resolve(self) -> Budget:
        pair = (self.y1 is not None) and (self.y2 is not None)
        if (self.nodes is not None) == pair:
            raise OptionsError("give either nodes or both y1 and y2")
        if self.nodes is not None:
            if self.nodes < 1:
                raise OptionsError("nodes must be >= 1")
            return Budget(node_budget=self.nodes)
        if self.y1 < 0 or self.y2 < 0:
            raise OptionsError("y1 and y2 must be >= 0")
        return Budget(y1=self.y1, y2=self.y2)


class ExpectRequest(BudgetOptions):
    program: str
    var: str
    workers: int = 1


class TermRequest(BudgetOptions):
    program: str
    certify_divergence: bool = False
    workers: int = 1


class BoundReportResponse(ReportBase):
    terminated_mass: str
    live_mass: str
    divergent_mass: str
    expectation_mass: dict[str, str]
    completed_depth: int | None = None
    nodes_expanded: int | None = None
    y1: int | None = None
    y2: int | None = None


class LexpRequest(BudgetOptions):
    program: str
    var: str
    q: str


class LexpResponse(ReportBase):
    command: str = "lexp"
    witness: dict[str, int] | None
    sum: str


class RefuteUexpRequest(BudgetOptions):
    program: str
    var: str
    q: str
    delta: str


class RefuteUexpResponse(ReportBase):
    command: str = "refute-uexp"
    refuted: bool
    y1: int | None = None
    y2: int | None = None
    sum: str


class SampleRequest(BaseModel):
    program: str
    mode: Literal["expectation", "termination"] = "expectation"
    var: str | None = None
    n: int = Field(default=10000, ge=1)
    seed: int = 0
    fuel: int = Field(default=1000, ge=1)


class SampleResponse(ReportBase):
    command: str = "sample"
    mode: str
    mean: float
    ci_halfwidth: float
    timeout_fraction: float


class ReduceRequest(BaseModel):
    program: str
    kind: Literal["uh2uexp", "ast2exp", "uh2ast"]


class ReduceResponse(ReportBase):
    command: str = "reduce"
    program: str
    var: str | None
    value: str | None
    kind: str
    source_hash: str


# ---------- Handlers (shared by HTTP routes and the CLI) ----------

def handle_parse(req: ParseRequest) -> ParseResponse:
    program = parse(req.program)
    return ParseResponse(pretty=pretty_print(program),
                         ordinary=is_ordinary(program),
                         variables=vars_of(program))


def handle_run(req: RunRequest) -> RunResponse:
    if any(c not in "LR" for c in req.choices):
        raise OptionsError("choices must be a string over L and R")
    program = parse(req.program)
    outcome = run(initial_state(program), req.max_steps, req.choices)
    if outcome is TOP:
        return RunResponse(top=True)
    return RunResponse(
        top=False,
        terminal=outcome.is_terminal(),
        valuation={k: frac_str(v) for k, v in sorted(outcome.env.as_dict().items())},
        prob=frac_str(outcome.prob),
        trace=outcome.trace,
    )


def _bound_report(command: str, report: BoundReport) -> BoundReportResponse:
    return BoundReportResponse(
        command=command,
        terminated_mass=frac_str(report.terminated_mass),
        live_mass=frac_str(report.live_mass),
        divergent_mass=frac_str(report.divergent_mass),
        expectation_mass={k: frac_str(v)
                          for k, v in sorted(report.expectation_mass.items())},
        completed_depth=report.completed_depth,
        nodes_expanded=report.nodes_expanded,
    )


def handle_expect(req: ExpectRequest) -> BoundReportResponse:
    program = parse(req.program)
    budget = req.resolve()
    if budget.node_budget is not None:
        report = explorer.explore(program, budget.node_budget, [req.var],
                                  workers=req.workers)
        return _bound_report("expect", report)
    expectation = explorer.expected_partial(program, req.var, budget.y1, budget.y2)
    terminated = explorer.termination_partial(program, budget.y1, budget.y2)
    return BoundReportResponse(
        command="expect",
        terminated_mass=frac_str(terminated),
        live_mass=frac_str(Fraction(1) - terminated),
        divergent_mass="0/1",
        expectation_mass={req.var: frac_str(expectation)},
        y1=budget.y1, y2=budget.y2,
    )


def handle_term(req: TermRequest) -> BoundReportResponse:
    program = parse(req.program)
    budget = req.resolve()
    if budget.node_budget is not None:
        report = explorer.explore(program, budget.node_budget, [],
                                  certify=req.certify_divergence,
                                  workers=req.workers)
        return _bound_report("term", report)
    terminated = explorer.termination_partial(program, budget.y1, budget.y2)
    return BoundReportResponse(
        command="term",
        terminated_mass=frac_str(terminated),
        live_mass=frac_str(Fraction(1) - terminated),
        divergent_mass="0/1",
        expectation_mass={},
        y1=budget.y1, y2=budget.y2,
    )


def handle_lexp(req: LexpRequest) -> LexpResponse:
    program = parse(req.program)
    q = parse_frac(req.q)
    if q < 0:
        raise OptionsError("q must be nonnegative")
    verdict = explorer.lexp_semidecide(program, req.var, q, req.resolve())
    if isinstance(verdict, Witness):
        return LexpResponse(witness={"y1": verdict.y1, "y2": verdict.y2},
                            sum=frac_str(verdict.partial_sum))
    assert isinstance(verdict, Unknown)
    return LexpResponse(witness=None, sum=frac_str(verdict.best_sum))


def handle_refute_uexp(req: RefuteUexpRequest) -> RefuteUexpResponse:
    program = parse(req.program)
    q = parse_frac(req.q)
    delta = parse_frac(req.delta)
    if delta <= 0:
        raise OptionsError("delta must be > 0")
    verdict = explorer.uexp_refute(program, req.var, q, delta, req.resolve())
    if isinstance(verdict, Refuted):
        return RefuteUexpResponse(refuted=True, y1=verdict.y1, y2=verdict.y2,
                                  sum=frac_str(verdict.partial_sum))
    return RefuteUexpResponse(refuted=False, sum=frac_str(verdict.best_sum))


def handle_sample(req: SampleRequest) -> SampleResponse:
    program = parse(req.program)
    cfg = sampler.SampleConfig(n=req.n, seed=req.seed, fuel=req.fuel)
    if req.mode == "expectation":
        if req.var is None:
            raise OptionsError("expectation sampling needs a variable")
        estimate = sampler.estimate_expectation(program, req.var, cfg)
    else:
        estimate = sampler.estimate_termination(program, cfg)
    return SampleResponse(mode=req.mode, mean=estimate.mean,
                          ci_halfwidth=estimate.ci_halfwidth,
                          timeout_fraction=estimate.timeout_fraction)


_REDUCERS = {
    "ast2exp": reductions.reduce_ast_to_exp,
    "uh2ast": reductions.reduce_uh_to_ast,
    "uh2uexp": reductions.reduce_uh_to_uexp,
}


def handle_reduce(req: ReduceRequest) -> ReduceResponse:
    program = parse(req.program)
    output = _REDUCERS[req.kind](program)
    return ReduceResponse(
        program=pretty_print(output.program),
        var=output.target_var,
        value=frac_str(output.target_value) if output.target_value is not None else None,
        kind=output.kind,
        source_hash=output.source_hash,
    )


# ---------- FastAPI application ----------

def create_app() -> FastAPI:
    app = FastAPI(title="pgclkit", version="0.1.0")

    def guarded(handler, req):
        try:
            return handler(req)
        except PgclSyntaxError as exc:
            raise HTTPException(status_code=422, detail=f"parse error: {exc}")
        except OptionsError as exc:
            raise HTTPException(status_code=422, detail=f"bad options: {exc}")
        except (reductions.NotOrdinary, reductions.ReservedVarClash) as exc:
            raise HTTPException(status_code=422, detail=f"reduction precondition: {exc}")

    @app.post("/parse", response_model=ParseResponse)
    def parse_route(req: ParseRequest):
        return guarded(handle_parse, req)

    @app.post("/run", response_model=RunResponse)
    def run_route(req: RunRequest):
        return guarded(handle_run, req)

    @app.post("/expect", response_model=BoundReportResponse)
    def expect_route(req: ExpectRequest):
        return guarded(handle_expect, req)

    @app.post("/term", response_model=BoundReportResponse)
    def term_route(req: TermRequest):
        return guarded(handle_term, req)

    @app.post("/lexp", response_model=LexpResponse)
    def lexp_route(req: LexpRequest):
        return guarded(handle_lexp, req)

    @app.post("/refute-uexp", response_model=RefuteUexpResponse)
    def refute_route(req: RefuteUexpRequest):
        return guarded(handle_refute_uexp, req)

    @app.post("/sample", response_model=SampleResponse)
    def sample_route(req: SampleRequest):
        return guarded(handle_sample, req)

    @app.post("/reduce", response_model=ReduceResponse)
    def reduce_route(req: ReduceRequest):
        return guarded(handle_reduce, req)

    return app


app = create_app()
