"""Command-line front end; a thin client over the service layer.

By default requests are handled in-process; with --server URL they are sent
to a running pgclkit HTTP service instead.  Exit codes: 0 success, 2 parse
error, 3 bad options, 4 reduction precondition violation, 5 top result.
"""

from __future__ import annotations

import decimal
import json
import sys
from pathlib import Path

import click

from . import service
from .reductions import NotOrdinary, ReservedVarClash
from .service import OptionsError
from .syntax import PgclSyntaxError

EXIT_PARSE = 2
EXIT_OPTIONS = 3
EXIT_PRECONDITION = 4
EXIT_TOP = 5

_ROUTES = {
    "parse": (service.ParseRequest, service.handle_parse),
    "run": (service.RunRequest, service.handle_run),
    "expect": (service.ExpectRequest, service.handle_expect),
    "term": (service.TermRequest, service.handle_term),
    "lexp": (service.LexpRequest, service.handle_lexp),
    "refute-uexp": (service.RefuteUexpRequest, service.handle_refute_uexp),
    "sample": (service.SampleRequest, service.handle_sample),
    "reduce": (service.ReduceRequest, service.handle_reduce),
}


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _call(route: str, payload: dict, server: str | None) -> dict:
    """Dispatch a request in-process or to a remote service."""
    if server is None:
        model, handler = _ROUTES[route]
        try:
            return handler(model(**payload)).model_dump()
        except PgclSyntaxError as exc:
            _fail(EXIT_PARSE, f"parse error: {exc}")
        except OptionsError as exc:
            _fail(EXIT_OPTIONS, f"bad options: {exc}")
        except (NotOrdinary, ReservedVarClash) as exc:
            _fail(EXIT_PRECONDITION, f"reduction precondition: {exc}")
    import httpx

    response = httpx.post(f"{server.rstrip('/')}/{route}", json=payload)
    if response.status_code == 422:
        detail = response.json().get("detail", "")
        if detail.startswith("parse error"):
            _fail(EXIT_PARSE, detail)
        if detail.startswith("reduction precondition"):
            _fail(EXIT_PRECONDITION, detail)
        _fail(EXIT_OPTIONS, detail)
    response.raise_for_status()
    return response.json()


def _approx(frac: str) -> str:
    num, den = frac.split("/")
    with decimal.localcontext() as ctx:
        ctx.prec = 20
        return str(decimal.Decimal(num) / decimal.Decimal(den))


def _emit(report: dict, as_json: bool) -> None:
    if as_json:
        click.echo(json.dumps(report, indent=2, sort_keys=True))
        return
    for key, value in report.items():
        if key == "schema_version":
            continue
        if isinstance(value, str) and "/" in value and value.replace("/", "").lstrip("-").isdigit():
            click.echo(f"{key}: {value} (approx. {_approx(value)})")
        elif isinstance(value, dict):
            for sub, subval in value.items():
                if isinstance(subval, str) and "/" in subval:
                    click.echo(f"{key}[{sub}]: {subval} (approx. {_approx(subval)})")
                else:
                    click.echo(f"{key}[{sub}]: {subval}")
        else:
            click.echo(f"{key}: {value}")


def _read_program(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        _fail(EXIT_OPTIONS, f"cannot read {path}: {exc}")


budget_options = [
    click.option("--nodes", type=int, default=None, help="frontier node budget"),
    click.option("--y1", type=int, default=None, help="choice-string index bound"),
    click.option("--y2", type=int, default=None, help="step bound"),
]


def add_options(options):
    def wrap(f):
        for option in reversed(options):
            f = option(f)
        return f
    return wrap


@click.group()
@click.option("--server", default=None, metavar="URL",
              help="send requests to a running pgclkit service")
@click.option("--json", "as_json", is_flag=True, help="machine-readable output")
@click.pass_context
def cli(ctx, server, as_json):
    """Exact analyzer for probabilistic guarded-command programs."""
    ctx.obj = {"server": server, "json": as_json}


@cli.command("parse")
@click.argument("file")
@click.pass_context
def cmd_parse(ctx, file):
    """Parse a .pgcl file and echo its canonical form."""
    report = _call("parse", {"program": _read_program(file)}, ctx.obj["server"])
    _emit(report, ctx.obj["json"])


@cli.command("run")
@click.argument("file")
@click.option("--choices", default="", help="L/R string resolving probabilistic choices")
@click.option("--max-steps", type=int, required=False, default=None)
@click.pass_context
def cmd_run(ctx, file, choices, max_steps):
    """Run for exactly --max-steps steps using the given choices."""
    if max_steps is None or max_steps < 0:
        _fail(EXIT_OPTIONS, "--max-steps must be a nonnegative integer")
    report = _call("run", {"program": _read_program(file), "choices": choices,
                           "max_steps": max_steps}, ctx.obj["server"])
    _emit(report, ctx.obj["json"])
    if report["top"]:
        sys.exit(EXIT_TOP)


@cli.command("expect")
@click.argument("file")
@click.option("--var", required=False, default=None)
@add_options(budget_options)
@click.option("--workers", type=int, default=1)
@click.pass_context
def cmd_expect(ctx, file, var, nodes, y1, y2, workers):
    """Exact lower bound on the expected outcome of --var."""
    if var is None:
        _fail(EXIT_OPTIONS, "--var is required")
    report = _call("expect", {"program": _read_program(file), "var": var,
                              "nodes": nodes, "y1": y1, "y2": y2,
                              "workers": workers}, ctx.obj["server"])
    _emit(report, ctx.obj["json"])


@cli.command("term")
@click.argument("file")
@add_options(budget_options)
@click.option("--certify-divergence", is_flag=True)
@click.option("--workers", type=int, default=1)
@click.pass_context
def cmd_term(ctx, file, nodes, y1, y2, certify_divergence, workers):
    """Exact bounds on the termination probability."""
    report = _call("term", {"program": _read_program(file), "nodes": nodes,
                            "y1": y1, "y2": y2, "workers": workers,
                            "certify_divergence": certify_divergence},
                   ctx.obj["server"])
    _emit(report, ctx.obj["json"])


@cli.command("lexp")
@click.argument("file")
@click.option("--var", required=False, default=None)
@click.option("--q", required=False, default=None, help="rational threshold")
@add_options(budget_options)
@click.pass_context
def cmd_lexp(ctx, file, var, q, nodes, y1, y2):
    """Search for a witness that q is a strict lower bound on E(var)."""
    if var is None or q is None:
        _fail(EXIT_OPTIONS, "--var and --q are required")
    report = _call("lexp", {"program": _read_program(file), "var": var, "q": q,
                            "nodes": nodes, "y1": y1, "y2": y2}, ctx.obj["server"])
    _emit(report, ctx.obj["json"])


@cli.command("refute-uexp")
@click.argument("file")
@click.option("--var", required=False, default=None)
@click.option("--q", required=False, default=None)
@click.option("--delta", required=False, default=None)
@add_options(budget_options)
@click.pass_context
def cmd_refute_uexp(ctx, file, var, q, delta, nodes, y1, y2):
    """Try to refute the candidate certificate for q > E(var) with slack delta."""
    if var is None or q is None or delta is None:
        _fail(EXIT_OPTIONS, "--var, --q and --delta are required")
    report = _call("refute-uexp",
                   {"program": _read_program(file), "var": var, "q": q,
                    "delta": delta, "nodes": nodes, "y1": y1, "y2": y2},
                   ctx.obj["server"])
    _emit(report, ctx.obj["json"])


@cli.command("sample")
@click.argument("file")
@click.option("--var", default=None)
@click.option("--mode", type=click.Choice(["expectation", "termination"]),
              default="expectation")
@click.option("-n", "--runs", "n", type=int, default=10000)
@click.option("--seed", type=int, default=0)
@click.option("--fuel", type=int, default=1000)
@click.pass_context
def cmd_sample(ctx, file, var, mode, n, seed, fuel):
    """Seeded Monte-Carlo estimate (statistical, not exact)."""
    if n < 1 or fuel < 1:
        _fail(EXIT_OPTIONS, "-n and --fuel must be >= 1")
    report = _call("sample", {"program": _read_program(file), "var": var,
                              "mode": mode, "n": n, "seed": seed, "fuel": fuel},
                   ctx.obj["server"])
    _emit(report, ctx.obj["json"])


@cli.command("reduce")
@click.argument("file")
@click.option("--kind", type=click.Choice(["uh2uexp", "ast2exp", "uh2ast"]),
              required=False, default=None)
@click.option("--out", default=None, help="path for the generated .pgcl file")
@click.pass_context
def cmd_reduce(ctx, file, kind, out):
    """Generate a hardness-reduction program plus a JSON sidecar."""
    if kind is None:
        _fail(EXIT_OPTIONS, "--kind is required")
    report = _call("reduce", {"program": _read_program(file), "kind": kind},
                   ctx.obj["server"])
    if out is not None:
        Path(out).write_text(report["program"] + "\n", encoding="utf-8")
        sidecar = {k: report[k] for k in
                   ("schema_version", "command", "var", "value", "kind", "source_hash")}
        Path(out + ".json").write_text(json.dumps(sidecar, indent=2) + "\n",
                                       encoding="utf-8")
    _emit(report, ctx.obj["json"])


@cli.command("serve")
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8000)
def cmd_serve(host, port):
    """Run the HTTP service."""
    import uvicorn

    uvicorn.run("pgclkit.service:app", host=host, port=port)


def main():
    try:
        cli.main(standalone_mode=False)
    except click.UsageError as exc:
        exc.show()
        sys.exit(EXIT_OPTIONS)
    except click.ClickException as exc:
        exc.show()
        sys.exit(exc.exit_code)
    except click.exceptions.Abort:
        sys.exit(1)


if __name__ == "__main__":
    main()
