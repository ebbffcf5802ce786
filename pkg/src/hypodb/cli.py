"""Command-line front end: build, synth, query, observe, history, reset,
and serve.

The state file stores the freshly built engine plus the committed
conditioning history; loading replays the history, so every command sees
the same current state and `reset` simply clears the history.
"""

from __future__ import annotations

import json
import os
import sys
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import click
from filelock import FileLock

from . import state as state_mod
from .analytics import Observation, observe as run_observe
from .errors import HypoDBError, ProjectError
from .fd import synthesize_3nf, u_ptc
from .ingest import learn_factors
from .modeling import extract_fds
from .pipeline import Engine, build, load_project

DEFAULT_STATE = "hypodb-state.json"
BIND_ENV = "HYPODB_BIND"


def _lock(state_path: str) -> FileLock:
    return FileLock(str(state_path) + ".lock")


def _load_current(state_path: str) -> Tuple[dict, Engine]:
    """Load the state file and replay its history into a current engine."""
    if not Path(state_path).exists():
        raise click.ClickException(f"state file not found: {state_path}")
    data = json.loads(Path(state_path).read_text(encoding="utf-8"))
    engine = state_mod.load_engine(data)
    steps = engine.history
    engine.history = []
    for step in steps:
        run_observe(
            engine,
            Observation(step["attr"], step["dims"], step["y"], step["sigma"]),
            commit=True,
        )
    return data, engine


def _write_state(state_path: str, data: dict) -> None:
    text = json.dumps(data, sort_keys=True, indent=1)
    tmp = Path(state_path).with_suffix(".tmp")
    tmp.write_text(text, encoding="utf-8")
    tmp.replace(state_path)


def _parse_dim_filter(at: Tuple[str, ...]) -> Dict[str, float]:
    dims: Dict[str, float] = {}
    for item in at:
        if "=" not in item:
            raise click.BadParameter(f"expected dim=value, got {item!r}")
        key, _, value = item.partition("=")
        try:
            dims[key.strip()] = float(value)
        except ValueError:
            raise click.BadParameter(f"non-numeric dim value in {item!r}")
    return dims


@click.group()
def main() -> None:
    """Hypothesis-management probabilistic database engine."""


@main.command("build")
@click.argument("manifest", type=click.Path())
@click.option("--state", "state_path", default=DEFAULT_STATE, show_default=True)
@click.option("--factor-tol", default=1e-9, show_default=True,
              help="Tolerance of the factor-independence test.")
def cmd_build(manifest: str, state_path: str, factor_tol: float) -> None:
    """Build the uncertain database from a project manifest."""
    try:
        project = load_project(manifest)
    except ProjectError as exc:
        click.echo(f"manifest error: {exc}", err=True)
        sys.exit(2)
    except HypoDBError as exc:
        click.echo(f"load failed: {exc}", err=True)
        sys.exit(1)
    try:
        engine = build(project, factor_tol=factor_tol)
    except HypoDBError as exc:
        click.echo(f"build failed: {exc}", err=True)
        sys.exit(1)
    with _lock(state_path):
        state_mod.save(engine, state_path, state_mod.manifest_hash(manifest))
    _print_report(engine)
    click.echo(f"state written to {state_path}")


def _print_report(engine: Engine) -> None:
    click.echo(f"project: {engine.project.name}")
    for hyp in engine.project.hypotheses:
        click.echo(f"hypothesis {hyp.upsilon}: {hyp.name}")
        click.echo(f"  FDs: {engine.fdsets[hyp.upsilon]}")
        for scheme in engine.schemes.get(hyp.upsilon, []):
            deps = (
                f" deps={{{', '.join(sorted(scheme.uncertainty_deps))}}}"
                if scheme.uncertainty_deps
                else ""
            )
            click.echo(
                f"  scheme {scheme.name} ({scheme.kind}): "
                f"{{{', '.join(sorted(scheme.attrs))}}}{deps}"
            )
    click.echo("world table:")
    for var in engine.world.variables():
        marg = ", ".join(f"{m:.6g}" for m in engine.world.marginals(var))
        click.echo(f"  x{var}: ({marg})")
    click.echo("relations: " + ", ".join(
        f"{name}({len(rel)})" for name, rel in sorted(engine.relations.items())
    ))


@main.command("synth")
@click.argument("manifest", type=click.Path())
@click.option("--format", "fmt", type=click.Choice(["text", "json"]),
              default="text", show_default=True)
@click.option("--factor-tol", default=1e-9, show_default=True)
def cmd_synth(manifest: str, fmt: str, factor_tol: float) -> None:
    """Print the derived schemas without building relations."""
    try:
        project = load_project(manifest)
    except ProjectError as exc:
        click.echo(f"manifest error: {exc}", err=True)
        sys.exit(2)
    except HypoDBError as exc:
        click.echo(f"load failed: {exc}", err=True)
        sys.exit(1)
    report = []
    for hyp in project.hypotheses:
        sigma = extract_fds(hyp.model)
        certain, factors = learn_factors(
            hyp.inputs, list(hyp.model.params), tol=factor_tol
        )
        schemes = u_ptc(sigma, certain_params=certain)
        report.append(
            {
                "upsilon": hyp.upsilon,
                "name": hyp.name,
                "fds": [str(fd) for fd in sigma.sorted_fds()],
                "third_normal_form": [
                    sorted(s.attrs) for s in synthesize_3nf(sigma)
                ],
                "certain": certain,
                "factors": [
                    {"params": list(f.params),
                     "support": [list(v) for v in f.support],
                     "frequencies": list(f.frequencies)}
                    for f in factors
                ],
                "schemes": [
                    {
                        "name": s.name,
                        "kind": s.kind,
                        "attrs": sorted(s.attrs),
                        "key": sorted(s.key),
                        "uncertainty_deps": sorted(s.uncertainty_deps),
                    }
                    for s in schemes
                ],
            }
        )
    if fmt == "json":
        click.echo(json.dumps(report, sort_keys=True, indent=1))
        return
    for entry in report:
        click.echo(f"hypothesis {entry['upsilon']}: {entry['name']}")
        for fd in entry["fds"]:
            click.echo(f"  FD {fd}")
        for attrs in entry["third_normal_form"]:
            click.echo(f"  3NF scheme {{{', '.join(attrs)}}}")
        for scheme in entry["schemes"]:
            deps = (
                f" deps={{{', '.join(scheme['uncertainty_deps'])}}}"
                if scheme["uncertainty_deps"]
                else ""
            )
            click.echo(
                f"  scheme {scheme['name']} ({scheme['kind']}): "
                f"{{{', '.join(scheme['attrs'])}}}{deps}"
            )


@main.command("query")
@click.option("--state", "state_path", default=DEFAULT_STATE, show_default=True)
@click.option("--phi", type=int, required=True)
@click.option("--attr", required=True)
@click.option("--at", multiple=True, help="Dim filter, e.g. --at t=3.")
@click.option("--format", "fmt", type=click.Choice(["table", "json"]),
              default="table", show_default=True)
def cmd_query(state_path: str, phi: int, attr: str, at: Tuple[str, ...],
              fmt: str) -> None:
    """Ranked predictions (descending prior)."""
    from .analytics import rank_predictions

    dims = _parse_dim_filter(at)
    with _lock(state_path):
        _, engine = _load_current(state_path)
    try:
        rows = rank_predictions(engine, phi, attr, dims or None)
    except HypoDBError as exc:
        click.echo(f"query failed: {exc}", err=True)
        sys.exit(1)
    if fmt == "json":
        click.echo(json.dumps(
            [
                {"phi": r.phi, "upsilon": r.upsilon, "value": r.value,
                 "prior": r.prior}
                for r in rows
            ],
            sort_keys=True,
        ))
        return
    click.echo(f"{'phi':>4} {'upsilon':>8} {'value':>14} {'prior':>10}")
    for r in rows:
        click.echo(f"{r.phi:>4} {r.upsilon:>8} {r.value:>14.6g} {r.prior:>10.6g}")


@main.command("observe")
@click.option("--state", "state_path", default=DEFAULT_STATE, show_default=True)
@click.option("--attr", required=True)
@click.option("--at", multiple=True, help="Dim filter, e.g. --at t=3.")
@click.option("--y", type=float, required=True)
@click.option("--sigma", type=float, required=True)
@click.option("--commit", is_flag=True, default=False,
              help="Persist the conditioning step (default: dry run).")
def cmd_observe(state_path: str, attr: str, at: Tuple[str, ...], y: float,
                sigma: float, commit: bool) -> None:
    """Condition the prior ranking on an observed value."""
    if sigma <= 0:
        click.echo("sigma must be positive", err=True)
        sys.exit(2)
    dims = _parse_dim_filter(at)
    with _lock(state_path):
        data, engine = _load_current(state_path)
        obs = Observation(attr, dims, y, sigma)
        try:
            rows = run_observe(engine, obs, commit=False)
        except HypoDBError as exc:
            click.echo(f"observe failed: {exc}", err=True)
            sys.exit(1)
        if commit:
            data["history"].append(
                {"attr": attr, "dims": dims, "y": y, "sigma": sigma}
            )
            _write_state(state_path, data)
    click.echo(f"{'phi':>4} {'upsilon':>8} {'value':>14} {'prior':>10} "
               f"{'posterior':>10}")
    for r in rows:
        click.echo(
            f"{r.phi:>4} {r.upsilon:>8} {r.value:>14.6g} {r.prior:>10.6g} "
            f"{r.posterior:>10.6g}"
        )
    if commit:
        click.echo("committed")
    else:
        click.echo("dry run (state unchanged)")


@main.command("history")
@click.option("--state", "state_path", default=DEFAULT_STATE, show_default=True)
def cmd_history(state_path: str) -> None:
    """List committed conditioning steps."""
    with _lock(state_path):
        data, _ = _load_current(state_path)
    if not data["history"]:
        click.echo("no committed observations")
        return
    for i, step in enumerate(data["history"], start=1):
        dims = ", ".join(f"{k}={v}" for k, v in step["dims"].items())
        click.echo(
            f"{i}: {step['attr']} [{dims}] y={step['y']} sigma={step['sigma']}"
        )


@main.command("reset")
@click.option("--state", "state_path", default=DEFAULT_STATE, show_default=True)
def cmd_reset(state_path: str) -> None:
    """Drop all committed conditioning steps."""
    with _lock(state_path):
        data, _ = _load_current(state_path)
        data["history"] = []
        _write_state(state_path, data)
    click.echo("history cleared")


@main.command("serve")
@click.option("--state", "state_path", default=DEFAULT_STATE, show_default=True)
@click.option("--bind", default=None,
              help=f"host:port (default from ${BIND_ENV} or 127.0.0.1:8350)")
@click.option("--ui-dir", default=None, type=click.Path(),
              help="Directory with the static analyst UI.")
def cmd_serve(state_path: str, bind: Optional[str], ui_dir: Optional[str]) -> None:
    """Serve the HTTP JSON API (and the analyst UI when available)."""
    import uvicorn

    from .server import create_app

    bind = bind or os.environ.get(BIND_ENV, "127.0.0.1:8350")
    host, _, port = bind.partition(":")
    app = create_app(state_path, ui_dir=ui_dir)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8350))


if __name__ == "__main__":
    main()
