"""Thin command-line client for the experiment service.

Each subcommand builds the same request model the HTTP endpoints accept and
dispatches it in-process (default) or to a running server via --server.
Canonical JSON reports go to --out; the radius map additionally emits CSV.
Exit codes: 0 all assertions passed, 1 violations (report still written),
2 usage errors.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .reports import canonical_json
from .service.runner import RUNNERS


def _load_manifold(path: str) -> dict:
    try:
        with open(path) as f:
            return json.load(f)
    except (OSError, json.JSONDecodeError) as exc:
        raise click.UsageError(f"cannot read manifold spec {path}: {exc}")


def _dispatch(name: str, payload: dict, server: str | None) -> dict:
    if server:
        import httpx

        resp = httpx.post(f"{server.rstrip('/')}/v1/{name}", json=payload, timeout=3600.0)
        if resp.status_code == 422:
            raise click.UsageError(f"server rejected parameters: {resp.text}")
        resp.raise_for_status()
        return resp.json()
    model_cls, fn = RUNNERS[name]
    try:
        request = model_cls.model_validate(payload)
        return fn(request).model_dump()
    except Exception as exc:
        from .manifold import ManifoldError
        from .norms import NormError
        from pydantic import ValidationError

        if isinstance(exc, (ManifoldError, NormError, ValidationError, ValueError)):
            raise click.UsageError(str(exc))
        raise


def _finish(ctx: click.Context, name: str, resp: dict, out: str | None,
            csv: str | None = None) -> None:
    out_path = Path(out) if out else Path(f"{name}_report.json")
    out_path.write_text(canonical_json(resp["report"]) + "\n")
    if resp.get("csv"):
        csv_path = Path(csv) if csv else out_path.with_suffix(".csv")
        csv_path.write_text(resp["csv"])
        click.echo(f"csv written to {csv_path}", err=True)
    status = "PASS" if resp["passed"] else "FAIL"
    click.echo(f"{name}: {status} ({resp['runtime_ms']:.0f} ms) -> {out_path}", err=True)
    ctx.exit(0 if resp["passed"] else 1)


def common_options(fn):
    fn = click.option("--manifold", "manifold_path", required=True,
                      type=click.Path(exists=True, dir_okay=False),
                      help="JSON manifold manifest")(fn)
    fn = click.option("--epsilon", type=float, default=0.1, show_default=True)(fn)
    fn = click.option("--seed", type=int, default=0, show_default=True)(fn)
    fn = click.option("--out", type=click.Path(dir_okay=False), default=None,
                      help="report JSON path")(fn)
    fn = click.option("--server", default=None, help="base URL of a running service")(fn)
    return fn


@click.group()
def main():
    """Admissible radius fields, coverings, and weighted inequality experiments."""


@main.command()
@common_options
@click.option("--grid", "grid_per_axis", type=int, default=10, show_default=True)
@click.option("--csv", "csv_path", type=click.Path(dir_okay=False), default=None)
@click.pass_context
def radius(ctx, manifold_path, epsilon, seed, out, server, grid_per_axis, csv_path):
    """Admissible radius fields of both classes on a window grid (CSV + JSON)."""
    payload = {"manifold": _load_manifold(manifold_path), "epsilon": epsilon,
               "seed": seed, "grid_per_axis": grid_per_axis}
    _finish(ctx, "radius", _dispatch("radius", payload, server), out, csv_path)


@main.command()
@common_options
@click.option("--class", "cls", type=click.IntRange(0, 1), default=1, show_default=True)
@click.option("--grid-pitch", "pitch_factor", type=float, default=0.5, show_default=True,
              help="candidate pitch as a fraction of the local base radius")
@click.option("--field-grid", type=int, default=16, show_default=True)
@click.pass_context
def cover(ctx, manifold_path, epsilon, seed, out, server, cls, pitch_factor, field_grid):
    """Vitali admissible covering with overlap statistics."""
    payload = {"manifold": _load_manifold(manifold_path), "epsilon": epsilon, "seed": seed,
               "class": cls, "pitch_factor": pitch_factor, "field_grid_per_axis": field_grid}
    _finish(ctx, "cover", _dispatch("cover", payload, server), out)


@main.command()
@common_options
@click.option("--class", "cls", type=click.IntRange(0, 1), default=0, show_default=True)
@click.option("--r", type=float, default=1.5, show_default=True)
@click.option("--m", type=int, default=1, show_default=True)
@click.option("--k", type=int, default=0, show_default=True)
@click.option("--gamma", type=float, default=0.0, show_default=True)
@click.option("--suite-size", type=int, default=20, show_default=True)
@click.option("--nodes", type=int, default=48, show_default=True)
@click.pass_context
def embed(ctx, manifold_path, epsilon, seed, out, server, cls, r, m, k, gamma,
          suite_size, nodes):
    """Weighted Sobolev embedding experiment with the nu=0 ablation."""
    payload = {"manifold": _load_manifold(manifold_path), "epsilon": epsilon, "seed": seed,
               "class": cls, "r": r, "m": m, "k": k, "gamma": gamma,
               "suite_size": suite_size, "nodes": nodes}
    _finish(ctx, "embed", _dispatch("embed", payload, server), out)


@main.command()
@common_options
@click.option("--r", type=float, default=2.0, show_default=True)
@click.option("--p", type=int, default=1, show_default=True)
@click.option("--suite-size", type=int, default=8, show_default=True)
@click.option("--nodes", type=int, default=36, show_default=True)
@click.option("--center", default=None, help="local-ball center, comma separated")
@click.pass_context
def gaffney(ctx, manifold_path, epsilon, seed, out, server, r, p, suite_size, nodes, center):
    """Local (C, c) feasibility plus the global weighted Gaffney inequality."""
    payload = {"manifold": _load_manifold(manifold_path), "epsilon": epsilon, "seed": seed,
               "r": r, "p": p, "suite_size": suite_size, "nodes": nodes}
    if center:
        try:
            payload["local_center"] = [float(v) for v in center.split(",")]
        except ValueError:
            raise click.UsageError("--center must be comma-separated floats")
    _finish(ctx, "gaffney", _dispatch("gaffney", payload, server), out)


@main.command()
@common_options
@click.option("--points", "n_points", type=int, default=12, show_default=True)
@click.option("--tolerance", type=float, default=1e-3, show_default=True)
@click.pass_context
def curvature(ctx, manifold_path, epsilon, seed, out, server, n_points, tolerance):
    """Sectional/Ricci curvature diagnostics against the builtin constants."""
    payload = {"manifold": _load_manifold(manifold_path), "epsilon": epsilon, "seed": seed,
               "n_points": n_points, "tolerance": tolerance}
    _finish(ctx, "curvature", _dispatch("curvature", payload, server), out)


@main.command()
@common_options
@click.option("--suite-size", type=int, default=5, show_default=True)
@click.option("--points", "points_per_field", type=int, default=250, show_default=True)
@click.pass_context
def kato(ctx, manifold_path, epsilon, seed, out, server, suite_size, points_per_field):
    """Pointwise Kato inequality sampling for scalars and 1-forms."""
    payload = {"manifold": _load_manifold(manifold_path), "epsilon": epsilon, "seed": seed,
               "suite_size": suite_size, "points_per_field": points_per_field}
    _finish(ctx, "kato", _dispatch("kato", payload, server), out)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve(host, port):
    """Run the HTTP service."""
    import uvicorn

    from .service.app import app

    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
