"""Command-line front end.

Two sub-trees: ``graphs`` for the combinatorial operations (enumerate,
delta, cocycles) and ``knot`` for curve-based quantities (a2, sln, lk,
v2).  Stdout carries a single JSON document per invocation; every
result embeds the resolved run configuration and the library version.
Knot results are cached under a content-addressed path; repeated runs
with identical configuration are byte-identical.
"""

from __future__ import annotations

import hashlib
import json
import os
import sys
from pathlib import Path

import click

from . import __version__
from .curves import load_curve
from .diagrams import a2_of_curve
from .errors import (
    CurvesIntersect,
    CurveValidationError,
    GraphflowError,
    InconsistentDiagram,
    InvalidGraph,
    InvalidParams,
    ResourceLimit,
)
from .graphs import DecoratedGraph, Flavor, GraphSum, delta, enumerate_graphs
from .integrals import (
    DEFAULT_SEED,
    linking_integral,
    sln_integral,
    split_cocycle_terms,
    v2_invariant,
)
from .solver import delta_matrix, kernel_basis

_PARSE_ERRORS = (InvalidGraph, InvalidParams, json.JSONDecodeError)
_VALIDATION_ERRORS = (CurveValidationError, CurvesIntersect, InconsistentDiagram)


def _fail(exc: Exception, code: int):
    payload = {"error": {"type": type(exc).__name__, "message": str(exc)}}
    if isinstance(exc, CurveValidationError):
        payload["error"]["invariant"] = exc.invariant
    click.echo(json.dumps(payload, sort_keys=True), err=True)
    sys.exit(code)


def _emit(command: str, config: dict, result) -> str:
    doc = {"command": command, "config": config, "version": __version__, "result": result}
    text = json.dumps(doc, indent=2, sort_keys=True)
    click.echo(text)
    return text


def _run(command: str, config: dict, compute):
    try:
        result = compute()
    except ResourceLimit as exc:
        _fail(exc, 3)
    except _VALIDATION_ERRORS as exc:
        _fail(exc, 4)
    except _PARSE_ERRORS as exc:
        _fail(exc, 2)
    except GraphflowError as exc:
        _fail(exc, 1)
    else:
        _emit(command, config, result)


def _default_cache_dir() -> Path:
    env = os.environ.get("GRAPHFLOW_CACHE_DIR")
    if env:
        return Path(env)
    return Path.home() / ".cache" / "graphflow"


def _cached(command: str, config_fn, cache_dir: str | None, no_cache: bool, compute):
    """Replay a stored result or compute, emit and store."""
    try:
        config = config_fn()
        base = Path(cache_dir) if cache_dir else _default_cache_dir()
        key_src = json.dumps(
            {"command": command, "key": config, "version": __version__}, sort_keys=True
        )
        key = hashlib.sha256(key_src.encode()).hexdigest()
        path = base / key[:2] / (key + ".json")
        if not no_cache and path.exists():
            sys.stdout.write(path.read_text())
            return
        result = compute()
    except ResourceLimit as exc:
        _fail(exc, 3)
    except _VALIDATION_ERRORS as exc:
        _fail(exc, 4)
    except _PARSE_ERRORS as exc:
        _fail(exc, 2)
    except GraphflowError as exc:
        _fail(exc, 1)
    else:
        text = _emit(command, config, result) + "\n"
        if not no_cache:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(text)


@click.group()
@click.version_option(version=__version__)
def main():
    """Decorated-graph cohomology and knot configuration integrals."""


@main.group()
def graphs():
    """Combinatorial operations on decorated graphs."""


_FLAVOR = click.Choice(["manifold", "knot"])


@graphs.command("enumerate")
@click.option("--flavor", type=_FLAVOR, required=True)
@click.option("--order", type=int, required=True)
@click.option("--degree", type=int, default=0, show_default=True)
@click.option("--disconnected", is_flag=True, help="Include disconnected graphs.")
def graphs_enumerate(flavor, order, degree, disconnected):
    """List canonical graphs of the given grade."""
    config = {"flavor": flavor, "order": order, "degree": degree, "connected": not disconnected}
    _run(
        "graphs enumerate",
        config,
        lambda: [
            g.to_json_obj()
            for g in enumerate_graphs(Flavor(flavor), order, degree, connected=not disconnected)
        ],
    )


@graphs.command("delta")
@click.option("--input", "path", type=click.Path(exists=True, dir_okay=False), required=True)
def graphs_delta(path):
    """Coboundary of the graph in a text-format file."""
    config = {"input": str(path)}

    def compute():
        g = DecoratedGraph.from_text(Path(path).read_text())
        return delta(g).to_json_obj()

    _run("graphs delta", config, compute)


@graphs.command("cocycles")
@click.option("--flavor", type=_FLAVOR, required=True)
@click.option("--order", type=int, required=True)
def graphs_cocycles(flavor, order):
    """Kernel basis of the coboundary matrix at the given order."""
    config = {"flavor": flavor, "order": order}

    def compute():
        basis0, basis1, m = delta_matrix(Flavor(flavor), order)
        kernel = kernel_basis(m)
        sums = []
        for vec in kernel:
            s = GraphSum({g: c for g, c in zip(basis0, vec) if c})
            sums.append(s.to_json_obj())
        return {
            "basis": [g.to_json_obj() for g in basis0],
            "kernel": sums,
        }

    _run("graphs cocycles", config, compute)


@main.group()
def knot():
    """Numerical knot quantities."""


_CACHE_OPTS = [
    click.option("--cache-dir", type=click.Path(file_okay=False), default=None),
    click.option("--no-cache", is_flag=True),
]


def _with_cache_opts(f):
    for opt in reversed(_CACHE_OPTS):
        f = opt(f)
    return f


@knot.command("a2")
@click.option("--curve", "curve_path", required=True)
@click.option("--directions", type=int, default=3, show_default=True)
@click.option("--seed", type=int, default=7, show_default=True)
@_with_cache_opts
def knot_a2(curve_path, directions, seed, cache_dir, no_cache):
    """Order-2 combinatorial invariant from planar projections."""

    def compute():
        curve = load_curve(curve_path)
        value = a2_of_curve(curve, directions=directions, seed=seed)
        return {"a2": value, "curve_hash": curve.content_hash()}

    def config():
        return {
            "curve": str(curve_path),
            "curve_hash": load_curve(curve_path).content_hash(),
            "directions": directions,
            "seed": seed,
        }

    _cached("knot a2", config, cache_dir, no_cache, compute)


@knot.command("sln")
@click.option("--curve", "curve_path", required=True)
@click.option("--grid", type=int, default=1024, show_default=True)
@_with_cache_opts
def knot_sln(curve_path, grid, cache_dir, no_cache):
    """Self-linking integral by banded quadrature."""

    def compute():
        curve = load_curve(curve_path)
        est = sln_integral(curve, grid=grid)
        out = est.to_json_obj()
        out["op"] = "sln"
        out["curve_hash"] = curve.content_hash()
        return out

    def config():
        return {
            "curve": str(curve_path),
            "curve_hash": load_curve(curve_path).content_hash(),
            "grid": grid,
        }

    _cached("knot sln", config, cache_dir, no_cache, compute)


@knot.command("lk")
@click.option("--curve", "curve_path", required=True)
@click.option("--curve2", "curve2_path", required=True)
@click.option("--grid", type=int, default=1024, show_default=True)
@_with_cache_opts
def knot_lk(curve_path, curve2_path, grid, cache_dir, no_cache):
    """Gauss linking number of two disjoint curves."""

    def compute():
        k1, k2 = load_curve(curve_path), load_curve(curve2_path)
        est = linking_integral(k1, k2, grid=grid)
        out = est.to_json_obj()
        out["op"] = "lk"
        out["curve_hash"] = k1.content_hash()
        out["curve2_hash"] = k2.content_hash()
        return out

    def config():
        return {
            "curve": str(curve_path),
            "curve2": str(curve2_path),
            "curve_hash": load_curve(curve_path).content_hash(),
            "curve2_hash": load_curve(curve2_path).content_hash(),
            "grid": grid,
        }

    _cached("knot lk", config, cache_dir, no_cache, compute)


@knot.command("v2")
@click.option("--curve", "curve_path", required=True)
@click.option("--samples", type=float, default=1e6, show_default=True)
@click.option("--seed", type=int, default=DEFAULT_SEED, show_default=True)
@click.option("--workers", type=int, default=None)
@_with_cache_opts
def knot_v2(curve_path, samples, seed, cache_dir, no_cache, workers):
    """Order-2 cocycle configuration integral (Monte Carlo)."""
    n_samples = int(samples)

    def compute():
        from .graphs import knot_order2_cocycle

        curve = load_curve(curve_path)
        cocycle = knot_order2_cocycle()
        est = v2_invariant(curve, cocycle, n_samples=n_samples, seed=seed, workers=workers)
        _, skipped = split_cocycle_terms(cocycle)
        out = est.to_json_obj()
        out["op"] = "v2"
        out["curve_hash"] = curve.content_hash()
        out["omitted_terms"] = [
            {"coeff": f"{c.numerator}/{c.denominator}", "graph": g.to_json_obj()}
            for c, g in skipped
        ]
        return out

    def config():
        return {
            "curve": str(curve_path),
            "curve_hash": load_curve(curve_path).content_hash(),
            "samples": n_samples,
            "seed": seed,
        }

    _cached("knot v2", config, cache_dir, no_cache, compute)


if __name__ == "__main__":
    main()
