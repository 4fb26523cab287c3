"""Command-line front end.

Exit codes: 0 ok, 2 validation failure, 3 domain error, 4 numeric non-convergence.
``GEOTHERM_THREADS`` caps the worker threads used for grid fills.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence

import click
import numpy as np

from . import coset_geometry as cg
from . import geodesic_system as gs
from . import moment_maps as mm
from . import numkit
from . import souriau_gibbs as sg
from . import thermo_geometry as tg
from .errors import DomainError, NoConvergence, NotKahler, SingularMetric
from .isometry_engine import killing_algebra_residual, killing_field
from .model_catalog import load_model

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_DOMAIN = 3
EXIT_NUMERIC = 4


class ValidationFailed(Exception):
    pass


def thread_count() -> int:
    raw = os.environ.get("GEOTHERM_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        n = os.cpu_count() or 1
    return max(1, n)


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    if v is None:
        return ""
    return format(float(v), ".17g")


def render(params: dict, columns: Sequence[str], rows: Sequence[Sequence], fmt: str) -> str:
    if fmt == "json":
        clean = [[None if isinstance(v, float) and not math.isfinite(v) else v for v in r] for r in rows]
        return json.dumps({"params": params, "columns": list(columns), "rows": clean}, sort_keys=True) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow([_fmt(v) for v in r])
    return buf.getvalue()


def emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)


def _floats(raw: str, name: str) -> np.ndarray:
    try:
        return np.array([float(v) for v in raw.split(",") if v.strip()])
    except ValueError as exc:
        raise click.BadParameter(f"{name} must be comma-separated numbers") from exc


def _rows_parallel(fn: Callable[[tuple], list], cells: list) -> list:
    workers = thread_count()
    if workers == 1 or len(cells) < 2:
        return [fn(c) for c in cells]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, cells))


class GeothermGroup(click.Group):
    """Maps library exceptions onto the documented exit codes."""

    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except ValidationFailed as exc:
            click.echo(f"validation failed: {exc}", err=True)
            ctx.exit(EXIT_VALIDATION)
        except DomainError as exc:
            click.echo(f"domain error: {exc}", err=True)
            ctx.exit(EXIT_DOMAIN)
        except NoConvergence as exc:
            click.echo(f"no convergence: {exc}", err=True)
            ctx.exit(EXIT_NUMERIC)


@click.group(cls=GeothermGroup)
def main() -> None:
    """Gibbs states on symmetric spaces and geodesic-flow thermodynamics."""


# ---------------------------------------------------------------- model info

MODEL_ALIASES = {"sh2": "SH2_vector"}


def _model(name: str):
    return load_model(MODEL_ALIASES.get(name.lower(), name))


@main.group()
def model() -> None:
    """Inspect catalog models."""


@model.command("info")
@click.option("--model", "model_name", required=True)
def model_info(model_name: str) -> None:
    spec = _model(model_name)
    info = {
        "name": spec.name,
        "dimension": spec.dim,
        "matrix_size": spec.size,
        "coordinates": list(spec.coords),
        "algebra": list(spec.algebra_labels),
        "kahler": spec.is_kahler,
        "trace_scale": spec.trace_scale,
        "kappa": spec.kappa.tolist(),
    }
    click.echo(json.dumps(info, indent=2))


# ---------------------------------------------------------------- validate


def _kahler_closure(spec, y) -> float:
    return float(np.max(np.abs(numkit.fd_exterior_derivative_2form(lambda z: cg.kahler_form_at(spec, z), y))))


def _complex_square(spec, y) -> float:
    j = cg.complex_structure_at(spec, y)
    return float(np.max(np.abs(j @ j + np.eye(spec.dim))))


def _moment_hamiltonian(spec, y, kahler_sign: float) -> float:
    worst = 0.0
    kform = kahler_sign * cg.kahler_form_at(spec, y)
    for a in range(len(spec.algebra)):
        grad = numkit.fd_gradient(lambda z: mm.moment_map(spec, a, z), y)
        worst = max(worst, float(np.max(np.abs(killing_field(spec, a, y) @ kform - mm.MOMENT_SCALE * grad))))
    return worst


def _sl3_involution(rng) -> float:
    worst = 0.0
    for _ in range(5):
        p = rng.standard_normal(5)
        p[4] = math.copysign(abs(p[4]) + 0.5, p[4])
        worst = max(worst, gs.sl3_involution_residual(p))
    return worst


def run_validation(model_name: str, tol_scale: float, seed: int, fault: str | None) -> dict:
    spec = _model(model_name)
    rng = numkit.make_rng(seed)
    points = [0.4 * rng.standard_normal(spec.dim) for _ in range(3)]
    kahler_sign = -1.0 if fault == "kahler-sign" else 1.0
    checks: list[dict] = []

    def record(name: str, fn: Callable[[], float], limit: float) -> None:
        try:
            value = fn()
        except NotKahler:
            checks.append({"check": name, "status": "not applicable", "residual": None, "limit": limit})
            return
        ok = bool(np.isfinite(value) and value <= limit * tol_scale)
        checks.append({"check": name, "status": "pass" if ok else "fail", "residual": value, "limit": limit * tol_scale})

    def kahler_only(fn):
        def wrapped():
            if not spec.is_kahler:
                raise NotKahler(spec.name)
            return fn()

        return wrapped

    record("maurer_cartan", lambda: max(cg.maurer_cartan_residual(spec, y) for y in points), 1e-7)
    record("kahler_closure", kahler_only(lambda: max(_kahler_closure(spec, y) for y in points)), 1e-7)
    record("complex_structure_square", kahler_only(lambda: max(_complex_square(spec, y) for y in points)), 1e-10)
    record("killing_algebra", lambda: killing_algebra_residual(spec, points), 1e-5)
    record(
        "moment_hamiltonian",
        kahler_only(lambda: max(_moment_hamiltonian(spec, y, kahler_sign) for y in points)),
        1e-5,
    )
    record("moment_poisson_algebra", kahler_only(lambda: max(mm.moment_poisson_residual(spec, y) for y in points)), 1e-5)
    record(
        "phase_space_inverse",
        lambda: max(
            float(np.max(np.abs(gs.symplectic_form_gds(spec, phi) @ gs.poisson_bivector(spec, phi) - np.eye(2 * spec.dim))))
            for phi in (0.5 * rng.standard_normal(2 * spec.dim) for _ in range(3))
        ),
        1e-10,
    )
    if spec.name == "SL3":
        record("hamiltonian_involution", lambda: _sl3_involution(rng), 1e-9)
    failed = [c["check"] for c in checks if c["status"] == "fail"]
    return {"model": spec.name, "seed": seed, "fault": fault, "checks": checks, "failed": failed, "passed": not failed}


@main.command()
@click.option("--model", "model_name", required=True)
@click.option("--tol", type=float, default=1.0, show_default=True, help="Multiplier on every residual limit.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--inject-fault", "fault", type=click.Choice(["kahler-sign"]), default=None)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def validate(model_name: str, tol: float, seed: int, fault: str | None, out: str | None) -> None:
    """Run the invariant suites for one model and print a JSON report."""
    if not tol > 0.0:
        raise click.BadParameter("--tol must be positive")
    report = run_validation(model_name, tol, seed, fault)
    emit(json.dumps(report, indent=2) + "\n", out)
    if not report["passed"]:
        raise ValidationFailed(", ".join(report["failed"]))


# ---------------------------------------------------------------- gibbs grid


def gibbs_grid_rows(delta: float, mu: float, theta: float, resolution: int) -> list[list[float]]:
    """Disk density on a resolution x resolution grid of cell centres covering [-1, 1]^2."""
    sg._h2_norm(delta, mu * math.cos(theta), mu * math.sin(theta))
    centres = -1.0 + (np.arange(resolution) + 0.5) * (2.0 / resolution)
    xx, yy = np.meshgrid(centres, centres, indexing="ij")
    inside = xx * xx + yy * yy < 1.0
    dens = np.zeros_like(xx)
    with np.errstate(over="ignore", under="ignore", invalid="ignore"):
        dens[inside] = sg.gibbs_density_disk(delta, mu, theta, xx[inside], yy[inside])
    dens = np.where(np.isfinite(dens), dens, 0.0)
    return [[float(x), float(y), float(d)] for x, y, d in zip(xx.ravel(), yy.ravel(), dens.ravel())]


@main.command("gibbs-grid")
@click.option("--model", "model_name", default="h2", show_default=True)
@click.option("--delta", type=float, required=True)
@click.option("--mu", type=float, default=0.0, show_default=True)
@click.option("--theta", type=float, default=0.0, show_default=True)
@click.option("--resolution", type=int, default=200, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv", show_default=True)
def gibbs_grid(model_name: str, delta: float, mu: float, theta: float, resolution: int, out, fmt) -> None:
    """Gibbs density of H2 in the unit disk; columns x, y, density."""
    if _model(model_name).name != "H2":
        raise DomainError("gibbs-grid supports the H2 model only")
    if resolution < 2:
        raise click.BadParameter("--resolution must be at least 2")
    rows = gibbs_grid_rows(delta, mu, theta, resolution)
    params = {"model": "H2", "delta": delta, "mu": mu, "theta": theta, "resolution": resolution}
    emit(render(params, ["x", "y", "density"], rows, fmt), out)


# ---------------------------------------------------------------- partition


def compute_partition(model_name: str, method: str, values: dict, seed: int, tol: float) -> tuple[dict, sg.PartitionEvaluation]:
    name = model_name.lower()
    if name == "h2":
        if values["mu"] is not None:
            tau = sg.TemperatureVector.h2_polar(values["delta"], values["mu"], values["theta"] or 0.0)
        else:
            tau = sg.TemperatureVector.h2(values["delta"], values["beta"] or 0.0, values["zeta"] or 0.0)
        d, b, z = tau.triple
        params = {"model": "H2", "delta": d, "beta": b, "zeta": z}
        if method == "closed":
            return params, sg.partition_h2(d, b, z)
        if method == "numeric":
            return params, sg.partition_numeric("H2", tau)
        raise DomainError(f"method {method!r} is not available for H2")
    if name in ("sh2", "sh2_vector"):
        lam, mu = values["lam"], values["mu"] or 0.0
        if lam is None:
            raise click.BadParameter("--lambda is required for sh2")
        params = {"model": "SH2_vector", "lambda": lam, "mu": mu}
        if method in ("staged", "closed"):
            return params, sg.partition_siegel(lam, mu)
        if method == "numeric":
            tau = sg.TemperatureVector.siegel(lam, mu)
            return params, sg.partition_numeric("SH2_vector", tau, rel_tol=tol, rng=seed)
        raise DomainError(f"method {method!r} is not available for sh2")
    if name == "sl3-gds":
        l1, l2, l3, vol = values["l1"], values["l2"] or 0.0, values["l3"] or 0.0, values["volume"]
        if l1 is None:
            raise click.BadParameter("--l1 is required for sl3-gds")
        params = {"model": "SL3-GDS", "l1": l1, "l2": l2, "l3": l3, "V": vol}
        if method == "closed":
            if l2 != 0.0:
                raise DomainError("the closed form requires l2 = 0")
            return params, gs.gds_partition_sl3(l1, l3, vol)
        if method == "numeric":
            return params, gs.gds_zeta_numeric(l1, l2, l3, vol, seed=seed)
        raise DomainError(f"method {method!r} is not available for sl3-gds")
    raise DomainError(f"unknown partition model {model_name!r}")


@main.command()
@click.option("--model", "model_name", required=True, help="h2, sh2 or sl3-gds")
@click.option("--method", type=click.Choice(["closed", "staged", "numeric"]), default=None)
@click.option("--delta", type=float, default=None)
@click.option("--beta", type=float, default=None)
@click.option("--zeta", type=float, default=None)
@click.option("--mu", type=float, default=None)
@click.option("--theta", type=float, default=None)
@click.option("--lambda", "lam", type=float, default=None)
@click.option("--l1", type=float, default=None)
@click.option("--l2", type=float, default=None)
@click.option("--l3", type=float, default=None)
@click.option("--V", "volume", type=float, default=1.0, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--tol", type=float, default=0.02, show_default=True, help="Relative tolerance for Monte Carlo.")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="json", show_default=True)
def partition(model_name, method, delta, beta, zeta, mu, theta, lam, l1, l2, l3, volume, seed, tol, out, fmt) -> None:
    """Evaluate a partition function."""
    if method is None:
        method = "staged" if model_name.lower() == "sh2" else "closed"
    if model_name.lower() == "h2" and delta is None:
        raise click.BadParameter("--delta is required for h2")
    values = dict(delta=delta, beta=beta, zeta=zeta, mu=mu, theta=theta, lam=lam, l1=l1, l2=l2, l3=l3, volume=volume)
    params, ev = compute_partition(model_name, method, values, seed, tol)
    params["method"] = method
    emit(render(params, ["value", "error", "method"], [[ev.value, ev.error_estimate, ev.method]], fmt), out)


# ---------------------------------------------------------------- geodesic


@main.command()
@click.option("--model", "model_name", default="SL3", show_default=True)
@click.option("--upsilon", required=True, help="Comma-separated solvable coordinates.")
@click.option("--momenta", required=True, help="Comma-separated anholonomic momenta.")
@click.option("--t-end", type=float, default=10.0, show_default=True)
@click.option("--steps", type=int, default=10000, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv", show_default=True)
def geodesic(model_name, upsilon, momenta, t_end, steps, out, fmt) -> None:
    """Integrate a geodesic; columns t, Y..., p..., then h1, h2, h3 (SL3) or energy."""
    spec = _model(model_name)
    start = gs.PhasePoint.of(_floats(upsilon, "--upsilon"), _floats(momenta, "--momenta"))
    traj = gs.geodesic_integrate(spec, start, t_end, steps)
    d = spec.dim
    cols = ["t"] + [f"Y{i + 1}" for i in range(d)] + [f"p{i + 1}" for i in range(d)]
    if spec.name == "SL3":
        cols += ["h1", "h2", "h3"]

        def extra(p):
            try:
                return list(gs.sl3_hamiltonians(p))
            except DomainError:
                return [gs.gds_hamiltonian(spec, p), float("nan"), float("nan")]
    else:
        cols += ["energy"]

        def extra(p):
            return [gs.gds_hamiltonian(spec, p)]

    rows = [[t, *y, *p, *extra(p)] for t, y, p in zip(traj.t, traj.upsilon, traj.momenta)]
    params = {"model": spec.name, "t_end": t_end, "steps": steps}
    emit(render(params, cols, rows, fmt), out)


# ---------------------------------------------------------------- thermo grids


def _axis(lo: float, hi: float, n: int) -> np.ndarray:
    return np.linspace(lo, hi, n)


def thermo_rows(system: str, quantity: str, xs: np.ndarray, ys: np.ndarray, extra: dict) -> tuple[list[str], list]:
    cells = [(float(x), float(y)) for x in xs for y in ys]
    nan = float("nan")
    if system == "h2":
        theta = extra.get("theta", 0.0)
        if quantity == "curvature":
            cols = ["delta", "mu", "F", "G", "Q", "P"]

            def fn(c):
                try:
                    return [*c, *tg.h2_curvature_components(*c)]
                except (DomainError, ZeroDivisionError, ValueError):
                    return [*c, nan, nan, nan, nan]
        else:
            cols = ["delta", "mu", "g_dd", "g_db", "g_dz", "g_bb", "g_bz", "g_zz"]

            def fn(c):
                d, m = c
                try:
                    g = tg.h2_metric(d, m * math.cos(theta), m * math.sin(theta))
                except DomainError:
                    return [d, m] + [nan] * 6
                return [d, m, g[0, 0], g[0, 1], g[0, 2], g[1, 1], g[1, 2], g[2, 2]]
    elif system == "gds":
        vol = extra.get("volume", 1.0)
        if quantity == "curvature":
            cols = ["l1", "l3", "R12"]

            def fn(c):
                try:
                    return [*c, float(gs.gds_frame_curvature(c[0], c[1], vol)[0, 1, 0, 1])]
                except DomainError:
                    return [*c, nan]
        else:
            cols = ["l1", "l3", "g_11", "g_13", "g_33", "g_VV"]

            def fn(c):
                try:
                    g = gs.gds_metric(c[0], c[1], vol)
                except DomainError:
                    return [*c, nan, nan, nan, nan]
                return [*c, g[0, 0], g[0, 1], g[1, 1], g[2, 2]]
    elif system == "vdw":
        if quantity == "curvature":
            cols = ["T_reduced", "v_reduced", "curvature", "singular_polynomial"]

            def fn(c):
                poly = float(tg.vdw_singular_polynomial(*c))
                try:
                    return [*c, tg.vdw_intrinsic_curvature(*c), poly]
                except SingularMetric:
                    return [*c, nan, poly]
        else:
            a, b, n, r = (extra.get(k, 1.0) for k in ("a", "b", "n", "R"))
            cols = ["T", "V", "g_TT", "g_VV"]

            def fn(c):
                try:
                    g = tg.vdw_metric(c[0], c[1], a, b, n, r)
                except DomainError:
                    return [*c, nan, nan]
                return [*c, g[0, 0], g[1, 1]]
    else:
        raise DomainError(f"unknown thermo system {system!r}")
    return cols, _rows_parallel(fn, cells)


@main.command()
@click.option("--system", type=click.Choice(["h2", "gds", "vdw"]), required=True)
@click.option("--quantity", type=click.Choice(["curvature", "metric"]), default="curvature", show_default=True)
@click.option("--x-range", nargs=2, type=float, required=True, help="First grid axis: delta, l1, T or reduced T.")
@click.option("--y-range", nargs=2, type=float, required=True, help="Second grid axis: mu, l3, V or reduced v.")
@click.option("--resolution", type=int, default=20, show_default=True)
@click.option("--theta", type=float, default=0.0, show_default=True)
@click.option("--V", "volume", type=float, default=1.0, show_default=True)
@click.option("--a", "a_param", type=float, default=1.0, show_default=True)
@click.option("--b", "b_param", type=float, default=1.0, show_default=True)
@click.option("--n", "n_param", type=float, default=1.0, show_default=True)
@click.option("--R", "r_param", type=float, default=1.0, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv", show_default=True)
def thermo(system, quantity, x_range, y_range, resolution, theta, volume, a_param, b_param, n_param, r_param, out, fmt) -> None:
    """Thermodynamic metric or curvature over a rectangular grid; singular cells are written as nan."""
    if resolution < 1:
        raise click.BadParameter("--resolution must be positive")
    xs, ys = _axis(*x_range, resolution), _axis(*y_range, resolution)
    extra = {"theta": theta, "volume": volume, "a": a_param, "b": b_param, "n": n_param, "R": r_param}
    cols, rows = thermo_rows(system, quantity, xs, ys, extra)
    params = {"system": system, "quantity": quantity, "x_range": list(x_range), "y_range": list(y_range),
              "resolution": resolution, **extra}
    emit(render(params, cols, rows, fmt), out)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
