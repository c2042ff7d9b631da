"""Command-line interface: ``biunitary <command>``.

Exit codes: 0 success, 1 error, 2 verdict table differs from ``--golden``.
"""
from __future__ import annotations

import json
import logging
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import click
import numpy as np

from . import __version__, homs
from . import connection as cx
from .cells import a_spec, cached_cells, catalog, get_spec
from .errors import DomainError, RangeError, SpecError
from .flatness import check_flatness, commutative_partner, locality_from_braiding
from .fusion import brute_force_fusion, build_su2_level, fuse, modular_residuals, verify_axioms
from .induction import induce


class Failure(click.ClickException):
    exit_code = 1


def _emit(doc, out: str | None):
    text = json.dumps(doc, indent=2, sort_keys=True, default=_default)
    if out:
        Path(out).write_text(text + "\n")
    else:
        click.echo(text)


def _default(x):
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(type(x).__name__)


def _spec(graph: str, level: int | None = None):
    try:
        spec = a_spec(int(graph[1:]) - 1) if graph.upper().startswith("A") else get_spec(graph.upper())
    except (ValueError, IndexError):
        raise Failure(f"unknown graph {graph!r}")
    except (SpecError, RangeError) as e:
        raise Failure(str(e))
    if level is not None and level != spec.level:
        raise Failure(f"{spec.name} lives at level {spec.level}, not {level}")
    return spec


@click.group()
@click.version_option(__version__)
@click.option("--zero-tol", default=homs.ZERO_TOL, show_default=True, help="singular values below count as zero")
@click.option("--gap-tol", default=homs.GAP_TOL, show_default=True, help="first nonzero singular value must exceed")
@click.option("-v", "--verbose", is_flag=True)
def main(zero_tol, gap_tol, verbose):
    """Bi-unitary connections, alpha-induction and flatness verdicts."""
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING, format="%(message)s")
    homs.ZERO_TOL, homs.GAP_TOL = zero_tol, gap_tol


@main.command("catalog")
def cmd_catalog():
    """List the Q-system catalog."""
    for s in catalog():
        click.echo(f"{s.name:4s} k={s.level:<3d} theta={list(s.theta)} {s.locality} ({s.locality_source})")


@main.command("fusion-check")
@click.option("--level", "levels", type=int, multiple=True, required=True)
@click.option("-o", "--out")
def cmd_fusion_check(levels, out):
    """Axiom residuals and the fusion-rule oracle for SU(2)_k."""
    rows = []
    for k in levels:
        try:
            cat = build_su2_level(k)
        except (RangeError, DomainError) as e:
            raise Failure(str(e))
        t = time.perf_counter()
        rep = verify_axioms(cat)
        fusion_ok = all(fuse(cat, a, b) == brute_force_fusion(k, a, b) for a in cat.labels for b in cat.labels)
        rows.append({"level": k, **rep.as_dict(), **modular_residuals(cat), "fusion_matches_oracle": fusion_ok,
                     "seconds": round(time.perf_counter() - t, 3)})
    _emit({"schema": "biunitary.fusion-check/1", "levels": rows}, out)


@main.command("cells")
@click.option("--graph", required=True)
@click.option("--level", type=int)
@click.option("--sign", type=click.Choice(["+", "-"]), default="+")
@click.option("-o", "--out")
def cmd_cells(graph, level, sign, out):
    """Fundamental bi-unitary connection on an A-D-E graph (cached)."""
    spec = _spec(graph, level)
    W = cached_cells(spec, 1 if sign == "+" else -1)
    _emit({**cx.to_json(W), "residual": cx.check_biunitarity(W).max()}, out)


@main.command("induce")
@click.option("--graph", required=True)
@click.option("--lambda", "lam", type=int, required=True)
@click.option("--sign", type=click.Choice(["+", "-"]), default="+")
@click.option("-o", "--out")
def cmd_induce(graph, lam, sign, out):
    """alpha-induced connection for one label."""
    spec = _spec(graph)
    try:
        W = induce(spec, lam, 1 if sign == "+" else -1).base
    except RangeError as e:
        raise Failure(str(e))
    _emit({**cx.to_json(W), "residual": cx.check_biunitarity(W).max()}, out)


@main.command("flatness")
@click.option("--graph", required=True)
@click.option("--lambda", "lam", type=int, required=True)
@click.option("--sign", type=click.Choice(["+", "-"]), default="+")
@click.option("--depth", type=int)
@click.option("-o", "--out")
def cmd_flatness(graph, lam, sign, depth, out):
    """Flatness verdict with certificate and dimension tables."""
    spec = _spec(graph)
    try:
        build_su2_level(spec.level).validate(lam)
        v = check_flatness(spec, lam, 1 if sign == "+" else -1, depth)
    except (RangeError, ValueError) as e:
        raise Failure(str(e))
    _emit({"spec": spec.name, "lambda": lam, "sign": sign, **v.to_json()}, out)


@main.command("zmatrix")
@click.option("--graph", required=True)
@click.option("-o", "--out")
def cmd_zmatrix(graph, out):
    """Modular invariant Z from dim Hom(alpha+, alpha-)."""
    _emit(homs.z_matrix(_spec(graph)).to_json(), out)


# report ------------------------------------------------------------------------------

def report_plan() -> list:
    """``(spec, largest lambda)``: every lambda on A, up to 6 on D, E6 and E7, up to 4 on E8."""
    cap = {"A": 99, "D": 6, "E": 6}
    return [(s.name, min(s.level, 4 if s.name == "E8" else cap[s.series])) for s in catalog()]


def _spec_rows(task):
    name, lam_max = task
    spec = _spec(name)
    loc, source = locality_from_braiding(spec)
    tp = list(homs.theta_plus(spec))
    target = commutative_partner(spec).name
    rows = []
    for lam in range(1, lam_max + 1):
        for sign in (1, -1):
            v = check_flatness(spec, lam, sign)
            cert = None
            if v.verdict == "nonflat":
                cert = {k: v.certificate[k] for k in ("j", "parity", "lhs", "rhs")}
            rows.append({"spec": name, "lambda": lam, "sign": "+" if sign > 0 else "-", "verdict": v.verdict,
                         "certificate": cert, "depth": v.depth, "locality": loc, "locality_source": source,
                         "z_row0": tp, "flat_part_target": target})
    Z = homs.z_matrix(spec)
    resid = {"spec": name, "biunitarity": cx.check_biunitarity(cached_cells(spec)).max(),
             "z_zero_residual": Z.zero_residual, "z_min_gap": Z.min_gap,
             "commute_S": Z.commute_S, "commute_T": Z.commute_T}
    return rows, resid


def canonical(rows: list) -> list:
    return sorted(rows, key=lambda r: (r["spec"], r["lambda"], r["sign"]))


def build_report(jobs: int = 1) -> dict:
    plan = report_plan()
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            results = list(pool.map(_spec_rows, plan))
    else:
        results = [_spec_rows(t) for t in plan]
    rows = [r for rs, _ in results for r in rs]
    return {"schema": "biunitary.report/1", "version": __version__, "specs": [p[0] for p in plan],
            "verdicts": canonical(rows), "residuals": [res for _, res in results]}


def golden_path() -> Path:
    return Path(__file__).parent / "data" / "golden_verdicts.json"


@main.command("report")
@click.option("--all", "all_", is_flag=True, required=True, help="run the full catalog")
@click.option("--golden", type=click.Path(), help="expected verdict table; mismatch exits with 2")
@click.option("--jobs", type=int, default=1, show_default=True)
@click.option("-o", "--out")
def cmd_report(all_, golden, jobs, out):
    """Verdict table over the whole catalog."""
    t = time.perf_counter()
    doc = build_report(jobs)
    doc["seconds"] = round(time.perf_counter() - t, 1)
    _emit(doc, out)
    if golden:
        path = golden_path() if golden == "builtin" else Path(golden)
        expected = canonical(json.loads(path.read_text())["verdicts"])
        if json.dumps(expected, sort_keys=True) != json.dumps(doc["verdicts"], sort_keys=True):
            click.echo("verdict table differs from the golden file", err=True)
            sys.exit(2)
        click.echo("verdict table matches the golden file", err=True)


if __name__ == "__main__":
    main()
