#!/usr/bin/env python3
"""
Quasicomplex Workbench
======================
Batch front-end for Fredholm complexes and quasicomplexes: analyze,
reduce, perturb, symbol-check and build fixtures. Every command writes
exactly one JSON document to stdout; logs and summaries go to stderr.

Usage:
    python main.py mesh-derham data/meshes/tetrahedron.off | python main.py analyze -
    python main.py perturb tetra.json --eps 1e-3 --seed 7 | python main.py reduce - --out reduced.json
    python main.py symbol --generator koszul --dim 3 --samples 100 --seed 1
    python main.py lefschetz tetra.json rotation.json

Exit codes: 0 success, 2 input error, 3 certificate failure.
"""

from pathlib import Path
from typing import Any, Callable, Dict, Optional, Tuple
import json
import logging

import click
from rich.console import Console
from rich.logging import RichHandler

from config.settings import get_settings, set_settings
from src import __version__
from src.analysis.analyzer import ComplexAnalyzer
from src.analysis.cohomology import endomorphism, lefschetz
from src.analysis.reduction import reduce as reduce_complex
from src.analysis.symbolcx import SymbolComplexSample, sample_sweep
from src.builders.derham import derham_complex
from src.builders.koszul import koszul_sampler
from src.builders.meshes import load_mesh, torus_grid
from src.builders.perturb import PerturbationSpec, perturb as perturb_complex
from src.core.quasicomplex import QuasiComplex, validate
from src.errors import CertificateFailure, ParseError, QuasiComplexError
from src.reports.report import Report, digest_bytes, print_summary, write_json
from src.utils.formatting import decode_matrix
from src.utils.timing import Timings

console = Console(stderr=True)
logger = logging.getLogger("qcx")

EXIT_INPUT_ERROR = 2
EXIT_CERTIFICATE = 3


# =========================================================================
# PLUMBING
# =========================================================================

def _setup_logging(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(message)s",
        handlers=[RichHandler(console=Console(stderr=True), show_path=False)],
        force=True,
    )


def _read_input(path: str) -> Tuple[bytes, str]:
    """Read a file (``-`` for stdin); returns the bytes and their digest."""
    if path == "-":
        data = click.get_binary_stream("stdin").read()
    else:
        data = Path(path).read_bytes()
    return data, digest_bytes(data)


def _load_json(data: bytes, path: str) -> Any:
    try:
        return json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise ParseError(f"{path}: not a JSON document ({e})") from e


def _complex_document(doc: Any, path: str) -> Dict[str, Any]:
    """Accept a bare complex object or a report that carries one under ``complex``."""
    if isinstance(doc, dict) and "spaces" in doc:
        return doc
    if isinstance(doc, dict) and isinstance(doc.get("complex"), dict):
        return doc["complex"]
    raise ParseError(f"{path}: no quasicomplex object found")


def _load_complex(path: str, report: Report) -> QuasiComplex:
    data, digest = _read_input(path)
    report.input_digests[path] = digest
    return QuasiComplex.from_dict(_complex_document(_load_json(data, path), path))


def _fail(error: Exception, code: int) -> None:
    click.echo(json.dumps({"error": type(error).__name__, "message": str(error)}), err=True)
    raise SystemExit(code)


def _run(ctx: click.Context, command: Callable[[Report, Timings], Optional[int]], name: str) -> None:
    """Run a command body, emit its report, and map errors to exit codes."""
    report = Report(command=name)
    timings = Timings()
    try:
        with timings.measure("total"):
            code = command(report, timings) or 0
        report.timings_ms = timings.as_dict()
        text = report.to_json()
    except CertificateFailure as e:
        _fail(e, EXIT_CERTIFICATE)
    except (QuasiComplexError, OSError, ValueError) as e:
        _fail(e, EXIT_INPUT_ERROR)

    click.echo(text)
    out = ctx.obj.get("out")
    if out:
        report.save_json(out)
    print_summary(report, console)
    if code:
        raise SystemExit(code)


# =========================================================================
# CLI
# =========================================================================

@click.group()
@click.version_option(version=__version__)
@click.option('--rank-tol', type=float, help='Relative rank tolerance (default 1e-10)')
@click.option('--tol', type=float, help='Certificate threshold (default 1e-10)')
@click.option('--seed', type=int, help='Seed for randomized steps (default 0)')
@click.option('--format', 'fmt', default='json', type=click.Choice(['json']), help='Report format')
@click.option('--out', type=click.Path(dir_okay=False), help='Also save the report to this path')
@click.option('--verbose', '-v', is_flag=True, help='Debug logging on stderr')
@click.pass_context
def cli(ctx, rank_tol, tol, seed, fmt, out, verbose):
    """
    Quasicomplex Workbench

    Hodge theory, reduction and ellipticity checks for finite-dimensional
    Fredholm complexes and their perturbations.
    """
    _setup_logging(verbose)
    set_settings(None)
    set_settings(get_settings().with_overrides(rank_tol=rank_tol, reduction_tol=tol, default_seed=seed))
    ctx.ensure_object(dict)
    ctx.obj["out"] = out


@cli.command()
@click.argument('complex_file')
@click.option('--trials', default=1, show_default=True, help='Euler characteristic trials for quasicomplexes')
@click.option('--route', default='rank_nullity', type=click.Choice(['rank_nullity', 'harmonic']))
@click.pass_context
def analyze(ctx, complex_file: str, trials: int, route: str):
    """
    Curvature, Betti numbers and Euler characteristic of a complex file.

    Complexes get Betti numbers and Hodge residuals; quasicomplexes get a
    curvature report and the Euler characteristic of a reduced complex.
    """
    def body(report: Report, timings: Timings) -> None:
        with timings.measure("load"):
            qc = _load_complex(complex_file, report)
        with timings.measure("analyze"):
            analysis = ComplexAnalyzer(route=route, trials=trials).analyze(qc)
        report.seeds = analysis.seeds
        report.payload.update(analysis.to_dict())

    _run(ctx, body, "analyze")


@cli.command()
@click.argument('complex_file')
@click.option('--tol', type=float, help='Certificate threshold (overrides the global --tol)')
@click.option('--out', type=click.Path(dir_okay=False), help='Write the reduced complex here')
@click.pass_context
def reduce(ctx, complex_file: str, tol: Optional[float], out: Optional[str]):
    """Reduce a quasicomplex to a nearby complex (exit 3 when uncertified)."""
    def body(report: Report, timings: Timings) -> int:
        with timings.measure("load"):
            qc = _load_complex(complex_file, report)
        with timings.measure("reduce"):
            result = reduce_complex(qc, reduction_tol=tol)
        report.payload.update({**result.certificate(), "complex": result.reduced.to_dict()})
        if out:
            write_json(result.reduced.to_dict(), out)
        if not result.certified:
            logger.warning("Reduction is not certified")
            return EXIT_CERTIFICATE
        return 0

    _run(ctx, body, "reduce")


@cli.command()
@click.argument('complex_file')
@click.option('--eps', required=True, type=float, help='Operator norm of each perturbation')
@click.option('--rank-limit', type=int, help='Rank limit of each perturbation')
@click.option('--seed', type=int, help='Perturbation seed (defaults to the global seed)')
@click.option('--out', type=click.Path(dir_okay=False), help='Write the perturbed complex here')
@click.pass_context
def perturb(ctx, complex_file: str, eps: float, rank_limit: Optional[int], seed: Optional[int], out: Optional[str]):
    """Perturb every differential by a seeded operator of norm EPS."""
    def body(report: Report, timings: Timings) -> None:
        with timings.measure("load"):
            qc = _load_complex(complex_file, report)
        spec = PerturbationSpec(
            eps=eps,
            seed=get_settings().default_seed if seed is None else seed,
            rank_limit=rank_limit,
        )
        with timings.measure("perturb"):
            perturbed = perturb_complex(qc, spec)
            curvature = validate(perturbed)
        report.seeds = [spec.seed]
        report.payload.update({
            "perturbation": spec.to_dict(),
            **curvature.to_dict(),
            "complex": perturbed.to_dict(),
        })
        if out:
            write_json(perturbed.to_dict(), out)

    _run(ctx, body, "perturb")


@cli.command()
@click.argument('check_file', required=False)
@click.option('--generator', type=click.Choice(['koszul']), help='Built-in sample generator')
@click.option('--dim', default=3, show_default=True, help='Base dimension for the generator')
@click.option('--samples', default=100, show_default=True, help='Number of generated samples')
@click.option('--seed', type=int, help='Sample seed (defaults to the global seed)')
@click.pass_context
def symbol(ctx, check_file: Optional[str], generator: Optional[str], dim: int, samples: int, seed: Optional[int]):
    """
    Ellipticity check of symbol complexes.

    Samples come from CHECK_FILE (``{"samples": [...]}``), from a built-in
    generator, or both.
    """
    def body(report: Report, timings: Timings) -> None:
        extra = []
        if check_file:
            data, digest = _read_input(check_file)
            report.input_digests[check_file] = digest
            doc = _load_json(data, check_file)
            items = doc.get("samples") if isinstance(doc, dict) else doc
            if not isinstance(items, list):
                raise ParseError(f"{check_file}: expected a list of samples")
            extra = [SymbolComplexSample.from_dict(item) for item in items]

        sweep_seed = get_settings().default_seed if seed is None else seed
        sampler = koszul_sampler(dim) if generator == "koszul" else None
        with timings.measure("sweep"):
            result = sample_sweep(sampler, samples if sampler else 0, sweep_seed, extra)
        if sampler:
            report.seeds = [sweep_seed]
        report.payload.update({**result.to_dict(), "generator": generator, "samples": result.table})

    _run(ctx, body, "symbol")


@cli.command('mesh-derham')
@click.argument('mesh_file', required=False)
@click.option('--torus-grid', 'grid', type=int, help='Use the built-in n x n torus instead of a file')
@click.option('--out', type=click.Path(dir_okay=False), help='Write the complex here')
@click.pass_context
def mesh_derham(ctx, mesh_file: Optional[str], grid: Optional[int], out: Optional[str]):
    """Simplicial cochain complex of a closed oriented triangulated surface."""
    def body(report: Report, timings: Timings) -> None:
        with timings.measure("mesh"):
            if grid is not None:
                mesh = torus_grid(grid)
            elif mesh_file:
                data, digest = _read_input(mesh_file)
                report.input_digests[mesh_file] = digest
                fmt = "JSON" if mesh_file.lower().endswith(".json") else "OFF"
                mesh = load_mesh(data, format=fmt)
            else:
                raise ParseError("Give a mesh file or --torus-grid N")
        with timings.measure("derham"):
            qc = derham_complex(mesh)
        report.payload.update({
            "mesh": mesh.to_dict(),
            "dims": qc.dims,
            "chi": qc.euler_count,
            "complex": qc.to_dict(),
        })
        if out:
            write_json(qc.to_dict(), out)

    _run(ctx, body, "mesh-derham")


@cli.command('lefschetz')
@click.argument('complex_file')
@click.argument('endo_file')
@click.pass_context
def lefschetz_command(ctx, complex_file: str, endo_file: str):
    """Lefschetz number of an endomorphism (``{"maps": [...]}``) of a complex."""
    def body(report: Report, timings: Timings) -> None:
        with timings.measure("load"):
            qc = _load_complex(complex_file, report)
            data, digest = _read_input(endo_file)
            report.input_digests[endo_file] = digest
            doc = _load_json(data, endo_file)
            if not isinstance(doc, dict) or not isinstance(doc.get("maps"), list):
                raise ParseError(f"{endo_file}: expected an object with a 'maps' list")
            e = endomorphism(qc, [decode_matrix(m) for m in doc["maps"]])
        with timings.measure("lefschetz"):
            result = lefschetz(qc, e)
        report.payload.update({**result.to_dict(), "commute_defect": list(e.commute_defect)})

    _run(ctx, body, "lefschetz")


if __name__ == '__main__':
    cli()
