"""Command line interface for curvature reports, uniformization and family scans"""

from contextlib import contextmanager
from enum import IntEnum
from pathlib import Path
from typing import Iterable, List, Optional, Tuple

import numpy as np
import typer
from pydantic import ValidationError
from rich.console import Console
from rich.markup import escape
from rich.table import Table

from .config import RunConfig
from .conformal import CurvatureReport, FlipLimitError, NotDelaunayError, curvature_report
from .context import RunContext
from .energy import AreaUnderflowError
from .families import FamilyConfig, FamilyKind, family_member, family_mismatch
from .geometry import DegenerateTriangleError
from .logging import setup_logging
from .solver import DivergenceError, Gauge, LineSearchError, ScanError, find_roots, scan_objective, uniformize
from .surface import FlipError
from .surface_file import (
    ObjImportError,
    SurfaceFileError,
    atomic_write_text,
    atomic_write_texts,
    import_obj,
    non_delaunay_edges,
    read_surface_file,
    serialize_surface_file,
    write_surface_file,
)

app = typer.Typer(help="Discrete Gaussian curvature and constant-curvature uniformization of PL surfaces")
console = Console()
err_console = Console(stderr=True)


class ExitCode(IntEnum):
    OK = 0
    USAGE = 2
    INVALID_METRIC = 3
    NOT_CONVERGED = 4
    DIVERGED = 5


def _fail(message: str, code: ExitCode):
    err_console.print(f'[red]{escape(message)}[/red]')
    raise typer.Exit(int(code))


@contextmanager
def _exit_codes():
    """Map library exceptions onto the documented exit codes."""
    try:
        yield
    except SurfaceFileError as e:
        _fail(f'Parse error: {e}', ExitCode.USAGE)
    except ObjImportError as e:
        _fail(f'Import error: {e}', ExitCode.USAGE)
    except ValidationError as e:
        _fail(f'Invalid parameters: {e}', ExitCode.USAGE)
    except DegenerateTriangleError as e:
        _fail(f'Invalid metric: {e}', ExitCode.INVALID_METRIC)
    except (NotDelaunayError, FlipLimitError, FlipError, AreaUnderflowError, ScanError) as e:
        _fail(f'Invalid metric: {e}', ExitCode.INVALID_METRIC)
    except LineSearchError as e:
        _fail(f'Not converged: {e}', ExitCode.NOT_CONVERGED)
    except DivergenceError as e:
        _fail(f'Diverged: {e}', ExitCode.DIVERGED)
    except OSError as e:
        _fail(f'I/O error: {e}', ExitCode.USAGE)


def fmt(x: float) -> str:
    """12 significant digits, no negative zero"""
    x = float(x)
    return f'{0.0 if x == 0 else x:.12g}'


def fmt_root(x: float) -> str:
    x = float(x)
    return f'{0.0 if x == 0 else x:.12f}'


def format_report(report: CurvatureReport) -> str:
    lines = [f'{i} {fmt(w)} {fmt(a)} {fmt(k)}' for i, (w, a, k) in enumerate(zip(report.W, report.A, report.K))]
    lines += [
        f'A_tot {fmt(report.total_area)}',
        f'chi {report.chi}',
        f'sum_W {fmt(report.sum_W)}',
        f'flips_performed {report.flips}',
    ]
    return '\n'.join(lines) + '\n'


def format_scan(rows: List[Tuple[float, float]]) -> str:
    """Rows "v D(v)"; the two interval ends, where one edge is Delaunay-degenerate, carry a comment."""
    last = len(rows) - 1
    return ''.join(
        f'{fmt(v)} {fmt(d)}' + ('  # boundary' if i in (0, last) else '') + '\n'
        for i, (v, d) in enumerate(rows)
    )


def format_vector(values: Iterable[float]) -> str:
    return ''.join(f'{i} {fmt(x)}\n' for i, x in enumerate(values))


def read_vector(path: Path, n: int) -> np.ndarray:
    """Rows "id value" covering every vertex exactly once."""
    values = np.full(n, np.nan)
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        tokens = raw.split('#', 1)[0].split()
        if not tokens:
            continue
        try:
            idx, value = int(tokens[0]), float(tokens[1])
        except (ValueError, IndexError):
            raise SurfaceFileError(f'{path}: expected "id value"', lineno) from None
        if len(tokens) != 2 or not 0 <= idx < n or not np.isnan(values[idx]) or not np.isfinite(value):
            raise SurfaceFileError(f'{path}: bad or repeated entry for vertex {idx}', lineno)
        values[idx] = value
    if np.any(np.isnan(values)):
        raise SurfaceFileError(f'{path}: no value for vertex {int(np.flatnonzero(np.isnan(values))[0])}')
    return values


def _tag_run(**fields):
    """Record command inputs on the active RunContext so structured logs carry them."""
    run = RunContext.get_current()
    for key, value in fields.items():
        run.set_metadata(key, str(value))


def _emit(text: str, out: Optional[Path]):
    if out is None:
        typer.echo(text, nl=False)
    else:
        atomic_write_text(out, text)


def _family_config(b0: Optional[float], c0: Optional[float], cfg: RunConfig) -> FamilyConfig:
    b0 = cfg.b0 if b0 is None else b0
    c0 = cfg.c0 if c0 is None else c0
    if b0 is None or c0 is None:
        _fail('Both --b0 and --c0 are required', ExitCode.USAGE)
    return FamilyConfig(b0=b0, c0=c0)


@app.callback()
def main(
    ctx: typer.Context,
    config: Optional[Path] = typer.Option(None, '--config', '-c', help='JSON config file'),
    log_level: Optional[str] = typer.Option(None, '--log-level', help='DEBUG, INFO, WARNING, ERROR'),
    structured_logs: Optional[bool] = typer.Option(None, '--structured-logs/--plain-logs', help='JSON log records on stderr'),
):
    """Load configuration and set up logging for every command"""
    try:
        cfg = RunConfig.load(config).merged(log_level=log_level, structured_logs=structured_logs)
    except (ValidationError, ValueError, FileNotFoundError) as e:
        _fail(f'Error loading config: {e}', ExitCode.USAGE)
    setup_logging('plcurv', cfg.log_level, cfg.structured_logs)
    ctx.obj = cfg
    ctx.with_resource(RunContext(metadata={'command': ctx.invoked_subcommand}))


@app.command()
def curvature(
    ctx: typer.Context,
    input: Path = typer.Argument(..., help='Surface file'),
    out: Optional[Path] = typer.Option(None, '--out', '-o', help='Report file (stdout if omitted)'),
):
    """Discrete Gaussian curvature K = W / A per vertex"""
    with _exit_codes():
        _tag_run(input=input)
        sf = read_surface_file(input)
        report = curvature_report(sf.surface, sf.metric)
        _emit(format_report(report), out)


@app.command('uniformize')
def uniformize_cmd(
    ctx: typer.Context,
    input: Path = typer.Argument(..., help='Surface file'),
    tol: Optional[float] = typer.Option(None, '--tol', help='Gradient tolerance'),
    max_iter: Optional[int] = typer.Option(None, '--max-iter', help='Iteration limit'),
    gauge: Optional[Gauge] = typer.Option(None, '--gauge', help='sum-zero or pin'),
    init: Optional[Path] = typer.Option(None, '--init', help='Initial conformal factor ("id u" rows)'),
    out_prefix: Optional[Path] = typer.Option(None, '--out-prefix', help='Writes <prefix>.u and <prefix>.report'),
):
    """Conformally equivalent metric of constant discrete Gaussian curvature"""
    with _exit_codes():
        cfg: RunConfig = ctx.obj.merged(tol=tol, max_iter=max_iter, gauge=gauge, init=init, out_prefix=out_prefix)
        _tag_run(input=input)
        sf = read_surface_file(input)
        start = read_vector(cfg.init, sf.surface.n_vertices) if cfg.init else None
        result = uniformize(sf.surface, sf.metric, cfg.solver_options(start))

        typer.echo(f'iterations {result.iterations}')
        typer.echo(f'grad_norm {fmt(result.grad_norm)}')
        if not result.converged:
            _fail(f'Not converged after {result.iterations} iterations '
                  f'(gradient norm {result.grad_norm:.3g})', ExitCode.NOT_CONVERGED)

        prefix = cfg.out_prefix or Path(input).with_suffix('')
        atomic_write_texts({
            Path(f'{prefix}.u'): format_vector(result.u_star),
            Path(f'{prefix}.report'): format_report(result.report),
        })


@app.command()
def scan(
    ctx: typer.Context,
    family: FamilyKind = typer.Option(..., '--family', help='tet or genus2'),
    b0: Optional[float] = typer.Option(None, '--b0'),
    c0: Optional[float] = typer.Option(None, '--c0'),
    samples: Optional[int] = typer.Option(None, '--samples', help='Grid size over the admissible interval'),
    workers: Optional[int] = typer.Option(None, '--workers', help='Concurrent evaluations'),
    out: Optional[Path] = typer.Option(None, '--out', '-o'),
):
    """Curvature mismatch D(v) over the admissible interval, rows "v D(v)", ends marked "# boundary\""""
    with _exit_codes():
        cfg: RunConfig = ctx.obj.merged(samples=samples, workers=workers)
        fam = _family_config(b0, c0, cfg)
        _tag_run(family=family.value, b0=fam.b0, c0=fam.c0)
        rows = scan_objective(
            lambda v: family_mismatch(family, fam.with_v(v)), fam.interval, cfg.samples, cfg.workers
        )
        _emit(format_scan(rows), out)


@app.command()
def roots(
    ctx: typer.Context,
    family: FamilyKind = typer.Option(..., '--family', help='tet or genus2'),
    b0: Optional[float] = typer.Option(None, '--b0'),
    c0: Optional[float] = typer.Option(None, '--c0'),
    samples: Optional[int] = typer.Option(None, '--samples'),
    root_tol: Optional[float] = typer.Option(None, '--root-tol'),
    workers: Optional[int] = typer.Option(None, '--workers'),
    out: Optional[Path] = typer.Option(None, '--out', '-o'),
):
    """Parameters v of constant-curvature members, one per line"""
    with _exit_codes():
        cfg: RunConfig = ctx.obj.merged(samples=samples, root_tol=root_tol, workers=workers)
        fam = _family_config(b0, c0, cfg)
        _tag_run(family=family.value, b0=fam.b0, c0=fam.c0)
        found: List[float] = find_roots(
            lambda v: family_mismatch(family, fam.with_v(v)), fam.interval, cfg.samples,
            cfg.root_tol, cfg.workers,
        )
        _emit(''.join(f'{fmt_root(v)}\n' for v in found), out)


@app.command('import-obj')
def import_obj_cmd(
    input: Path = typer.Argument(..., help='Wavefront .obj file'),
    out: Path = typer.Argument(..., help='Surface file to write'),
):
    """Convert a closed triangulated wavefront mesh to a surface file"""
    with _exit_codes():
        _tag_run(input=input)
        sf = import_obj(input)
        flagged = non_delaunay_edges(sf)
        if flagged:
            err_console.print(
                f'[yellow]{len(flagged)} non-Delaunay edges (flipped automatically later): '
                f'{escape(str(flagged))}[/yellow]'
            )
        write_surface_file(out, sf)


@app.command('family')
def family_cmd(
    family: FamilyKind = typer.Option(..., '--family', help='tet or genus2'),
    b0: float = typer.Option(..., '--b0'),
    c0: float = typer.Option(..., '--c0'),
    v: float = typer.Option(0.0, '--v', help='Member parameter'),
    out: Optional[Path] = typer.Option(None, '--out', '-o'),
):
    """Write one family member as a surface file"""
    with _exit_codes():
        member = family_member(family, FamilyConfig(b0=b0, c0=c0, v=v))
        _emit(serialize_surface_file(member.surface, member.metric), out)


@app.command()
def info(ctx: typer.Context):
    """Show the effective configuration"""
    cfg: RunConfig = ctx.obj
    table = Table(title="plcurv configuration")
    table.add_column("Setting", style="cyan", no_wrap=True)
    table.add_column("Value", style="green")
    for name, value in cfg.model_dump().items():
        table.add_row(name, '-' if value is None else str(getattr(value, 'value', value)))
    console.print(table)


if __name__ == '__main__':
    app()
