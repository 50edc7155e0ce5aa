# This file is part of hamds3.
# hamds3 finds Hamilton cycles in sparse random graphs of minimum degree three with 2GREEDY and extension-rotation.
# Copyright (C) 2025  the hamds3 authors
#
# hamds3 is free software: you can redistribute it and/or modify
# it under the terms of the GNU Affero General Public License as published by
# the Free Software Foundation, either version 3 of the License, or
# (at your option) any later version.
#
# hamds3 is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
# GNU Affero General Public License for more details.
#
# You should have received a copy of the GNU Affero General Public License
# along with this program.  If not, see <https://www.gnu.org/licenses/>.

import json
import logging
import sys
from contextlib import contextmanager
from pathlib import Path
from typing import Optional

import typer

from hamds3.bench import CSV_HEADER, BenchRow, run_bench
from hamds3.config import RunConfig
from hamds3.diagnostics import CHECKS, DiagnosticsContext, run_checks
from hamds3.errors import (
    InputError,
    InvariantViolation,
    NonConvergence,
    ResampleLimitExceeded,
    UnknownCheck,
    VerificationError,
)
from hamds3.graph_model import Graph, Rng, Stream, sample_graph
from hamds3.pipeline import run_pipeline
from hamds3.verify import oracle_hamiltonian

logger = logging.getLogger(__name__)

EXIT_VIOLATION = 2
EXIT_INPUT = 3

app = typer.Typer(
    help="Find Hamilton cycles in sparse random graphs with minimum degree 3: 2GREEDY followed by extension-rotation."
)


@app.callback()
def main(verbose: bool = typer.Option(False, "--verbose", "-v", help="Log at debug level")):
    logging.basicConfig(level=logging.DEBUG if verbose else logging.INFO)


@contextmanager
def exit_codes():
    """Map input errors to exit code 3 and invariant violations to exit code 2."""
    try:
        yield
    except (InputError, ResampleLimitExceeded, NonConvergence, OSError) as e:
        typer.echo(f"Input error: {e}", err=True)
        raise typer.Exit(EXIT_INPUT)
    except InvariantViolation as e:
        typer.echo(f"Invariant violation: {e}", err=True)
        raise typer.Exit(EXIT_VIOLATION)


def load_config(
    config: Optional[Path],
    nu: Optional[int],
    nu_exponent: Optional[float],
    retries: Optional[int],
    alpha: Optional[float],
    k_const: Optional[float],
    use_l0_cases: Optional[bool],
    debug: Optional[bool],
    restricted_closing: Optional[bool],
) -> RunConfig:
    """Defaults, then the YAML file, then the flags that were given."""
    cfg = RunConfig.from_yaml(config) if config else RunConfig()
    return cfg.with_params(
        nu=nu,
        nu_exponent=nu_exponent,
        retries=retries,
        alpha=alpha,
        K=k_const,
        use_l0_cases=use_l0_cases,
        debug=debug,
        restricted_closing=restricted_closing,
    )


def load_graph(graph: Optional[Path], n: Optional[int], c: float, seed: int, cfg: RunConfig) -> Graph:
    if graph is not None:
        return Graph.read(graph)
    if n is None:
        raise InputError("Give either --graph or --n")
    return sample_graph(n, c, Rng(seed, Stream.GRAPH), resample_cap=cfg.resample_cap)


ConfigOpt = typer.Option(None, "--config", help="YAML file with RunConfig fields")
NuOpt = typer.Option(None, "--nu", help="Endpoint budget of a rotation search, overrides --nu-exponent")
NuExpOpt = typer.Option(None, "--nu-exponent", help="nu = ceil(n^x), defaults to 0.55")
RetriesOpt = typer.Option(None, "--retries", help="Retries after a failed closing search, defaults to 3")
AlphaOpt = typer.Option(None, "--alpha", help="Edges past (1-alpha)m are tardy, defaults to 0.1")
KOpt = typer.Option(None, "--K", help="Constant K in eps = K (log log n)^2 / log n, defaults to 1")
L0Opt = typer.Option(None, "--use-l0-cases/--no-use-l0-cases", help="Lighter dedup while trees are below L0")
DebugOpt = typer.Option(None, "--debug/--no-debug", help="Check buckets and sampled tree paths")
RestrictedOpt = typer.Option(
    None, "--restricted-closing/--no-restricted-closing", help="Close cycles with tardy R0:Lambda0 edges only"
)


@app.command()
def gen(
    n: int = typer.Option(..., "--n", help="Number of vertices"),
    c: float = typer.Option(..., "--c", help="Edge density, m = round(c n)"),
    seed: int = typer.Option(0, "--seed", help="Random seed"),
    out: Optional[Path] = typer.Option(None, "--out", help="Output file, defaults to stdout"),
):
    """
    Sample G_{n,m} with minimum degree 3 and write it in graph file format.
    """
    with exit_codes():
        graph = sample_graph(n, c, Rng(seed, Stream.GRAPH))
        if out is None:
            sys.stdout.write(graph.to_text())
        else:
            graph.write(out)
            typer.echo(f"Wrote n={graph.n}, m={graph.m} to {out}", err=True)


@app.command()
def run(
    graph: Optional[Path] = typer.Option(None, "--graph", help="Graph file; otherwise sample with --n/--c/--seed"),
    n: Optional[int] = typer.Option(None, "--n", help="Number of vertices to sample"),
    c: float = typer.Option(20.0, "--c", help="Edge density of the sampled graph"),
    seed: int = typer.Option(0, "--seed", help="Random seed for sampling and the algorithm"),
    trace: Optional[Path] = typer.Option(None, "--trace", help="Write the 2GREEDY step trace here"),
    fmt: str = typer.Option("json", "--format", help="json or csv"),
    diagnostics: bool = typer.Option(False, "--diagnostics", help="Attach a diagnostics summary"),
    config: Optional[Path] = ConfigOpt,
    nu: Optional[int] = NuOpt,
    nu_exponent: Optional[float] = NuExpOpt,
    retries: Optional[int] = RetriesOpt,
    alpha: Optional[float] = AlphaOpt,
    k_const: Optional[float] = KOpt,
    use_l0_cases: Optional[bool] = L0Opt,
    debug: Optional[bool] = DebugOpt,
    restricted_closing: Optional[bool] = RestrictedOpt,
):
    """
    Run the full pipeline on one graph and print the RunReport.
    Exit code 0 also covers an extend-rotate failure; 2 means a verification failure.
    """
    with exit_codes():
        if fmt not in ("json", "csv"):
            raise InputError(f"Unknown format {fmt}")
        cfg = load_config(config, nu, nu_exponent, retries, alpha, k_const, use_l0_cases, debug, restricted_closing)
        g = load_graph(graph, n, c, seed, cfg)
        report = run_pipeline(g, cfg, seed=seed, diagnostics=diagnostics, trace_out=trace)
        if fmt == "json":
            typer.echo(report.to_json())
        else:
            typer.echo(CSV_HEADER)
            typer.echo(BenchRow.from_report(report).to_csv())


@app.command()
def bench(
    n: list[int] = typer.Option(..., "--n", help="Graph sizes, repeat the flag for several"),
    c: float = typer.Option(20.0, "--c", help="Edge density"),
    seeds: int = typer.Option(20, "--seeds", help="Number of seeds per size"),
    seed_base: int = typer.Option(0, "--seed-base", help="First seed"),
    out: Optional[Path] = typer.Option(None, "--out", help="CSV file, defaults to stdout"),
    threads: Optional[int] = typer.Option(None, "--threads", help="Worker processes, defaults to HAMDS3_THREADS"),
    warmup: bool = typer.Option(True, "--warmup/--no-warmup", help="Discard one warm-up run"),
    config: Optional[Path] = ConfigOpt,
    nu: Optional[int] = NuOpt,
    nu_exponent: Optional[float] = NuExpOpt,
    retries: Optional[int] = RetriesOpt,
    alpha: Optional[float] = AlphaOpt,
    k_const: Optional[float] = KOpt,
    use_l0_cases: Optional[bool] = L0Opt,
):
    """
    Time the pipeline over sizes and seeds and write the scaling CSV.
    """
    with exit_codes():
        cfg = load_config(config, nu, nu_exponent, retries, alpha, k_const, use_l0_cases, None, None)
        seed_list = list(range(seed_base, seed_base + seeds))
        if out is None:
            run_bench(n, c, seed_list, cfg, sys.stdout, workers=threads, warmup=warmup)
        else:
            with open(out, "w") as f:
                run_bench(n, c, seed_list, cfg, f, workers=threads, warmup=warmup)


@app.command()
def oracle(
    count: int = typer.Option(200, "--count", help="Number of instances"),
    n_min: int = typer.Option(8, "--n-min", help="Smallest n"),
    n_max: int = typer.Option(14, "--n-max", help="Largest n"),
    c: float = typer.Option(2.0, "--c", help="Edge density"),
    seed: int = typer.Option(0, "--seed", help="Base seed"),
):
    """
    Compare pipeline outcomes with the exact Hamiltonicity oracle on small graphs.
    A cycle on a graph the oracle calls non-Hamiltonian is a hard error (exit 2).
    """
    with exit_codes():
        if not 8 <= n_min <= n_max <= 14:
            raise InputError(f"Oracle sizes must lie in [8, 14], got [{n_min}, {n_max}]")
        sizes = Rng(seed, Stream.DIAGNOSTICS).gen.integers(n_min, n_max + 1, size=count)
        cells = {(s, o): 0 for s in (True, False) for o in (True, False)}
        typer.echo("instance,n,success,oracle")
        for i, size in enumerate(sizes.tolist()):
            graph = sample_graph(size, c, Rng(seed + i, Stream.GRAPH))
            report = run_pipeline(graph, RunConfig(), seed=seed + i)
            verdict = oracle_hamiltonian(graph)
            cells[(report.success, verdict)] += 1
            typer.echo(f"{i},{size},{str(report.success).lower()},{str(verdict).lower()}")
        for (s, o), k in cells.items():
            typer.echo(f"# success={str(s).lower()} oracle={str(o).lower()}: {k}")
        if cells[(True, False)]:
            raise VerificationError(f"{cells[(True, False)]} cycles on graphs the oracle calls non-Hamiltonian")


@app.command()
def diagnose(
    checks: str = typer.Option(",".join(CHECKS), "--checks", help=f"Comma-separated checks from {', '.join(CHECKS)}"),
    graph: Optional[Path] = typer.Option(None, "--graph", help="Graph file; otherwise sample with --n/--c/--seed"),
    n: Optional[int] = typer.Option(None, "--n", help="Number of vertices to sample"),
    c: float = typer.Option(20.0, "--c", help="Edge density"),
    seed: int = typer.Option(0, "--seed", help="Random seed"),
    s_max: int = typer.Option(8, "--s-max", help="Largest set size for the dense-set scan"),
    ell0: Optional[int] = typer.Option(None, "--ell0", help="Distance for the near-cycle census, defaults to 2 log log n"),
    config: Optional[Path] = ConfigOpt,
    alpha: Optional[float] = AlphaOpt,
    k_const: Optional[float] = KOpt,
):
    """
    Run diagnostics checks and print them as JSON. A failing check is recorded in the
    report and does not stop the others.
    """
    with exit_codes():
        names = [name.strip() for name in checks.split(",") if name.strip()]
        unknown = [name for name in names if name not in CHECKS]
        if unknown:
            raise UnknownCheck(f"Unknown checks {unknown}; choose from {', '.join(CHECKS)}")
        cfg = load_config(config, None, None, None, alpha, k_const, None, None, None)
        g = load_graph(graph, n, c, seed, cfg)
        density = g.m / g.n
        profiles = None
        if "tree-growth" in names:
            profiles = run_pipeline(g, cfg, seed=seed).profiles
        ctx = DiagnosticsContext(
            graph=g,
            c=density,
            seed=seed,
            greedy=cfg.greedy_config(),
            s_max=s_max,
            ell0=ell0,
            batch_factor=cfg.batch_factor,
            profiles=profiles,
            l0=cfg.l0(g.n, density),
        )
        results = run_checks(ctx, names)
        typer.echo(json.dumps([r.to_dict() for r in results], indent=2, default=str))


if __name__ == "__main__":
    app()
