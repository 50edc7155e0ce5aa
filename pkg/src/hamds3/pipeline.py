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

"""
The end-to-end run: 2GREEDY, Step-3 matching, extend-rotate and verification, timed per
phase and summarised in a RunReport.
"""

import json
import logging
import time
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field
from pathlib import Path

from hamds3.config import RunConfig
from hamds3.diagnostics import ledger_build, tree_growth_stats
from hamds3.errors import VerificationError
from hamds3.extend_rotate import TreeProfile, er_loop
from hamds3.graph_model import Graph, Rng, Stream
from hamds3.matching import ResidualGraph, TwoMatching, augment, fuse, karp_sipser
from hamds3.two_greedy import run_two_greedy
from hamds3.verify import check_hamilton, check_two_matching

logger = logging.getLogger(__name__)


@dataclass
class RunReport:
    seed: int
    n: int
    m: int
    c: float
    success: bool
    cycle_length: int
    components_greedy: int
    components_fused: int
    er3_count: int
    rotations: int
    extensions: int
    retries_used: int
    residual_vertices: int
    exposed_after_greedy_matching: int
    exposed_final: int
    timings_ms: dict[str, float]
    diagnostics: dict | None = None
    failure: dict | None = None
    cycle: list[int] | None = field(default=None, repr=False)
    profiles: list[TreeProfile] = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        payload = asdict(self)
        payload.pop("cycle")
        payload.pop("profiles")
        return payload

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


class PhaseTimer:
    """Monotonic wall time per named phase, in milliseconds."""

    def __init__(self):
        self.timings: dict[str, float] = {}

    @contextmanager
    def __call__(self, name: str):
        start = time.perf_counter()
        try:
            yield
        finally:
            elapsed = (time.perf_counter() - start) * 1000
            self.timings[name] = elapsed
            logger.info(f"Phase {name} took {elapsed:.1f} ms")


def run_pipeline(
    graph: Graph,
    cfg: RunConfig,
    seed: int = 0,
    sample_ms: float = 0.0,
    diagnostics: bool = False,
    trace_out: str | Path | None = None,
) -> RunReport:
    """
    Run every phase on a graph with minimum degree 3. Algorithmic failure of
    extend-rotate is reported; an unverifiable 2-matching or cycle raises
    VerificationError.
    """
    graph.require_min_degree(3)
    n, m = graph.n, graph.m
    c = m / n
    timer = PhaseTimer()
    timer.timings["sample"] = sample_ms

    with timer("2greedy"):
        greedy = run_two_greedy(graph, cfg.greedy_config(), Rng(seed, Stream.COIN))
    if trace_out is not None:
        with open(trace_out, "w") as f:
            greedy.trace.dump(f)

    partial = sorted(greedy.state.matching_pairs())
    components_greedy = len(TwoMatching.from_edges(n, partial).components)

    with timer("matching"):
        residual = ResidualGraph.from_state(greedy.state)
        greedy_matching = karp_sipser(residual)
        mstar = augment(residual, greedy_matching)
        two = fuse(n, partial, mstar)
    report = check_two_matching(graph, two.edges)
    if not report.ok:
        raise VerificationError(f"2-matching is invalid: {report.violations[:5]}")

    er_cfg = cfg.er_config(n, c)
    allowed = None
    if cfg.restricted_closing:
        allowed = set(ledger_build(graph, greedy).tardy_edges)
    with timer("er"):
        outcome = er_loop(graph, two, er_cfg, Rng(seed, Stream.EXTEND), allowed)
    if outcome.success and not check_hamilton(graph, outcome.cycle):
        raise VerificationError(f"extend-rotate returned a cycle that is not Hamiltonian (seed {seed})")

    summary = None
    if diagnostics:
        growth = tree_growth_stats(outcome.profiles, c, n, er_cfg.l0)
        summary = {
            "residual_degree_histogram": residual.degree_histogram(),
            "isolated_unmatched": len(greedy.state.y0),
            "closed_cycles": greedy.state.closed_cycles,
            "regular_vertices": len(greedy.ledger.regular),
            "steps": {k.value: v for k, v in greedy.trace.kind_counts().items()},
            "tree_growth": growth.to_dict(),
        }

    logger.info(
        f"n={n} seed={seed}: success={outcome.success}, {len(two.components)} components, "
        f"{outcome.er3_count} rotation searches"
    )
    return RunReport(
        seed=seed,
        n=n,
        m=m,
        c=c,
        success=outcome.success,
        cycle_length=len(outcome.cycle) if outcome.cycle else 0,
        components_greedy=components_greedy,
        components_fused=len(two.components),
        er3_count=outcome.er3_count,
        rotations=outcome.rotations,
        extensions=outcome.extensions,
        retries_used=outcome.retries_used,
        residual_vertices=len(residual),
        exposed_after_greedy_matching=len(greedy_matching.exposed),
        exposed_final=len(mstar.exposed),
        timings_ms=timer.timings,
        diagnostics=summary,
        failure=outcome.failure.to_dict() if outcome.failure else None,
        cycle=outcome.cycle,
        profiles=outcome.profiles,
    )
