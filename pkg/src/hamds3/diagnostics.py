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
Empirical probes of the quantities the analysis of 2GREEDY and extend-rotate relies on.

All functions are read-only over graphs, traces and results; each `check_*` helper
wraps one probe into a CheckResult for the diagnostics report.
"""

import itertools
import logging
import math
from collections import Counter, deque
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np
from more_itertools import chunked
from scipy.optimize import brentq

from hamds3.errors import ClosureFailure, NoTardyEdge, UnknownCheck
from hamds3.extend_rotate import TreeProfile
from hamds3.graph_model import (
    DegreeModel,
    Graph,
    Rng,
    Stream,
    degree_concentration,
    f_trunc,
    truncated_mean,
)
from hamds3.two_greedy import (
    GreedyConfig,
    StepKind,
    StepTrace,
    TwoGreedyResult,
    run_two_greedy,
)

logger = logging.getLogger(__name__)

# Step-1 edge losses that put a vertex outside Lambda_2 into Lambda_3
LOSS_THRESHOLD = 24
HIGH_DEGREE = 30


@dataclass
class OdeState:
    t: float
    y: float
    z: float
    mu: float
    lam: float = math.nan
    A: float = 0.0
    B: float = 0.0
    C: float = 0.0
    D: float = 0.0
    q: float = 0.0

    @property
    def theta_a(self) -> float:
        return 0.0

    @property
    def theta_b(self) -> float:
        return self.A

    @property
    def theta_c(self) -> float:
        return self.A + self.B

    @property
    def theta_2(self) -> float:
        return 1 - self.theta_a - self.theta_b - self.theta_c

    @property
    def theta_sum(self) -> float:
        return self.theta_a + self.theta_b + self.theta_c + self.theta_2


def closure_lambda(y: float, z: float, mu: float) -> float:
    """
    Solve y lam f2/f3 + z lam f1/f2 = 2 mu: Y-vertices carry Po(lam; >= 3) degrees
    and Z-vertices Po(lam; >= 2).
    """

    def excess(lam: float) -> float:
        total = 0.0
        if y > 0:
            total += y * truncated_mean(lam, 3)
        if z > 0:
            total += z * truncated_mean(lam, 2)
        return total - 2 * mu

    lo, hi = 1e-9, 1.0
    if y < 0 or z < 0 or mu <= 0 or excess(lo) >= 0:
        raise ClosureFailure(f"No lambda closes y={y:.3f}, z={z:.3f}, mu={mu:.3f}")
    while excess(hi) < 0:
        hi *= 2
        if hi > 700:
            raise ClosureFailure(f"lambda above 700 for y={y:.3f}, z={z:.3f}, mu={mu:.3f}")
    return brentq(excess, lo, hi, xtol=1e-13)


def _evaluate(t: float, y: float, z: float, mu: float) -> OdeState:
    lam = closure_lambda(y, z, mu)
    f0, f2, f3 = f_trunc(0, lam), f_trunc(2, lam), f_trunc(3, lam)
    r2 = f0 / f2
    mu2 = mu * mu
    A = y * z * lam**5 * r2 / (8 * mu2 * f3)
    B = z * z * lam**4 * r2 / (4 * mu2 * f2)
    C = y * lam * f2 / (2 * mu * f3)
    D = z * lam**2 * r2 / (2 * mu)
    q = (y * z / (4 * mu2)) * (lam**3 / f3) * (lam**2 * r2) + (z * z / (4 * mu2)) * (lam**4 * r2 / f2)
    return OdeState(t, y, z, mu, lam, A, B, C, D, q)


def _slope(s: OdeState) -> np.ndarray:
    return np.array([s.A + s.B - s.C - 1, 2 * s.C - 2 * s.A - 2 * s.B, -1 - s.D])


def ode_integrate(
    c: float, n: int, horizon: float, dt: float = 1.0, stride: int = 1, strict: bool = True
) -> list[OdeState]:
    """
    Fixed-step RK4 for the (y, z, mu) equations of 2GREEDY from y = n, z = 0, mu = cn,
    re-solving the lambda closure at every stage. With strict=False a closure failure
    ends the trajectory instead of raising.
    """
    u = np.array([float(n), 0.0, c * n])
    t = 0.0
    state = _evaluate(t, *u)
    trajectory = [state]
    steps = int(math.floor(horizon / dt + 1e-9))
    try:
        for i in range(1, steps + 1):
            k1 = _slope(state)
            k2 = _slope(_evaluate(t + dt / 2, *(u + dt / 2 * k1)))
            k3 = _slope(_evaluate(t + dt / 2, *(u + dt / 2 * k2)))
            k4 = _slope(_evaluate(t + dt, *(u + dt * k3)))
            u = u + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            t = i * dt
            state = _evaluate(t, *u)
            if i % stride == 0:
                trajectory.append(state)
    except ClosureFailure as e:
        if strict:
            raise ClosureFailure(f"At t={t}: {e}") from e
        logger.debug(f"ODE stopped at t={t}: {e}")
    return trajectory


def observed_trajectory(trace: StepTrace, stride: int = 1) -> list[OdeState]:
    """The trace's own (y, z, mu) as trajectory points, for comparisons."""
    y, z, mu = trace.series("y"), trace.series("z"), trace.series("mu")
    return [OdeState(t, float(y[t]), float(z[t]), float(mu[t])) for t in range(0, len(y), stride)]


@dataclass
class TrajectoryComparison:
    ts: list[float]
    distances: list[float]

    @property
    def max_distance(self) -> float:
        return max(self.distances, default=0.0)


def compare_trajectory(trace: StepTrace, trajectory: list[OdeState]) -> TrajectoryComparison:
    """L1 distance between observed and predicted (y, z, mu) at the trajectory's times."""
    y, z, mu = trace.series("y"), trace.series("z"), trace.series("mu")
    ts, dists = [], []
    for s in trajectory:
        t = int(round(s.t))
        if t >= len(y):
            break
        ts.append(s.t)
        dists.append(abs(y[t] - s.y) + abs(z[t] - s.z) + abs(mu[t] - s.mu))
    return TrajectoryComparison(ts, dists)


def x1_ratio(trace: StepTrace, n: int, exponent: float = 0.8) -> float:
    """z(t) / 2t at t = n^exponent (or the last step, if 2GREEDY stopped earlier)."""
    t = min(math.floor(n**exponent), len(trace))
    if t == 0:
        return math.nan
    return float(trace.series("z")[t]) / (2 * t)


def step1_count(trace: StepTrace, horizon: float) -> int:
    return sum(1 for r in trace.records if r.t <= horizon and r.kind is not StepKind.STEP_2)


def step_mix(trace: StepTrace, trajectory: list[OdeState], window: int) -> list[dict]:
    """Observed fractions of Step 1b, 1c and 2 per window next to the predicted thetas."""
    times = np.array([s.t for s in trajectory])
    rows = []
    for chunk in chunked(trace.records, window):
        if len(chunk) < window:
            break
        start = chunk[0].t - 1
        at = int(np.searchsorted(times, start, side="right")) - 1
        predicted = trajectory[at] if at >= 0 else None
        if predicted is None or math.isnan(predicted.lam) or start - predicted.t > window:
            continue
        kinds = Counter(r.kind for r in chunk)
        rows.append(
            {
                "t": start,
                "delta_b": kinds[StepKind.STEP_1B] / window,
                "delta_c": kinds[StepKind.STEP_1C] / window,
                "delta_2": kinds[StepKind.STEP_2] / window,
                "theta_b": predicted.theta_b,
                "theta_c": predicted.theta_c,
                "theta_2": predicted.theta_2,
            }
        )
    return rows


@dataclass
class BatchStats:
    spans: list[int] = field(default_factory=list)
    vertex_counts: list[int] = field(default_factory=list)
    edge_counts: list[int] = field(default_factory=list)
    long_batches: int = 0
    large_batches: int = 0
    zeta_violations: int = 0
    leading_steps: int = 0

    @property
    def span_histogram(self) -> dict[int, int]:
        return dict(sorted(Counter(self.spans).items()))

    def to_dict(self) -> dict:
        return {
            "batches": len(self.spans),
            "max_span": max(self.spans, default=0),
            "max_vertices": max(self.vertex_counts, default=0),
            "long_batches": self.long_batches,
            "large_batches": self.large_batches,
            "zeta_violations": self.zeta_violations,
            "leading_steps": self.leading_steps,
            "span_histogram": self.span_histogram,
        }


def batch_stats(trace: StepTrace, n: int, factor: float = 10.0) -> BatchStats:
    """
    A batch is a Step 2 together with the Step-1 records up to the next Step 2. Flags
    batches over factor log^2 n steps or factor log^3 n vertices and counts breaches of
    zeta = y1 + 2 y2 + z1 being 0 before every Step 2 and positive before every Step 1.
    """
    stats = BatchStats()
    log_n = math.log(max(n, 2))
    records = trace.records
    current: list[int] | None = None

    def close(batch: list[int]) -> None:
        span = len(batch) - 1
        vertices = sum(len(records[i].removed) for i in batch)
        edges = trace.sizes_before(batch[0])[5] - records[batch[-1]].mu
        stats.spans.append(span)
        stats.vertex_counts.append(vertices)
        stats.edge_counts.append(edges)
        stats.long_batches += span > factor * log_n**2
        stats.large_batches += vertices > factor * log_n**3

    for i, r in enumerate(records):
        y1, y2, z1, *_ = trace.sizes_before(i)
        zeta = y1 + 2 * y2 + z1
        if r.kind is StepKind.STEP_2:
            stats.zeta_violations += zeta != 0
            if current is not None:
                close(current)
            current = [i]
        else:
            stats.zeta_violations += zeta <= 0
            if current is None:
                stats.leading_steps += 1
            else:
                current.append(i)
    if current is not None:
        close(current)
    return stats


@dataclass
class ResidualRandomnessLedger:
    r0: list[int]
    lambda0: set[int]
    lambda1: set[int]
    lambda2: set[int]
    lambda3: set[int]
    tardy_edges: list[int]
    alpha: float
    epsilon: float
    high_degree_outliers: int

    def to_dict(self) -> dict:
        return {
            "r0": len(self.r0),
            "lambda0": len(self.lambda0),
            "lambda1": len(self.lambda1),
            "lambda2": len(self.lambda2),
            "lambda3": len(self.lambda3),
            "tardy_r0_lambda0": len(self.tardy_edges),
            "alpha": self.alpha,
            "epsilon": self.epsilon,
            "high_degree_outliers": self.high_degree_outliers,
        }


def ledger_build(graph: Graph, result: TwoGreedyResult) -> ResidualRandomnessLedger:
    """
    R0: regular vertices removed early with a punctual witness. Lambda0: Gamma-degree at
    least 4 at step floor(n^(1-eps)). Lambda2: vertices in the first n^(1-eps/2) edges
    of sigma. Lambda3: outside Lambda2 with at least 24 Step-1 edge losses up to
    n^(1-eps). Tardy R0:Lambda0 edges join R0 to Lambda0 after position (1-alpha)m.
    """
    state, witnesses = result.state, result.ledger
    n, m = graph.n, graph.m
    eps = witnesses.epsilon

    r0 = [v for v in witnesses.regular if witnesses.is_early(v) and witnesses.is_punctual(witnesses.witness[v])]
    lambda0 = {v for v, d in enumerate(state.degree_snapshot) if d >= 4}
    head = min(m, math.floor(n ** (1 - eps / 2)))
    lambda2 = set(np.unique(graph.edges[:head]).tolist())
    lambda3 = {
        v for v in range(n) if v not in lambda2 and state.step1_losses[v] >= LOSS_THRESHOLD
    }
    lambda1 = lambda2 | lambda3
    outliers = sum(
        1
        for v in range(n)
        if graph.degrees[v] >= HIGH_DEGREE and v not in lambda1 and v not in lambda0
    )

    in_r0 = set(r0)
    tardy = [
        e
        for e in range(m)
        if not witnesses.is_punctual(e)
        and (
            (graph.edge_list[e][0] in in_r0 and graph.edge_list[e][1] in lambda0)
            or (graph.edge_list[e][1] in in_r0 and graph.edge_list[e][0] in lambda0)
        )
    ]
    return ResidualRandomnessLedger(
        r0=r0,
        lambda0=lambda0,
        lambda1=lambda1,
        lambda2=lambda2,
        lambda3=lambda3,
        tardy_edges=tardy,
        alpha=witnesses.alpha,
        epsilon=eps,
        high_degree_outliers=outliers,
    )


@dataclass
class ProbeResult:
    edge: tuple[int, int]
    same_matching: bool
    same_witnesses: bool

    @property
    def equal(self) -> bool:
        return self.same_matching and self.same_witnesses


def invariance_probe(
    graph: Graph,
    result: TwoGreedyResult,
    ledger: ResidualRandomnessLedger,
    coin: Rng,
    pick: Rng,
    cfg: GreedyConfig,
    punctual: bool = False,
) -> ProbeResult:
    """
    Delete one uniformly chosen tardy R0:Lambda0 edge, rerun 2GREEDY on the smaller graph
    with the same coin sequence and compare M and the witnesses as vertex pairs.
    With punctual=True a punctual edge is deleted instead, as a control.
    """
    if punctual:
        candidates = [e for e in range(graph.m) if result.ledger.is_punctual(e)]
    else:
        candidates = ledger.tardy_edges
    if not candidates:
        raise NoTardyEdge("No candidate edge to delete")
    e = candidates[int(pick.gen.integers(len(candidates)))]
    reduced = graph.without_edge(e)
    rerun = run_two_greedy(reduced, cfg, coin.fresh())
    return ProbeResult(
        edge=graph.edge_list[e],
        same_matching=rerun.state.matching_pairs() == result.state.matching_pairs(),
        same_witnesses=rerun.ledger.witness_pairs(reduced) == result.ledger.witness_pairs(graph),
    )


@dataclass
class DenseSets:
    exact: bool
    violations: list[tuple[tuple[int, ...], int]]
    count: int

    def to_dict(self) -> dict:
        return {"exact": self.exact, "count": self.count, "examples": [list(s) for s, _ in self.violations]}


EXACT_DENSE_LIMIT = 14


def dense_set_scan(graph: Graph, s_max: int, keep: int = 100) -> DenseSets:
    """
    Vertex sets S with 3 <= |S| <= s_max spanning at least |S| + 1 edges. Exhaustive
    for n <= 14; otherwise only the components of the 2-core of the short-cycle
    neighbourhoods are tried, so an empty answer proves nothing.
    """
    if graph.n <= EXACT_DENSE_LIMIT:
        nbr = [0] * graph.n
        for u, w in graph.edge_list:
            nbr[u] |= 1 << w
        found, count = [], 0
        for size in range(3, min(s_max, graph.n) + 1):
            for subset in itertools.combinations(range(graph.n), size):
                mask = sum(1 << v for v in subset)
                edges = sum((nbr[v] & mask).bit_count() for v in subset)
                if edges >= size + 1:
                    count += 1
                    if len(found) < keep:
                        found.append((subset, edges))
        return DenseSets(True, found, count)

    ell = max(2, s_max // 2)
    seeds = short_cycle_vertices(graph, ell)
    region = _ball(graph, seeds, 1)
    core = _two_core(graph, region)
    found = []
    for comp in _components(graph, core):
        if 3 <= len(comp) <= s_max:
            edges = _induced_edges(graph, comp)
            if edges >= len(comp) + 1:
                found.append((tuple(sorted(comp)), edges))
    return DenseSets(False, found[:keep], len(found))


def _induced_edges(graph: Graph, vertices: set[int]) -> int:
    return sum(1 for v in vertices for w in graph.neighbors(v) if w in vertices) // 2


def _two_core(graph: Graph, vertices: set[int]) -> set[int]:
    core = set(vertices)
    degree = {v: sum(1 for w in graph.neighbors(v) if w in core) for v in core}
    queue = deque(v for v, d in degree.items() if d < 2)
    while queue:
        v = queue.popleft()
        if v not in core:
            continue
        core.remove(v)
        for w in graph.neighbors(v):
            if w in core:
                degree[w] -= 1
                if degree[w] < 2:
                    queue.append(w)
    return core


def _components(graph: Graph, vertices: set[int]) -> list[set[int]]:
    seen, comps = set(), []
    for s in vertices:
        if s in seen:
            continue
        comp, queue = {s}, deque([s])
        seen.add(s)
        while queue:
            v = queue.popleft()
            for w in graph.neighbors(v):
                if w in vertices and w not in seen:
                    seen.add(w)
                    comp.add(w)
                    queue.append(w)
        comps.append(comp)
    return comps


def _ball(graph: Graph, sources: set[int], radius: int) -> set[int]:
    dist = {s: 0 for s in sources}
    queue = deque(sources)
    while queue:
        v = queue.popleft()
        if dist[v] == radius:
            continue
        for w in graph.neighbors(v):
            if w not in dist:
                dist[w] = dist[v] + 1
                queue.append(w)
    return set(dist)


def shortest_cycle_through(graph: Graph, v: int, limit: int) -> int | None:
    """Length of the shortest cycle through v if it is at most `limit`, else None."""
    depth = limit // 2
    dist = {v: 0}
    branch = {v: -1}
    order = deque([v])
    best = None
    while order:
        x = order.popleft()
        for y in graph.neighbors(x):
            if y not in dist:
                if dist[x] == depth:
                    continue
                dist[y] = dist[x] + 1
                branch[y] = y if x == v else branch[x]
                order.append(y)
            elif x != v and y != v and branch[x] != branch[y]:
                length = dist[x] + dist[y] + 1
                if length <= limit and (best is None or length < best):
                    best = length
    return best


def short_cycle_vertices(graph: Graph, ell0: int) -> set[int]:
    """Vertices on a cycle of length at most 2 ell0."""
    return {v for v in range(graph.n) if shortest_cycle_through(graph, v, 2 * ell0) is not None}


def near_cycle_census(graph: Graph, ell0: int) -> int:
    """|W1|: vertices within distance ell0 of a cycle of length at most 2 ell0."""
    return len(_ball(graph, short_cycle_vertices(graph, ell0), ell0))


@dataclass
class GrowthStats:
    ratios: list[float]
    inside: float
    band: tuple[float, float]
    histogram: tuple[list[int], list[float]]

    def to_dict(self) -> dict:
        return {
            "levels": len(self.ratios),
            "inside_fraction": self.inside,
            "band": list(self.band),
            "median_ratio": float(np.median(self.ratios)) if self.ratios else math.nan,
        }


def tree_growth_stats(
    profiles: list[TreeProfile], c: float, n: int, l0: int, beta: float = 0.5
) -> GrowthStats:
    """
    |A_{k+1}| / |C_k| for levels with L0 <= |C_k| <= n^0.6 that were fully built and
    not empty, and the fraction inside [2(1-beta)c, 2(1+beta)c].
    """
    ratios = []
    for profile in profiles:
        levels = profile.levels
        for k in range(len(levels) - 1):
            c_k = levels[k].c
            grown = levels[k + 1].a
            last = k + 1 == len(levels) - 1
            if grown == 0 or (last and profile.cut):
                continue
            if l0 <= c_k <= n**0.6:
                ratios.append(grown / c_k)
    band = (2 * (1 - beta) * c, 2 * (1 + beta) * c)
    inside = sum(1 for r in ratios if band[0] <= r <= band[1]) / len(ratios) if ratios else math.nan
    counts, edges = np.histogram(ratios, bins=20) if ratios else (np.array([]), np.array([]))
    return GrowthStats(ratios, inside, band, (counts.tolist(), edges.tolist()))


@dataclass
class CheckResult:
    name: str
    value: float | int | None
    budget: float | None
    status: str
    detail: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class DiagnosticsContext:
    """Inputs shared by the checks of one diagnostics run."""

    graph: Graph
    c: float
    seed: int
    greedy: GreedyConfig
    s_max: int = 8
    ell0: int | None = None
    batch_factor: float = 10.0
    profiles: list[TreeProfile] | None = None
    l0: int = 4
    _result: TwoGreedyResult | None = None

    @property
    def result(self) -> TwoGreedyResult:
        if self._result is None:
            self._result = run_two_greedy(self.graph, self.greedy, Rng(self.seed, Stream.COIN))
        return self._result


def _status(ok: bool) -> str:
    return "pass" if ok else "warn"


def check_batch(ctx: DiagnosticsContext) -> CheckResult:
    stats = batch_stats(ctx.result.trace, ctx.graph.n, ctx.batch_factor)
    return CheckResult("batch", stats.zeta_violations, 0, _status(stats.zeta_violations == 0), stats.to_dict())


def check_ledger(ctx: DiagnosticsContext) -> CheckResult:
    ledger = ledger_build(ctx.graph, ctx.result)
    budget = math.sqrt(ctx.graph.n)
    return CheckResult(
        "ledger", len(ledger.tardy_edges), budget, _status(len(ledger.tardy_edges) >= budget), ledger.to_dict()
    )


def check_invariance(ctx: DiagnosticsContext) -> CheckResult:
    ledger = ledger_build(ctx.graph, ctx.result)
    probe = invariance_probe(
        ctx.graph,
        ctx.result,
        ledger,
        Rng(ctx.seed, Stream.COIN),
        Rng(ctx.seed, Stream.DIAGNOSTICS),
        ctx.greedy,
    )
    return CheckResult(
        "invariance",
        int(probe.equal),
        1,
        "pass" if probe.equal else "error",
        {"edge": list(probe.edge), "same_matching": probe.same_matching, "same_witnesses": probe.same_witnesses},
    )


def check_ode(ctx: DiagnosticsContext) -> CheckResult:
    n = ctx.graph.n
    horizon = len(ctx.result.trace)
    dt = max(1.0, horizon / 2000)
    trajectory = ode_integrate(ctx.c, n, horizon, dt=dt, strict=False)
    drift = max(abs(s.theta_sum - 1) for s in trajectory)
    return CheckResult(
        "ode",
        drift,
        1e-12,
        _status(drift <= 1e-12),
        {"points": len(trajectory), "t_end": trajectory[-1].t, "q_max": max(s.q for s in trajectory)},
    )


def check_trajectory(ctx: DiagnosticsContext) -> CheckResult:
    n = ctx.graph.n
    trace = ctx.result.trace
    trajectory = ode_integrate(ctx.c, n, len(trace), dt=max(1.0, len(trace) / 5000), strict=False)
    comparison = compare_trajectory(trace, trajectory)
    budget = n**0.95
    x1 = x1_ratio(trace, n)
    early = n ** (1 - ctx.result.ledger.epsilon)
    window = math.ceil(n**0.25)
    mix = step_mix(trace, trajectory, window)
    return CheckResult(
        "trajectory",
        comparison.max_distance,
        budget,
        _status(comparison.max_distance <= budget and 0.85 <= x1 <= 1.15),
        {
            "x1_ratio": x1,
            "x2_step1": step1_count(trace, early),
            "x2_budget": n ** (1 - 2 * ctx.result.ledger.epsilon),
            "step_mix_windows": len(mix),
            "step_mix_max_gap": max((abs(r["delta_2"] - r["theta_2"]) for r in mix), default=0.0),
        },
    )


def check_dense(ctx: DiagnosticsContext) -> CheckResult:
    found = dense_set_scan(ctx.graph, ctx.s_max)
    return CheckResult("dense", found.count, 0, _status(found.count == 0), found.to_dict())


def check_near_cycle(ctx: DiagnosticsContext) -> CheckResult:
    n = ctx.graph.n
    ell0 = ctx.ell0 or max(1, math.floor(2 * math.log(math.log(max(n, 3)))))
    count = near_cycle_census(ctx.graph, ell0)
    budget = math.sqrt(n) * math.log(n) ** (4 * ell0)
    return CheckResult("near-cycle", count, budget, _status(count <= budget), {"ell0": ell0})


def check_tree_growth(ctx: DiagnosticsContext) -> CheckResult:
    stats = tree_growth_stats(ctx.profiles or [], ctx.c, ctx.graph.n, ctx.l0)
    ok = not stats.ratios or stats.inside >= 0.9
    return CheckResult("tree-growth", stats.inside, 0.9, _status(ok), stats.to_dict())


def check_degree_conc(ctx: DiagnosticsContext) -> CheckResult:
    model = DegreeModel.create(ctx.graph.n, ctx.c)
    rows = degree_concentration(ctx.graph, model)
    outside = [r["k"] for r in rows if not r["inside"]]
    log_n = math.log(ctx.graph.n)
    return CheckResult(
        "degree-conc",
        len(outside),
        0,
        _status(not outside),
        {"outside": outside, "max_degree": ctx.graph.max_degree, "log_n": log_n},
    )


CHECKS: dict[str, Callable[[DiagnosticsContext], CheckResult]] = {
    "batch": check_batch,
    "ledger": check_ledger,
    "invariance": check_invariance,
    "ode": check_ode,
    "trajectory": check_trajectory,
    "dense": check_dense,
    "near-cycle": check_near_cycle,
    "tree-growth": check_tree_growth,
    "degree-conc": check_degree_conc,
}


def run_checks(ctx: DiagnosticsContext, names: list[str]) -> list[CheckResult]:
    """Run the named checks; an exception in one check is recorded and the rest proceed."""
    unknown = [name for name in names if name not in CHECKS]
    if unknown:
        raise UnknownCheck(f"Unknown checks {unknown}; choose from {sorted(CHECKS)}")
    results = []
    for name in names:
        try:
            results.append(CHECKS[name](ctx))
        except Exception as e:
            logger.info(f"Check {name} raised {type(e).__name__}: {e}")
            results.append(CheckResult(name, None, None, "error", {"error": type(e).__name__, "message": str(e)}))
    return results
