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
2GREEDY: grow a partial 2-matching M by always taking the first available edge in sigma
at the highest-priority vertex class, until only Z vertices (b = 1, degree >= 2) remain.

Vertex classes by (Gamma-degree, b):
    Y_k: b = 0, degree k (k = 0, 1, 2), Y: b = 0, degree >= 3
    Z_k: b = 1, degree k (k = 0, 1),    Z: b = 1, degree >= 2
Y0, Z0 and b = 2 vertices are removed from Gamma.
"""

import heapq
import logging
import math
from collections import Counter, deque
from dataclasses import dataclass, field
from enum import Enum, IntEnum
from typing import IO

import numpy as np

from hamds3.errors import Inconsistent
from hamds3.graph_model import Graph, Rng

logger = logging.getLogger(__name__)


def epsilon(n: int, K: float = 1.0) -> float:
    """eps = K (log log n)^2 / log n, clamped to [0, 0.99] for tiny n."""
    if n <= 3:
        return 0.0
    log_n = math.log(n)
    eps = K * math.log(log_n) ** 2 / log_n
    return min(max(eps, 0.0), 0.99)


@dataclass(frozen=True)
class GreedyConfig:
    alpha: float = 0.1
    K: float = 1.0
    debug: bool = False


class StepKind(str, Enum):
    STEP_1A = "1a"
    STEP_1B = "1b"
    STEP_1C = "1c"
    STEP_2 = "2"
    DONE = "done"


class VertexClass(IntEnum):
    Y1 = 0
    Y2 = 1
    Z1 = 2
    Y = 3
    Z = 4
    Y0 = 5
    Z0 = 6
    MATCHED = 7  # b = 2


BUCKETS = (VertexClass.Y1, VertexClass.Y2, VertexClass.Z1, VertexClass.Y, VertexClass.Z)


def classify(degree: int, b: int) -> VertexClass:
    if b >= 2:
        return VertexClass.MATCHED
    if b == 0:
        if degree >= 3:
            return VertexClass.Y
        return (VertexClass.Y0, VertexClass.Y1, VertexClass.Y2)[degree]
    if degree >= 2:
        return VertexClass.Z
    return VertexClass.Z1 if degree == 1 else VertexClass.Z0


@dataclass(slots=True)
class StepRecord:
    t: int
    kind: StepKind
    edge: int
    vertex: int
    partner: int
    removed: tuple[int, ...]
    y1: int
    y2: int
    z1: int
    y: int
    z: int
    mu: int
    closed_cycle: bool = False

    @property
    def zeta(self) -> int:
        return self.y1 + 2 * self.y2 + self.z1

    def to_line(self) -> str:
        return "\t".join(
            str(x)
            for x in (self.t, self.kind.value, self.edge + 1, self.y1, self.y2, self.z1, self.y, self.z, self.mu)
        )


@dataclass
class StepTrace:
    """
    One record per step, with bucket sizes taken after the step. `initial` holds the
    sizes (y1, y2, z1, y, z, mu) before the first step.
    """

    initial: tuple[int, int, int, int, int, int]
    records: list[StepRecord] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.records)

    def append(self, record: StepRecord) -> None:
        self.records.append(record)

    @property
    def step2_indices(self) -> list[int]:
        """Batch boundaries: positions of the Step-2 records."""
        return [i for i, r in enumerate(self.records) if r.kind is StepKind.STEP_2]

    def kind_counts(self) -> Counter:
        return Counter(r.kind for r in self.records)

    def sizes_before(self, i: int) -> tuple[int, int, int, int, int, int]:
        if i == 0:
            return self.initial
        r = self.records[i - 1]
        return (r.y1, r.y2, r.z1, r.y, r.z, r.mu)

    def series(self, name: str) -> np.ndarray:
        """Values of y1, y2, z1, y, z or mu at t = 0, 1, ..., len(trace)."""
        index = ("y1", "y2", "z1", "y", "z", "mu").index(name)
        head = [self.initial[index]]
        return np.array(head + [getattr(r, name) for r in self.records], dtype=np.int64)

    def dump(self, out: IO[str]) -> None:
        for record in self.records:
            out.write(record.to_line() + "\n")


@dataclass
class WitnessLedger:
    """
    R: vertices removed at b = 2 while in Z, each with its Z-witness: the alive
    non-matching edge of least sigma index incident to it at removal.
    """

    regular: list[int]
    witness: dict[int, int]
    removed_at: list[float]
    early_cutoff: float
    punctual_cutoff: float
    alpha: float
    epsilon: float
    K: float

    def is_early(self, v: int) -> bool:
        return self.removed_at[v] <= self.early_cutoff

    def is_punctual(self, edge: int) -> bool:
        # edge indices are 0-based, the cutoff counts positions from 1
        return edge + 1 <= self.punctual_cutoff

    def witness_pairs(self, graph: Graph) -> dict[int, tuple[int, int]]:
        return {v: graph.edge_list[e] for v, e in self.witness.items()}


class TwoGreedyState:
    """
    Incremental 2GREEDY state on a static Graph.

    Each bucket is a heap of (first alive edge index, vertex). Entries go stale when a
    vertex changes class or its first alive edge dies; stale entries are dropped or
    re-keyed when they reach the top. A per-vertex cursor into the sigma-sorted
    adjacency only moves forward.
    """

    def __init__(self, graph: Graph, coin: Rng, loss_horizon: float = math.inf):
        n, m = graph.n, graph.m
        self.graph = graph
        self.adj = graph.adj
        self.coin = coin
        self.loss_horizon = loss_horizon

        self.edge_alive = bytearray(b"\x01") * m
        self.degree: list[int] = graph.degrees.tolist()
        self.b = [0] * n
        self.cursor = [0] * n
        self.alive = [True] * n
        self.cls: list[VertexClass | None] = [None] * n
        self.sizes = [0] * len(BUCKETS)
        self.heaps: list[list[tuple[int, int]]] = [[] for _ in BUCKETS]
        self.path_end = list(range(n))

        self.matching: list[int] = []
        self.witness: dict[int, int] = {}
        self.regular: list[int] = []
        self.removed_at: list[float] = [math.inf] * n
        self.y0: list[int] = []
        self.closed_cycles = 0
        self.step1_losses = [0] * n
        self.degree_snapshot: list[int] | None = None
        self.t = 0
        self.mu = m

        for v in range(n):
            self._set_class(v, classify(self.degree[v], 0))

    def first_alive(self, v: int) -> tuple[int, int] | None:
        """(neighbour, edge index) of v's alive edge with least sigma index."""
        adj = self.adj[v]
        alive = self.edge_alive
        i = self.cursor[v]
        while i < len(adj) and not alive[adj[i][1]]:
            i += 1
        self.cursor[v] = i
        return adj[i] if i < len(adj) else None

    def alive_edges(self, v: int) -> list[tuple[int, int]]:
        self.first_alive(v)
        alive = self.edge_alive
        return [(w, e) for w, e in self.adj[v][self.cursor[v]:] if alive[e]]

    def _set_class(self, v: int, new: VertexClass) -> None:
        old = self.cls[v]
        if old == new:
            return
        if old is not None and old < len(BUCKETS):
            self.sizes[old] -= 1
        self.cls[v] = new
        if new < len(BUCKETS):
            self.sizes[new] += 1
            _, e = self.first_alive(v)
            heapq.heappush(self.heaps[new], (e, v))
            return
        self.alive[v] = False
        self.removed_at[v] = self.t
        if new is VertexClass.Y0:
            self.y0.append(v)

    def _kill_edge(self, e: int) -> None:
        u, w = self.graph.edge_list[e]
        self.edge_alive[e] = 0
        self.degree[u] -= 1
        self.degree[w] -= 1
        self.mu -= 1

    def _join_paths(self, v: int, w: int) -> bool:
        ev, ew = self.path_end[v], self.path_end[w]
        if ev == w:
            self.closed_cycles += 1
            return True
        self.path_end[ev] = ew
        self.path_end[ew] = ev
        return False

    def peek(self, bucket: VertexClass) -> tuple[int, int, int] | None:
        """(member, neighbour, edge) for the bucket's least first-alive edge, or None."""
        heap = self.heaps[bucket]
        while heap:
            key, v = heap[0]
            if self.cls[v] != bucket:
                heapq.heappop(heap)
                continue
            first = self.first_alive(v)
            if first is None:
                raise Inconsistent(f"Vertex {v} sits in {bucket.name} without alive edges")
            if first[1] != key:
                heapq.heapreplace(heap, (first[1], v))
                continue
            return v, first[0], first[1]
        return None

    def first_edge_for_bucket(self, bucket: VertexClass) -> tuple[int, int]:
        found = self.peek(bucket)
        if found is None:
            raise Inconsistent(f"Bucket {bucket.name} is empty")
        v, _, e = found
        return v, e

    def select_step(self) -> StepKind:
        s = self.sizes
        if s[VertexClass.Y1]:
            return StepKind.STEP_1A
        if s[VertexClass.Y2]:
            return StepKind.STEP_1B
        if s[VertexClass.Z1]:
            return StepKind.STEP_1C
        if s[VertexClass.Y]:
            return StepKind.STEP_2
        return StepKind.DONE

    def _require(self, bucket: VertexClass) -> tuple[int, int, int]:
        found = self.peek(bucket)
        if found is None:
            raise Inconsistent(f"Step needs a {bucket.name} vertex but the bucket is empty")
        return found

    def apply_step_1a(self) -> StepRecord:
        v, w, e = self._require(VertexClass.Y1)
        return self._take(StepKind.STEP_1A, v, w, e)

    def apply_step_1b(self) -> StepRecord:
        v, _, _ = self._require(VertexClass.Y2)
        options = self.alive_edges(v)
        if len(options) != 2:
            raise Inconsistent(f"Y2 vertex {v} has {len(options)} alive edges")
        w, e = options[int(self.coin.gen.integers(2))]
        return self._take(StepKind.STEP_1B, v, w, e)

    def apply_step_1c(self) -> StepRecord:
        v, w, e = self._require(VertexClass.Z1)
        return self._take(StepKind.STEP_1C, v, w, e)

    def apply_step_2(self) -> StepRecord:
        v, w, e = self._require(VertexClass.Y)
        return self._take(StepKind.STEP_2, v, w, e)

    def apply(self, kind: StepKind) -> StepRecord:
        match kind:
            case StepKind.STEP_1A:
                return self.apply_step_1a()
            case StepKind.STEP_1B:
                return self.apply_step_1b()
            case StepKind.STEP_1C:
                return self.apply_step_1c()
            case StepKind.STEP_2:
                return self.apply_step_2()
        raise Inconsistent(f"No step to apply for {kind}")

    def _take(self, kind: StepKind, v: int, w: int, e: int) -> StepRecord:
        """
        Add (v, w) to M and tidy up. Endpoints reaching b = 2 leave Gamma together with
        their alive edges; the witness of a former Z vertex is read after the matching
        edge is gone and before its other edges are removed.
        """
        self.t += 1
        prior = {v: self.cls[v], w: self.cls[w]}
        self._kill_edge(e)
        self.matching.append(e)
        self.b[v] += 1
        self.b[w] += 1
        closed = self._join_paths(v, w)

        finished = [x for x in (v, w) if self.b[x] == 2]
        for x in finished:
            if prior[x] is VertexClass.Z:
                nxt = self.first_alive(x)
                if nxt is None:
                    raise Inconsistent(f"Z vertex {x} has no witness edge")
                self.witness[x] = nxt[1]
                self.regular.append(x)

        removed: list[int] = []
        queue: deque[int] = deque()
        count_losses = kind is not StepKind.STEP_2 and self.t <= self.loss_horizon
        for x in finished:
            lost = self.alive_edges(x)
            self._set_class(x, VertexClass.MATCHED)
            removed.append(x)
            for u, f in lost:
                self._kill_edge(f)
                queue.append(u)
                if count_losses:
                    self.step1_losses[u] += 1

        queue.extend(x for x in (v, w) if self.b[x] < 2)
        while queue:
            u = queue.popleft()
            if not self.alive[u]:
                continue
            self._set_class(u, classify(self.degree[u], self.b[u]))
            if not self.alive[u]:
                removed.append(u)

        s = self.sizes
        return StepRecord(
            t=self.t,
            kind=kind,
            edge=e,
            vertex=v,
            partner=w,
            removed=tuple(removed),
            y1=s[VertexClass.Y1],
            y2=s[VertexClass.Y2],
            z1=s[VertexClass.Z1],
            y=s[VertexClass.Y],
            z=s[VertexClass.Z],
            mu=self.mu,
            closed_cycle=closed,
        )

    def size_tuple(self) -> tuple[int, int, int, int, int, int]:
        s = self.sizes
        return (
            s[VertexClass.Y1],
            s[VertexClass.Y2],
            s[VertexClass.Z1],
            s[VertexClass.Y],
            s[VertexClass.Z],
            self.mu,
        )

    def recount(self) -> list[int]:
        """Bucket sizes recomputed from (degree, b) of the vertices still in Gamma."""
        sizes = [0] * len(BUCKETS)
        for v in range(self.graph.n):
            if self.alive[v]:
                k = classify(self.degree[v], self.b[v])
                if k < len(BUCKETS):
                    sizes[k] += 1
        return sizes

    def check_buckets(self) -> None:
        fresh = self.recount()
        if fresh != self.sizes:
            raise Inconsistent(f"Bucket sizes {self.sizes} differ from recount {fresh} at t={self.t}")
        for v in range(self.graph.n):
            if self.alive[v] and self.cls[v] != classify(self.degree[v], self.b[v]):
                raise Inconsistent(f"Vertex {v} is filed as {self.cls[v]!r} at t={self.t}")

    def take_snapshot(self) -> None:
        self.degree_snapshot = [d if a else 0 for d, a in zip(self.degree, self.alive)]

    def residual_vertices(self) -> list[int]:
        return [v for v in range(self.graph.n) if self.alive[v]]

    def residual_edges(self) -> list[int]:
        return [e for e in range(self.graph.m) if self.edge_alive[e]]

    def matching_pairs(self) -> set[tuple[int, int]]:
        return {self.graph.edge_list[e] for e in self.matching}


@dataclass
class TwoGreedyResult:
    state: TwoGreedyState
    ledger: WitnessLedger
    trace: StepTrace

    def __iter__(self):
        return iter((self.state, self.ledger, self.trace))


def run_two_greedy(graph: Graph, cfg: GreedyConfig, rng: Rng) -> TwoGreedyResult:
    """
    Run 2GREEDY to the point where Y1 = Y2 = Z1 = Y = 0. `rng` drives the Step-1b coin.

    The Gamma-degrees at step floor(n^(1 - eps)) are kept for the residual-randomness
    ledger, as are the Step-1 edge losses up to that step.
    """
    n, m = graph.n, graph.m
    eps = epsilon(n, cfg.K)
    early = n ** (1 - eps)
    snapshot_step = math.floor(early)
    state = TwoGreedyState(graph, rng, loss_horizon=snapshot_step)
    trace = StepTrace(initial=state.size_tuple())
    if snapshot_step == 0:
        state.take_snapshot()

    while (kind := state.select_step()) is not StepKind.DONE:
        trace.append(state.apply(kind))
        if cfg.debug:
            state.check_buckets()
        if state.t == snapshot_step:
            state.take_snapshot()
        if state.t > m:
            raise Inconsistent(f"2GREEDY ran {state.t} steps on {m} edges")

    if state.degree_snapshot is None:
        state.take_snapshot()
    for v in state.residual_vertices():
        if state.b[v] != 1 or state.degree[v] < 2:
            raise Inconsistent(
                f"Residual vertex {v} has b={state.b[v]}, degree={state.degree[v]}"
            )
    if state.y0:
        logger.info(f"{len(state.y0)} vertices became isolated without a matching edge")
    if state.closed_cycles:
        logger.debug(f"{state.closed_cycles} steps closed a cycle in M")

    ledger = WitnessLedger(
        regular=state.regular,
        witness=state.witness,
        removed_at=state.removed_at,
        early_cutoff=early,
        punctual_cutoff=(1 - cfg.alpha) * m,
        alpha=cfg.alpha,
        epsilon=eps,
        K=cfg.K,
    )
    logger.debug(
        f"2GREEDY: {state.t} steps, |M|={len(state.matching)}, |R|={len(state.regular)}, "
        f"residual {len(state.residual_vertices())} vertices / {state.mu} edges"
    )
    return TwoGreedyResult(state=state, ledger=ledger, trace=trace)
