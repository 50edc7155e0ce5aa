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
Step 3: complete the residual graph left by 2GREEDY into a maximum matching M*, first
greedily (Karp-Sipser), then by augmenting paths with blossom contraction, and fuse
M and M* into a 2-matching.
"""

import heapq
import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable

from more_itertools import one

from hamds3.errors import DegreeOverflow
from hamds3.two_greedy import TwoGreedyState

logger = logging.getLogger(__name__)


class ResidualGraph:
    """
    The graph still alive when 2GREEDY stops. Vertices keep their global ids; edges keep
    their sigma index as sort key. Internally vertices are renumbered 0..k-1.
    """

    def __init__(self, vertices: Iterable[int], edges: Iterable[tuple[int, int, int]]):
        self.vertices = list(vertices)
        self.local = {v: i for i, v in enumerate(self.vertices)}
        self.edges = sorted(
            ((key, self.local[u], self.local[w]) for u, w, key in edges)
        )
        self.adj: list[list[tuple[int, int]]] = [[] for _ in self.vertices]
        for key, u, w in self.edges:
            self.adj[u].append((w, key))
            self.adj[w].append((u, key))

    @classmethod
    def from_state(cls, state: TwoGreedyState) -> "ResidualGraph":
        edge_list = state.graph.edge_list
        return cls(
            state.residual_vertices(),
            ((*edge_list[e], e) for e in state.residual_edges()),
        )

    def __len__(self) -> int:
        return len(self.vertices)

    def degree_histogram(self) -> dict[int, int]:
        hist: dict[int, int] = {}
        for nbrs in self.adj:
            hist[len(nbrs)] = hist.get(len(nbrs), 0) + 1
        return dict(sorted(hist.items()))


@dataclass
class Matching:
    """mate[i] is the local partner of residual vertex i, or -1."""

    residual: ResidualGraph
    mate: list[int]

    @property
    def size(self) -> int:
        return sum(1 for m in self.mate if m >= 0) // 2

    @property
    def edges(self) -> list[tuple[int, int]]:
        vs = self.residual.vertices
        return sorted(
            (min(vs[i], vs[j]), max(vs[i], vs[j])) for i, j in enumerate(self.mate) if i < j
        )

    @property
    def exposed(self) -> list[int]:
        vs = self.residual.vertices
        return [vs[i] for i, j in enumerate(self.mate) if j < 0]

    def copy(self) -> "Matching":
        return Matching(self.residual, list(self.mate))

    def is_valid(self) -> bool:
        return all(j < 0 or self.mate[j] == i for i, j in enumerate(self.mate))


def karp_sipser(residual: ResidualGraph) -> Matching:
    """
    Match a pendant vertex along its edge while one exists (least sigma index of the
    pendant edge first), otherwise match the first remaining edge in sigma.
    """
    k = len(residual)
    adj = residual.adj
    mate = [-1] * k
    alive = [True] * k
    degree = [len(nbrs) for nbrs in adj]
    pendants: list[tuple[int, int]] = []

    def only_edge(x: int) -> tuple[int, int]:
        return one((y, key) for y, key in adj[x] if alive[y])

    def match(u: int, w: int) -> None:
        mate[u], mate[w] = w, u
        alive[u] = alive[w] = False
        for x in (u, w):
            for y, _ in adj[x]:
                if not alive[y]:
                    continue
                degree[y] -= 1
                if degree[y] == 1:
                    _, key = only_edge(y)
                    heapq.heappush(pendants, (key, y))

    for x in range(k):
        if degree[x] == 1:
            heapq.heappush(pendants, (adj[x][0][1], x))

    cursor = 0
    edges = residual.edges
    while True:
        if pendants:
            _, x = heapq.heappop(pendants)
            if not alive[x] or degree[x] != 1:
                continue
            y, _ = only_edge(x)
            match(x, y)
            continue
        while cursor < len(edges) and not (alive[edges[cursor][1]] and alive[edges[cursor][2]]):
            cursor += 1
        if cursor == len(edges):
            break
        _, u, w = edges[cursor]
        match(u, w)

    result = Matching(residual, mate)
    logger.debug(f"Karp-Sipser matched {result.size} edges, {len(result.exposed)} exposed")
    return result


class _BlossomSearch:
    """Alternating BFS forest from one root with blossom contraction by base relabelling."""

    def __init__(self, adj: list[list[tuple[int, int]]], mate: list[int]):
        self.adj = adj
        self.mate = mate
        self.k = len(adj)

    def _lca(self, a: int, b: int) -> int:
        seen = [False] * self.k
        while True:
            a = self.base[a]
            seen[a] = True
            if self.mate[a] == -1:
                break
            a = self.parent[self.mate[a]]
        while True:
            b = self.base[b]
            if seen[b]:
                return b
            b = self.parent[self.mate[b]]

    def _mark_path(self, v: int, b: int, child: int, blossom: list[bool]) -> None:
        while self.base[v] != b:
            blossom[self.base[v]] = blossom[self.base[self.mate[v]]] = True
            self.parent[v] = child
            child = self.mate[v]
            v = self.parent[self.mate[v]]

    def find(self, root: int, targets: set[int] | None) -> int | None:
        """
        Search for an augmenting path from root to an exposed vertex in targets (any
        exposed vertex when targets is None). Returns the far end; parents are kept.
        """
        k, mate, adj = self.k, self.mate, self.adj
        self.parent = [-1] * k
        self.base = list(range(k))
        used = [False] * k
        used[root] = True
        queue = deque([root])
        while queue:
            v = queue.popleft()
            for to, _ in adj[v]:
                if self.base[v] == self.base[to] or mate[v] == to:
                    continue
                if to == root or (mate[to] != -1 and self.parent[mate[to]] != -1):
                    cur = self._lca(v, to)
                    blossom = [False] * k
                    self._mark_path(v, cur, to, blossom)
                    self._mark_path(to, cur, v, blossom)
                    for i in range(k):
                        if blossom[self.base[i]]:
                            self.base[i] = cur
                            if not used[i]:
                                used[i] = True
                                queue.append(i)
                elif self.parent[to] == -1:
                    self.parent[to] = v
                    if mate[to] == -1:
                        if targets is None or to in targets:
                            return to
                        continue
                    used[mate[to]] = True
                    queue.append(mate[to])
        return None

    def flip(self, end: int) -> None:
        v = end
        while v != -1:
            pv = self.parent[v]
            nxt = self.mate[pv]
            self.mate[v] = pv
            self.mate[pv] = v
            v = nxt


def augment(residual: ResidualGraph, matching: Matching) -> Matching:
    """
    Grow the matching to maximum size. Exposed vertices are first paired in index
    order (u1, u2), (u3, u4), ... and each pair is searched for a path between its
    two members; a single pass over the still-exposed roots then takes any
    augmenting path, which leaves no augmenting path behind.
    """
    result = matching.copy()
    mate = result.mate
    search = _BlossomSearch(residual.adj, mate)
    exposed = [i for i, j in enumerate(mate) if j < 0]

    designated = 0
    for a, b in zip(exposed[0::2], exposed[1::2]):
        if mate[a] != -1 or mate[b] != -1:
            continue
        end = search.find(a, {b})
        if end is not None:
            search.flip(end)
            designated += 1

    fallback = 0
    for root in exposed:
        if mate[root] != -1:
            continue
        end = search.find(root, None)
        if end is not None:
            search.flip(end)
            fallback += 1

    logger.debug(
        f"Augmented {designated} designated pairs and {fallback} others, "
        f"{len(result.exposed)} vertices left exposed"
    )
    return result


@dataclass(frozen=True)
class Component:
    """A path (possibly a single vertex) or a cycle, as a vertex sequence."""

    vertices: tuple[int, ...]
    cycle: bool = False

    def __len__(self) -> int:
        return len(self.vertices)

    @property
    def edge_count(self) -> int:
        if self.cycle:
            return len(self.vertices)
        return len(self.vertices) - 1

    def edges(self) -> list[tuple[int, int]]:
        vs = self.vertices
        pairs = list(zip(vs, vs[1:]))
        if self.cycle:
            pairs.append((vs[-1], vs[0]))
        return [(min(a, b), max(a, b)) for a, b in pairs]


@dataclass
class TwoMatching:
    n: int
    edges: set[tuple[int, int]]
    components: list[Component] = field(default_factory=list)
    degrees: list[int] = field(default_factory=list)

    @classmethod
    def from_edges(cls, n: int, pairs: Iterable[tuple[int, int]]) -> "TwoMatching":
        edges = {(min(u, w), max(u, w)) for u, w in pairs}
        nbrs: list[list[int]] = [[] for _ in range(n)]
        for u, w in edges:
            nbrs[u].append(w)
            nbrs[w].append(u)
            if len(nbrs[u]) > 2 or len(nbrs[w]) > 2:
                raise DegreeOverflow(f"Vertex {u if len(nbrs[u]) > 2 else w} has degree 3 in the union")
        return cls(n=n, edges=edges, components=decompose(nbrs), degrees=[len(ns) for ns in nbrs])

    def degree(self, v: int) -> int:
        return self.degrees[v]

    @property
    def cycles(self) -> list[Component]:
        return [c for c in self.components if c.cycle]

    @property
    def paths(self) -> list[Component]:
        return [c for c in self.components if not c.cycle]


def decompose(nbrs: list[list[int]]) -> list[Component]:
    """Split a max-degree-2 graph into paths (from their lower endpoint) and cycles."""
    n = len(nbrs)
    seen = [False] * n
    components = []

    def walk(start: int) -> list[int]:
        seq = [start]
        seen[start] = True
        prev, cur = -1, start
        while True:
            nxt = next((x for x in nbrs[cur] if x != prev and not seen[x]), None)
            if nxt is None:
                return seq
            seen[nxt] = True
            seq.append(nxt)
            prev, cur = cur, nxt

    for v in range(n):
        if not seen[v] and len(nbrs[v]) <= 1:
            components.append(Component(tuple(walk(v))))
    for v in range(n):
        if not seen[v]:
            components.append(Component(tuple(walk(v)), cycle=True))
    return components


def fuse(n: int, partial: Iterable[tuple[int, int]], mstar: Matching) -> TwoMatching:
    """M union M*; raises DegreeOverflow if some vertex would get degree 3."""
    pairs = list(partial)
    pairs.extend(mstar.edges)
    two = TwoMatching.from_edges(n, pairs)
    if len(two.edges) != len(pairs):
        raise DegreeOverflow("M* repeats an edge of M")
    logger.debug(
        f"Fused 2-matching: {len(two.edges)} edges, {len(two.paths)} paths, {len(two.cycles)} cycles"
    )
    return two
