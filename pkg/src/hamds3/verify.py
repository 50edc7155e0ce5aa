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
Ground truth for pipeline outputs: Hamilton-cycle certificates, 2-matching validation and
an exact Hamiltonicity oracle for small graphs.
"""

import logging
from dataclasses import dataclass, field
from typing import Iterable

from hamds3.errors import TooLarge
from hamds3.graph_model import Graph
from hamds3.matching import Component, decompose

logger = logging.getLogger(__name__)

ORACLE_LIMIT = 20


def check_hamilton(graph: Graph, seq: Iterable[int]) -> bool:
    """True iff seq visits every vertex once and consecutive vertices, cyclically, are adjacent."""
    seq = list(seq)
    n = graph.n
    if n < 3 or len(seq) != n or set(seq) != set(range(n)):
        return False
    return all(graph.has_edge(seq[i], seq[(i + 1) % n]) for i in range(n))


@dataclass
class TwoMatchingReport:
    violations: list[str] = field(default_factory=list)
    components: list[Component] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    @property
    def paths(self) -> int:
        return sum(1 for c in self.components if not c.cycle)

    @property
    def cycles(self) -> int:
        return sum(1 for c in self.components if c.cycle)

    def sizes(self) -> list[int]:
        return sorted((len(c) for c in self.components), reverse=True)

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "violations": self.violations,
            "paths": self.paths,
            "cycles": self.cycles,
            "sizes": self.sizes(),
        }


def check_two_matching(graph: Graph, edges: Iterable[tuple[int, int]]) -> TwoMatchingReport:
    """
    Every edge must be a graph edge and no vertex may have degree above 2. The census
    is computed when there are no degree violations.
    """
    report = TwoMatchingReport()
    nbrs: list[list[int]] = [[] for _ in range(graph.n)]
    for u, w in {(min(u, w), max(u, w)) for u, w in edges}:
        if not graph.has_edge(u, w):
            report.violations.append(f"({u}, {w}) is not an edge of the graph")
        nbrs[u].append(w)
        nbrs[w].append(u)
    for v, ns in enumerate(nbrs):
        if len(ns) > 2:
            report.violations.append(f"Vertex {v} has degree {len(ns)}")
    if not any(len(ns) > 2 for ns in nbrs):
        report.components = decompose(nbrs)
    return report


def oracle_hamiltonian(graph: Graph) -> bool:
    """
    Held-Karp over subsets: reach[mask] is the set of vertices that end a path from
    vertex 0 through exactly the vertices of mask.
    """
    n = graph.n
    if n > ORACLE_LIMIT:
        raise TooLarge(f"Exact oracle handles n <= {ORACLE_LIMIT}, got {n}")
    if n < 3:
        return False
    adj = [0] * n
    for u, w in graph.edge_list:
        adj[u] |= 1 << w
        adj[w] |= 1 << u
    full = (1 << n) - 1
    reach = [0] * (1 << n)
    reach[1] = 1
    for mask in range(1, full + 1, 2):
        ends = reach[mask]
        while ends:
            low = ends & -ends
            v = low.bit_length() - 1
            ends ^= low
            nxt = adj[v] & ~mask
            while nxt:
                bit = nxt & -nxt
                nxt ^= bit
                reach[mask | bit] |= bit
    return bool(reach[full] & adj[0])
