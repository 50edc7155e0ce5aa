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

import hypothesis
import numpy as np
import pytest

from hamds3.diagnostics import invariance_probe, ledger_build
from hamds3.errors import NoTardyEdge
from hamds3.graph_model import Graph, Rng, Stream, sample_graph
from hamds3.two_greedy import GreedyConfig, run_two_greedy

np.seterr(all="warn")

hypothesis.settings.register_profile("fast", max_examples=10, deadline=None)
hypothesis.settings.register_profile("thorough", max_examples=200, deadline=None)
hypothesis.settings.load_profile("fast")

K4_EDGES = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]

PETERSEN_EDGES = [
    (0, 1), (1, 2), (2, 3), (3, 4), (4, 0),
    (0, 5), (1, 6), (2, 7), (3, 8), (4, 9),
    (5, 7), (7, 9), (9, 6), (6, 8), (8, 5),
]


def complete_graph(n: int) -> Graph:
    return Graph(n, [(u, w) for u in range(n) for w in range(u + 1, n)])


def cycle_graph(n: int) -> Graph:
    return Graph(n, [(i, (i + 1) % n) for i in range(n)])


def random_graph(n: int, c: float, seed: int) -> Graph:
    return sample_graph(n, c, Rng(seed, Stream.GRAPH))


@pytest.fixture
def k4() -> Graph:
    return Graph(4, K4_EDGES)


@pytest.fixture
def petersen() -> Graph:
    return Graph(10, PETERSEN_EDGES)


@pytest.fixture
def c5() -> Graph:
    return cycle_graph(5)


@pytest.fixture(scope="session")
def medium_graph() -> Graph:
    return random_graph(600, 5.0, 7)


def invariance_outcomes(n: int, c: float, seeds, punctual: bool = False) -> list[bool]:
    """Delete one tardy (or punctual) edge per seed, rerun 2GREEDY and record whether M and W survive."""
    outcomes = []
    for seed in seeds:
        graph = random_graph(n, c, seed)
        result = run_two_greedy(graph, GreedyConfig(), Rng(seed, Stream.COIN))
        ledger = ledger_build(graph, result)
        try:
            found = invariance_probe(
                graph,
                result,
                ledger,
                Rng(seed, Stream.COIN),
                Rng(seed, Stream.DIAGNOSTICS),
                GreedyConfig(),
                punctual=punctual,
            )
        except NoTardyEdge:
            continue
        if not punctual:
            assert found.edge in {graph.edge_list[e] for e in ledger.tardy_edges}
        assert found.equal == (found.same_matching and found.same_witnesses)
        outcomes.append(found.equal)
    return outcomes
