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

from collections import deque

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import PETERSEN_EDGES, K4_EDGES, cycle_graph
from hamds3.errors import Disconnected, InputError, InvalidPivot
from hamds3.extend_rotate import (
    CURRENT,
    ComponentIndex,
    EndpointAtlas,
    ErConfig,
    Extension,
    PosaPath,
    RotationTree,
    absorb,
    attach,
    check_tree_paths,
    close_to_cycle,
    er_loop,
    external_edge,
    grow_tree,
    rotate,
    rrs,
)
from hamds3.graph_model import Graph, Rng, Stream
from hamds3.matching import Component, TwoMatching
from hamds3.verify import check_hamilton


def naive_rotate(seq: list[int], i: int) -> list[int]:
    return seq[: i + 1] + seq[i + 1:][::-1]


def reachable_endpoints(graph: Graph, seq: list[int]) -> set[int]:
    """Every endpoint reachable from seq by rotations that keep seq[0] fixed."""
    start = tuple(seq)
    seen = {start}
    queue = deque([start])
    while queue:
        path = queue.popleft()
        pos = {v: i for i, v in enumerate(path)}
        for u in graph.neighbors(path[-1]):
            i = pos.get(u)
            if i is None or i > len(path) - 3:
                continue
            nxt = tuple(naive_rotate(list(path), i))
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return {path[-1] for path in seen}


def path_with_chords(n: int, chords: list[tuple[int, int]]) -> Graph:
    edges = {(i, i + 1) for i in range(n - 1)}
    edges |= {(min(u, w), max(u, w)) for u, w in chords if u != w}
    return Graph(n, sorted(edges))


def test_rotate_examples():
    assert rotate(PosaPath([0, 1, 2, 3, 4]), (4, 1)).tolist() == [0, 1, 4, 3, 2]
    assert rotate(PosaPath([0, 1, 2]), (2, 0)).tolist() == [0, 2, 1]


@pytest.mark.parametrize("pivot", [(4, 3), (0, 2), (4, 9)])
def test_rotate_rejects_bad_pivots(pivot):
    with pytest.raises(InvalidPivot):
        rotate(PosaPath([0, 1, 2, 3, 4], 10), pivot)


def test_posa_path_rejects_repeats():
    with pytest.raises(InputError):
        PosaPath([0, 1, 0])


@pytest.mark.parametrize("k", range(3, 9))
def test_every_rotation_is_undone_by_its_lost_edge(k):
    seq = list(range(k))
    for i in range(k - 2):
        once = rotate(PosaPath(seq), (k - 1, i))
        assert rotate(once, (i + 1, i)).tolist() == seq


@given(st.permutations(list(range(8))), st.data())
def test_rotation_undone_by_its_lost_edge(seq, data):
    k = data.draw(st.integers(3, 8))
    seq = list(seq[:k])
    i = data.draw(st.integers(0, k - 3))
    once = rotate(PosaPath(seq, 8), (seq[-1], seq[i]))
    assert once.tolist() == naive_rotate(seq, i)
    back = rotate(once, (once.tolist()[-1], seq[i]))
    assert back.tolist() == seq


@given(st.integers(3, 30), st.lists(st.integers(0, 10_000), max_size=12), st.booleans())
def test_path_view_matches_naive_rotations(k, picks, flip):
    seq = list(range(100, 100 + k))
    view = PosaPath(seq, 100 + k).view()
    naive = list(seq)
    for pick in picks:
        if flip and pick % 3 == 0:
            view, naive = view.reversed(), naive[::-1]
            continue
        i = pick % (k - 2)
        view, naive = view.rotate(i), naive_rotate(naive, i)
    assert view.tolist() == naive
    assert (view.first, view.last, len(view)) == (naive[0], naive[-1], k)
    for j, v in enumerate(naive):
        assert view.vertex_at(j) == v
        assert view.position_of(v) == j
    assert view.position_of(0) is None


def test_grow_tree_extension_at_level_zero():
    graph = Graph(6, [(0, 1), (1, 2), (2, 3), (3, 5)])
    found = grow_tree(graph, PosaPath([0, 1, 2, 3], 6).view(), ErConfig())
    assert isinstance(found, Extension)
    assert (found.endpoint, found.outside) == (3, 5)
    assert found.rotations == 0


def test_grow_tree_single_pivot():
    graph = path_with_chords(5, [(4, 1)])
    tree = grow_tree(graph, PosaPath([0, 1, 2, 3, 4]).view(), ErConfig(nu=64, l0=4))
    assert isinstance(tree, RotationTree)
    assert tree.levels_a[1] == [2]
    assert tree.levels_b[1] == [1]
    assert tree.nodes[1].inserted == (4, 1)
    assert tree.nodes[1].lost == (1, 2)
    assert set(tree.endpoints) == {4, 2}
    assert tree.exhausted and not tree.cut
    assert tree.node_path(1) == [0, 1, 4, 3, 2]


def test_grow_tree_stops_at_endpoint_budget():
    graph = path_with_chords(6, [(5, 0), (5, 1), (5, 2), (5, 3)])
    tree = grow_tree(graph, PosaPath(list(range(6))).view(), ErConfig(nu=3))
    assert tree.cut
    assert len(tree.endpoints) == 3


@given(
    n=st.integers(5, 9),
    chords=st.lists(st.tuples(st.integers(0, 8), st.integers(0, 8)), max_size=12),
    use_l0_cases=st.booleans(),
)
def test_tree_paths_stay_valid_on_hamilton_paths(n, chords, use_l0_cases):
    graph = path_with_chords(n, [(u % n, w % n) for u, w in chords])
    seq = list(range(n))
    cfg = ErConfig(nu=1000, l0=4, use_l0_cases=use_l0_cases)
    tree = grow_tree(graph, PosaPath(seq).view(), cfg)
    assert isinstance(tree, RotationTree)

    if use_l0_cases:
        prev = seq[-2]
        first_level = list(dict.fromkeys(u + 1 for u, _ in graph.adj[n - 1] if u != prev))
        assert tree.levels_a[1] == first_level
    assert set(tree.endpoints) <= reachable_endpoints(graph, seq)
    assert tree.exhausted
    check_tree_paths(graph, tree, Rng(0, Stream.EXTEND))
    for node in tree.nodes:
        path = node.view.tolist()
        assert path[0] == 0 and path[-1] == node.vertex
        assert sorted(path) == seq


def case2_rotation_bfs(graph: Graph, root: list[int]):
    """
    Breadth-first rotations on materialized paths with root[0] fixed. A pivot (v, u)
    counts only when neither u nor the new endpoint was seen in any earlier pivot.
    Returns the per-level endpoint and pivot lists, or (path, outside) at the first
    neighbour off the path.
    """
    seen = {root[-1]}
    levels_a, levels_b = [[root[-1]]], [[]]
    frontier = [list(root)]
    while frontier:
        next_frontier, level_a, level_b = [], [], []
        for path in frontier:
            pos = {v: i for i, v in enumerate(path)}
            for u in graph.neighbors(path[-1]):
                if u == path[-2]:
                    continue
                if u not in pos:
                    return path, u
                w = path[pos[u] + 1]
                if u in seen or w in seen:
                    continue
                seen.update((u, w))
                level_a.append(w)
                level_b.append(u)
                next_frontier.append(naive_rotate(path, pos[u]))
        levels_a.append(level_a)
        levels_b.append(level_b)
        frontier = next_frontier
    return levels_a, levels_b


@st.composite
def graphs_with_root_path(draw):
    n = draw(st.integers(4, 10))
    order = draw(st.permutations(range(n)))
    root = list(order[: draw(st.integers(3, n))])
    pairs = [(u, w) for u in range(n) for w in range(u + 1, n)]
    keep = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    edges = {p for p, k in zip(pairs, keep) if k}
    edges |= {(min(a, b), max(a, b)) for a, b in zip(root, root[1:])}
    sigma = draw(st.permutations(sorted(edges)))
    return Graph(n, sigma), root


@settings(max_examples=300)
@given(graphs_with_root_path())
def test_case2_tree_matches_rotation_bfs(graph_and_root):
    graph, root = graph_and_root
    cfg = ErConfig(nu=1000, use_l0_cases=False)
    found = grow_tree(graph, PosaPath(root, graph.n).view(), cfg)
    expected = case2_rotation_bfs(graph, root)
    if isinstance(expected[1], int):
        path, outside = expected
        assert isinstance(found, Extension)
        assert found.view.tolist() == path
        assert (found.endpoint, found.outside) == (path[-1], outside)
        return
    levels_a, levels_b = expected
    assert isinstance(found, RotationTree)
    assert found.levels_a == levels_a
    assert found.levels_b == levels_b
    assert found.exhausted
    assert set(found.endpoints) <= reachable_endpoints(graph, root)
    check_tree_paths(graph, found, Rng(0, Stream.EXTEND))


def test_ten_thousand_rotation_round_trips():
    gen = Rng(8, Stream.EXTEND).gen
    for _ in range(10_000):
        k = int(gen.integers(3, 9))
        seq = gen.permutation(8)[:k].tolist()
        i = int(gen.integers(0, k - 2))
        path = PosaPath(seq, 8)
        once = rotate(path, (seq[-1], seq[i]))
        assert once.tolist() == naive_rotate(seq, i)
        assert sorted(once.tolist()) == sorted(seq) and once.tolist()[0] == seq[0]
        assert all(once.pos[v] == j for j, v in enumerate(once.tolist()))
        assert rotate(once, (seq[i + 1], seq[i])).tolist() == seq
        assert path.view().rotate(i).rotate(i).tolist() == seq


def test_rrs_closes_hamilton_path_with_adjacent_ends():
    graph = cycle_graph(8)
    found = rrs(graph, PosaPath(list(range(8))).view(), ErConfig(nu=16))
    assert isinstance(found, EndpointAtlas)
    cycle = close_to_cycle(graph, found)
    assert cycle is not None and len(cycle) == 8
    assert check_hamilton(graph, cycle)
    sizes = found.sizes()
    assert sizes["end_a"] <= 16 and all(s <= 16 for s in sizes["end_x"])


def test_close_to_cycle_without_second_level():
    graph = cycle_graph(5)
    tree = grow_tree(graph, PosaPath(list(range(5))).view(), ErConfig())
    assert close_to_cycle(graph, EndpointAtlas(tree)) is None


def test_restricted_closing_filters_edges():
    graph = cycle_graph(8)
    found = rrs(graph, PosaPath(list(range(8))).view(), ErConfig(nu=16), allowed=set())
    assert isinstance(found, EndpointAtlas)
    assert close_to_cycle(graph, found, allowed=set()) is None
    closing = graph.edge_index(0, 7)
    assert close_to_cycle(graph, found, allowed={closing}) is not None


def test_absorb_cycle_into_isolated_vertex():
    graph = Graph(5, [(0, 1), (1, 2), (2, 3), (0, 3), (2, 4)])
    index = ComponentIndex(5, [Component((4,))])
    path = absorb(graph, [0, 1, 2, 3], index, cycle=True)
    assert path == [3, 0, 1, 2, 4]
    assert len(index) == 0
    assert all(index.on_path(v) for v in range(5))


def test_attach_takes_longer_side_of_a_path():
    index = ComponentIndex(20, [Component((10, 11, 12, 13, 14))])
    path = attach([0, 1], 13, index)
    assert path == [0, 1, 13, 12, 11, 10]
    assert [c.vertices for c in index.components.values()] == [(14,)]
    assert index.comp_of[14] != CURRENT


def test_attach_tie_takes_lower_side():
    index = ComponentIndex(20, [Component((10, 11, 12))])
    assert attach([0], 11, index) == [0, 11, 10]
    assert index.sizes() == [1]


def test_attach_opens_a_cycle_at_z():
    index = ComponentIndex(20, [Component((10, 11, 12, 13, 14), cycle=True)])
    assert attach([0], 12, index) == [0, 12, 13, 14, 10, 11]
    assert len(index) == 0


def test_absorb_path_needs_outside_vertex():
    graph = cycle_graph(4)
    with pytest.raises(InputError):
        absorb(graph, [0, 1, 2, 3], ComponentIndex(4))


def test_absorb_disconnected_cycle():
    graph = Graph(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)])
    index = ComponentIndex(6, [Component((3, 4, 5), cycle=True)])
    assert external_edge(graph, [0, 1, 2], index) is None
    with pytest.raises(Disconnected):
        absorb(graph, [0, 1, 2], index, cycle=True)


def test_er_loop_hamilton_cycle_is_immediate():
    graph = cycle_graph(8)
    two = TwoMatching.from_edges(8, graph.edge_list)
    outcome = er_loop(graph, two, ErConfig(), Rng(0, Stream.EXTEND))
    assert outcome.success
    assert outcome.er3_count == 0
    assert check_hamilton(graph, outcome.cycle)


def test_er_loop_closes_hamilton_path():
    graph = cycle_graph(8)
    two = TwoMatching.from_edges(8, [(i, i + 1) for i in range(7)])
    outcome = er_loop(graph, two, ErConfig(nu=8), Rng(0, Stream.EXTEND))
    assert outcome.success
    assert outcome.er3_count == 1
    assert outcome.closings == 1
    assert check_hamilton(graph, outcome.cycle)


def test_er_loop_extends_through_components():
    graph = Graph(4, K4_EDGES)
    two = TwoMatching.from_edges(4, [(0, 1)])
    outcome = er_loop(graph, two, ErConfig(nu=4, debug=True), Rng(0, Stream.EXTEND))
    assert outcome.success
    assert outcome.extensions == 2
    assert check_hamilton(graph, outcome.cycle)


def test_er_loop_reports_disconnected_graph():
    graph = Graph(8, [(u, w) for u, w in K4_EDGES] + [(u + 4, w + 4) for u, w in K4_EDGES])
    two = TwoMatching.from_edges(8, [(0, 1), (1, 2), (2, 3), (0, 3), (4, 5), (5, 6), (6, 7), (4, 7)])
    outcome = er_loop(graph, two, ErConfig(nu=4), Rng(0, Stream.EXTEND))
    assert not outcome.success
    assert "No edge leaves" in outcome.failure.reason
    assert outcome.failure.component_sizes == [4]


def test_er_loop_fails_on_petersen_after_retries():
    graph = Graph(10, PETERSEN_EDGES)
    hamilton_path = [0, 1, 2, 3, 4, 9, 7, 5, 8, 6]
    two = TwoMatching.from_edges(10, list(zip(hamilton_path, hamilton_path[1:])))
    cfg = ErConfig(nu=4, retries=3, debug=True)
    outcome = er_loop(graph, two, cfg, Rng(1, Stream.EXTEND))
    assert not outcome.success
    assert outcome.retries_used == 3
    assert outcome.failure.reason == "no closing edge"
    assert outcome.failure.path_length == 10
    assert len(outcome.failure.atlas_sizes) == 4
    assert outcome.failure.to_dict()["retries_used"] == 3


def test_er_config_validation():
    with pytest.raises(InputError):
        ErConfig(nu=1)
    with pytest.raises(InputError):
        ErConfig(retries=-1)
    assert ErConfig(nu=5).with_nu(10).nu == 10


def test_restricted_closing_needs_allowed_edges():
    graph = cycle_graph(8)
    two = TwoMatching.from_edges(8, [(i, i + 1) for i in range(7)])
    with pytest.raises(InputError):
        er_loop(graph, two, ErConfig(restricted_closing=True), Rng(0, Stream.EXTEND))
