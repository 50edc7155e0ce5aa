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
Extension-rotation: turn a 2-matching into a Hamilton cycle.

The current path P is rotated breadth first with one endpoint fixed (a rotation tree);
an endpoint with a neighbour off P is an extension, otherwise a second round of trees
fixed at every endpoint found looks for a closing edge. Off-path 2-matching components
are absorbed one at a time.

Every path in a search is a PathView: a short tuple of position intervals over the
path the search started from, so a rotation or a reversal costs O(depth) instead of
O(|P|).
"""

import dataclasses
import logging
import math
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from hamds3.errors import Disconnected, InputError, InvalidPivot, InvariantViolation
from hamds3.graph_model import Graph, Rng
from hamds3.matching import Component, TwoMatching

logger = logging.getLogger(__name__)

CURRENT = -1


@dataclass(frozen=True)
class ErConfig:
    nu: int = 64
    K: float = 1.0
    retries: int = 3
    use_l0_cases: bool = True
    l0: int = 4
    debug: bool = False
    collect_trees: int = 64
    restricted_closing: bool = False
    work_ceiling_factor: float = 64.0

    def __post_init__(self):
        if self.nu < 2:
            raise InputError(f"nu must be at least 2, got {self.nu}")
        if self.retries < 0:
            raise InputError(f"retries must be non-negative, got {self.retries}")

    def with_nu(self, nu: int) -> "ErConfig":
        return dataclasses.replace(self, nu=nu)


class PosaPath:
    """Vertex sequence u_1..u_k with its inverse index (-1 for vertices off the path)."""

    def __init__(self, seq, n: int | None = None):
        self.seq = np.asarray(seq, dtype=np.int64)
        if n is None:
            n = int(self.seq.max()) + 1 if len(self.seq) else 0
        self.pos = np.full(n, -1, dtype=np.int64)
        self.pos[self.seq] = np.arange(len(self.seq))
        if len(np.unique(self.seq)) != len(self.seq):
            raise InputError("Path repeats a vertex")

    def __len__(self) -> int:
        return len(self.seq)

    def __contains__(self, v: int) -> bool:
        return 0 <= v < len(self.pos) and self.pos[v] >= 0

    def tolist(self) -> list[int]:
        return self.seq.tolist()

    def view(self) -> "PathView":
        return PathView(self, ((0, len(self.seq) - 1),))


def rotate(path: PosaPath, pivot: tuple[int, int]) -> PosaPath:
    """
    Rotate P = (u_1..u_k) with the edge (u_k, u_i), i <= k-2, into
    (u_1..u_i, u_k, u_{k-1}..u_{i+1}).
    """
    k = len(path)
    end, other = pivot
    if int(path.seq[-1]) != end:
        end, other = other, end
    if k == 0 or int(path.seq[-1]) != end or other not in path:
        raise InvalidPivot(f"Pivot {pivot} does not join the endpoint to the path")
    i = int(path.pos[other])
    if i > k - 3:
        raise InvalidPivot(f"Pivot {pivot} hits position {i + 1} of a {k}-vertex path")
    seq = np.concatenate([path.seq[: i + 1], path.seq[i + 1:][::-1]])
    return PosaPath(seq, len(path.pos))


class PathView:
    """
    A path given as intervals of positions in a base PosaPath; an interval (lo, hi)
    with lo > hi is walked backwards.
    """

    __slots__ = ("base", "segments", "length")

    def __init__(self, base: PosaPath, segments: tuple[tuple[int, int], ...]):
        self.base = base
        self.segments = segments
        self.length = sum(abs(hi - lo) + 1 for lo, hi in segments)

    def __len__(self) -> int:
        return self.length

    def vertex_at(self, j: int) -> int:
        seq = self.base.seq
        for lo, hi in self.segments:
            size = abs(hi - lo) + 1
            if j < size:
                return int(seq[lo + j] if lo <= hi else seq[lo - j])
            j -= size
        raise IndexError(j)

    def position_of(self, v: int) -> int | None:
        p = int(self.base.pos[v])
        if p < 0:
            return None
        offset = 0
        for lo, hi in self.segments:
            if lo <= hi:
                if lo <= p <= hi:
                    return offset + p - lo
            elif hi <= p <= lo:
                return offset + lo - p
            offset += abs(hi - lo) + 1
        return None

    @property
    def first(self) -> int:
        return self.vertex_at(0)

    @property
    def last(self) -> int:
        return self.vertex_at(self.length - 1)

    def _split(self, j: int) -> tuple[list[tuple[int, int]], list[tuple[int, int]]]:
        head, tail = [], []
        for lo, hi in self.segments:
            size = abs(hi - lo) + 1
            if j <= 0:
                tail.append((lo, hi))
            elif j >= size:
                head.append((lo, hi))
            else:
                step = 1 if lo <= hi else -1
                head.append((lo, lo + step * (j - 1)))
                tail.append((lo + step * j, hi))
            j -= size
        return head, tail

    def rotate(self, i: int) -> "PathView":
        """Rotation with the pivot at 0-based position i <= len-3; the last vertex moves."""
        if not 0 <= i <= self.length - 3:
            raise InvalidPivot(f"Pivot position {i} on a path of {self.length} vertices")
        head, tail = self._split(i + 1)
        return PathView(self.base, tuple(head) + tuple((hi, lo) for lo, hi in reversed(tail)))

    def reversed(self) -> "PathView":
        return PathView(self.base, tuple((hi, lo) for lo, hi in reversed(self.segments)))

    def materialize(self) -> np.ndarray:
        seq = self.base.seq
        parts = [
            seq[lo: hi + 1] if lo <= hi else seq[hi: lo + 1][::-1] for lo, hi in self.segments
        ]
        return np.concatenate(parts) if parts else seq[:0]

    def tolist(self) -> list[int]:
        return self.materialize().tolist()


@dataclass(slots=True)
class TreeNode:
    vertex: int
    parent: int
    level: int
    inserted: tuple[int, int] | None
    lost: tuple[int, int] | None
    view: PathView


@dataclass
class LevelSize:
    a: int
    b: int
    c: int


@dataclass
class TreeProfile:
    levels: list[LevelSize]
    exhausted: bool
    cut: bool


@dataclass
class RotationTree:
    """
    Breadth-first rotation tree with fixed endpoint root.first. `endpoints` maps each
    endpoint to the first node reaching it, in discovery order.
    """

    root: PathView
    nodes: list[TreeNode] = field(default_factory=list)
    levels_a: list[list[int]] = field(default_factory=list)
    levels_b: list[list[int]] = field(default_factory=list)
    c_sizes: list[int] = field(default_factory=list)
    endpoints: dict[int, int] = field(default_factory=dict)
    exhausted: bool = False
    cut: bool = False
    work: int = 0

    @property
    def fixed(self) -> int:
        return self.root.first

    def end(self) -> list[tuple[int, int]]:
        return list(self.endpoints.items())

    @property
    def rotations(self) -> int:
        return len(self.nodes) - 1

    def profile(self) -> TreeProfile:
        return TreeProfile(
            levels=[
                LevelSize(len(a), len(b), c)
                for a, b, c in zip(self.levels_a, self.levels_b, self.c_sizes)
            ],
            exhausted=self.exhausted,
            cut=self.cut,
        )

    def node_path(self, node_id: int) -> list[int]:
        return self.nodes[node_id].view.tolist()


@dataclass
class Extension:
    """An endpoint of `view` with a neighbour `outside` the path."""

    view: PathView
    endpoint: int
    outside: int
    work: int = 0
    rotations: int = 0


def grow_tree(graph: Graph, root: PathView, cfg: ErConfig) -> Extension | RotationTree:
    """
    Rotate root breadth first, keeping root.first fixed, until an endpoint sees a vertex
    off the path, cfg.nu endpoints exist, or the frontier empties.

    While |C| <= L0 a level only drops B-vertices already in this level's B and
    endpoints already in this level's A; past L0 (or when a level adds nothing to C)
    every vertex already in C is excluded, together with pivots whose new endpoint is.
    """
    adj = graph.adj
    k = len(root)
    tree = RotationTree(root)
    b = root.last
    tree.nodes.append(TreeNode(b, -1, 0, None, None, root))
    tree.endpoints[b] = 0
    tree.levels_a.append([b])
    tree.levels_b.append([])
    in_c = {b}
    tree.c_sizes.append(1)
    frontier = [0]
    level = 0
    case1 = cfg.use_l0_cases

    while frontier:
        if len(tree.endpoints) >= cfg.nu:
            tree.cut = True
            break
        if case1 and len(in_c) > cfg.l0:
            case1 = False
        c_before = len(in_c)
        next_a: dict[int, None] = {}
        next_b: dict[int, None] = {}
        next_frontier = []
        for nid in frontier:
            node = tree.nodes[nid]
            v, view = node.vertex, node.view
            prev = view.vertex_at(k - 2) if k >= 2 else -1
            tree.work += len(adj[v])
            for u, _ in adj[v]:
                if u == prev:
                    continue
                pos = view.position_of(u)
                if pos is None:
                    return Extension(view, v, u, tree.work, tree.rotations)
                w = view.vertex_at(pos + 1)
                if case1:
                    if u in next_b:
                        continue
                    next_b[u] = None
                    in_c.add(u)
                    if w in next_a:
                        continue
                else:
                    if u in in_c or w in in_c:
                        continue
                    next_b[u] = None
                    in_c.add(u)
                next_a[w] = None
                in_c.add(w)
                tree.nodes.append(TreeNode(w, nid, level + 1, (v, u), (u, w), view.rotate(pos)))
                cid = len(tree.nodes) - 1
                next_frontier.append(cid)
                if w not in tree.endpoints:
                    tree.endpoints[w] = cid
                    if len(tree.endpoints) >= cfg.nu:
                        break
            if len(tree.endpoints) >= cfg.nu:
                break

        tree.levels_a.append(list(next_a))
        tree.levels_b.append(list(next_b))
        tree.c_sizes.append(len(in_c))
        if not next_frontier:
            tree.exhausted = True
        if case1 and len(in_c) == c_before:
            case1 = False
        frontier = next_frontier
        level += 1

    if len(tree.endpoints) >= cfg.nu:
        tree.cut = True
    return tree


@dataclass
class EndpointAtlas:
    """END(a) from the first tree and, per x in END(a), the tree fixed at x."""

    first: RotationTree
    second: dict[int, RotationTree] = field(default_factory=dict)

    @property
    def fixed(self) -> int:
        return self.first.fixed

    @property
    def work(self) -> int:
        return self.first.work + sum(t.work for t in self.second.values())

    @property
    def rotations(self) -> int:
        return self.first.rotations + sum(t.rotations for t in self.second.values())

    def sizes(self) -> dict:
        return {
            "end_a": len(self.first.endpoints),
            "end_x": [len(t.endpoints) for t in self.second.values()],
        }

    def closing_pairs(
        self, graph: Graph, allowed: set[int] | None = None
    ) -> Iterator[tuple[int, int, int]]:
        """(p, q, node id of q in the tree fixed at p) for every usable closing edge (p, q)."""
        for p, tree in self.second.items():
            yield from _closing_in(graph, p, tree, allowed)


def _closing_in(
    graph: Graph, p: int, tree: RotationTree, allowed: set[int] | None
) -> Iterator[tuple[int, int, int]]:
    if len(tree.root) < 3:
        return
    for q, nid in tree.endpoints.items():
        e = graph.edge_index(p, q)
        if e is None or (allowed is not None and e not in allowed):
            continue
        yield p, q, nid


def rrs(
    graph: Graph, root: PathView, cfg: ErConfig, allowed: set[int] | None = None
) -> Extension | EndpointAtlas:
    """
    Restricted rotation search. Stops at the first extension; otherwise stops growing
    second-level trees as soon as one of them yields a closing edge.
    """
    first = grow_tree(graph, root, cfg)
    if isinstance(first, Extension):
        return first
    atlas = EndpointAtlas(first)
    for x, nid in first.end():
        second = grow_tree(graph, first.nodes[nid].view.reversed(), cfg)
        if isinstance(second, Extension):
            second.work += atlas.work
            second.rotations += atlas.rotations
            return second
        atlas.second[x] = second
        if next(_closing_in(graph, x, second, allowed), None) is not None:
            break
    return atlas


def close_to_cycle(
    graph: Graph, atlas: EndpointAtlas, allowed: set[int] | None = None
) -> list[int] | None:
    """The cycle Q + (p, q) for the first closing edge in the atlas, or None."""
    found = next(atlas.closing_pairs(graph, allowed), None)
    if found is None:
        return None
    p, _, nid = found
    return atlas.second[p].node_path(nid)


class ComponentIndex:
    """Off-path 2-matching components; comp_of[v] is CURRENT for vertices on the path."""

    def __init__(self, n: int, components: list[Component] = ()):
        self.comp_of = np.full(n, CURRENT, dtype=np.int64)
        self.components: dict[int, Component] = {}
        self._next = 0
        for comp in components:
            self.add(comp)

    def add(self, comp: Component) -> int:
        cid = self._next
        self._next += 1
        self.components[cid] = comp
        self.comp_of[list(comp.vertices)] = cid
        return cid

    def pop(self, cid: int) -> Component:
        comp = self.components.pop(cid)
        self.comp_of[list(comp.vertices)] = CURRENT
        return comp

    def on_path(self, v: int) -> bool:
        return self.comp_of[v] == CURRENT

    def sizes(self) -> list[int]:
        return sorted((len(c) for c in self.components.values()), reverse=True)

    def __len__(self) -> int:
        return len(self.components)


def attach(path: list[int], z: int, index: ComponentIndex) -> list[int]:
    """
    Append the component of z to a path whose last vertex is adjacent to z. A cycle is
    opened at z; on a path R = (r_0..r_{k-1}) with z = r_j the longer of r_j..r_0 and
    r_j..r_{k-1} is taken (ties take r_j..r_0) and the rest stays a component.
    """
    cid = int(index.comp_of[z])
    if cid == CURRENT:
        raise InvariantViolation(f"Vertex {z} is already on the path")
    comp = index.pop(cid)
    vs = list(comp.vertices)
    j = vs.index(z)
    if comp.cycle:
        return path + vs[j:] + vs[:j]
    left = vs[j::-1]
    right = vs[j:]
    if len(left) >= len(right):
        side, rest = left, vs[j + 1:]
    else:
        side, rest = right, vs[:j]
    if rest:
        index.add(Component(tuple(rest)))
    return path + side


def external_edge(graph: Graph, cycle: list[int], index: ComponentIndex) -> tuple[int, int] | None:
    """First (u, v) with u on the cycle in cycle order, v off it, v in sigma order at u."""
    for u in cycle:
        for v, _ in graph.adj[u]:
            if not index.on_path(v):
                return u, v
    return None


def absorb(
    graph: Graph,
    current: list[int],
    index: ComponentIndex,
    cycle: bool = False,
    outside: int | None = None,
) -> list[int]:
    """
    Grow the current path by one off-path component.

    For a cycle, break it at u next to the first external edge (u, v) and continue into
    v's component. For a path, `outside` is a neighbour of its last vertex off the path.
    """
    if cycle:
        edge = external_edge(graph, current, index)
        if edge is None:
            raise Disconnected(f"No edge leaves the {len(current)}-vertex cycle")
        u, z = edge
        i = current.index(u)
        path = current[i + 1:] + current[: i + 1]
    else:
        if outside is None:
            raise InputError("Extending a path needs the outside vertex")
        path, z = current, outside
    return attach(path, z, index)


@dataclass
class FailureReport:
    reason: str
    retries_used: int
    atlas_sizes: list[dict]
    component_sizes: list[int]
    path_length: int
    edges_scanned: int

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass
class ErOutcome:
    success: bool
    cycle: list[int] | None = None
    er3_count: int = 0
    rotations: int = 0
    extensions: int = 0
    closings: int = 0
    retries_used: int = 0
    edges_scanned: int = 0
    profiles: list[TreeProfile] = field(default_factory=list)
    failure: FailureReport | None = None


def check_tree_paths(graph: Graph, tree: RotationTree, rng: Rng, samples: int = 100) -> None:
    """Rebuild sampled node paths and check them against the root; debug mode only."""
    k = len(tree.root)
    fixed = tree.fixed
    picks = rng.gen.choice(len(tree.nodes), size=min(samples, len(tree.nodes)), replace=False)
    for nid in picks.tolist():
        seq = tree.node_path(nid)
        node = tree.nodes[nid]
        if len(seq) != k or len(set(seq)) != k:
            raise InvariantViolation(f"Node {nid} rebuilds a path of {len(seq)} / {len(set(seq))} vertices")
        if seq[0] != fixed or seq[-1] != node.vertex:
            raise InvariantViolation(f"Node {nid} lost its endpoints {fixed}, {node.vertex}")
        for x, y in zip(seq, seq[1:]):
            if not graph.has_edge(x, y):
                raise InvariantViolation(f"Node {nid} path uses non-edge ({x}, {y})")


def _progress_bound(components: list[Component]) -> float:
    return len(components) + sum(math.log2(len(c)) for c in components)


def _perturb(graph: Graph, path: list[int], attempt: int, rng: Rng) -> list[int]:
    """Odd retries reverse the path, even ones apply a random rotation at its end."""
    if attempt % 2 == 1 or len(path) < 3:
        return path[::-1]
    base = PosaPath(path, graph.n)
    view = base.view()
    prev = path[-2]
    pivots = [
        int(base.pos[u]) for u, _ in graph.adj[path[-1]] if u != prev and base.pos[u] >= 0
    ]
    if not pivots:
        return path[::-1]
    return view.rotate(pivots[int(rng.gen.integers(len(pivots)))]).tolist()


def er_loop(
    graph: Graph,
    two: TwoMatching,
    cfg: ErConfig,
    rng: Rng,
    allowed: set[int] | None = None,
) -> ErOutcome:
    """
    Merge the 2-matching into a Hamilton cycle. Starts from the largest component (a
    cycle is opened at its closing edge), then alternates restricted rotation searches
    with absorption of off-path components. A search without extension or closing edge
    is retried with doubled nu from a reversed or randomly rotated path, at most
    cfg.retries times per run.

    `allowed` restricts closing edges to the given edge indices.
    """
    if cfg.restricted_closing and allowed is None:
        raise InputError("Restricted closing needs the set of allowed closing edges")
    n = graph.n
    components = list(two.components)
    if not components:
        raise InputError("Empty 2-matching")
    bound = 4 * max(1.0, _progress_bound(components)) + cfg.retries
    largest = max(components, key=len)
    index = ComponentIndex(n, [c for c in components if c is not largest])
    outcome = ErOutcome(success=False)

    if largest.cycle and len(largest) == n:
        outcome.success = True
        outcome.cycle = list(largest.vertices)
        return outcome

    path = list(largest.vertices)
    nu = cfg.nu
    atlas_sizes: list[dict] = []

    def fail(reason: str) -> ErOutcome:
        outcome.failure = FailureReport(
            reason=reason,
            retries_used=outcome.retries_used,
            atlas_sizes=atlas_sizes,
            component_sizes=index.sizes(),
            path_length=len(path),
            edges_scanned=outcome.edges_scanned,
        )
        logger.info(f"extend-rotate failed ({reason}) with {len(index)} components left")
        return outcome

    while True:
        outcome.er3_count += 1
        if outcome.er3_count > bound:
            raise InvariantViolation(
                f"{outcome.er3_count} rotation searches exceed the progress bound {bound:.1f}"
            )
        search_cfg = cfg.with_nu(nu)
        view = PosaPath(path, n).view()
        found = rrs(graph, view, search_cfg, allowed)
        outcome.edges_scanned += found.work
        outcome.rotations += found.rotations
        ceiling = cfg.work_ceiling_factor * (nu + 1) * (nu + cfg.l0**2 + 1) * max(1, graph.max_degree)
        if found.work > ceiling:
            raise InvariantViolation(f"Rotation search scanned {found.work} edges, ceiling {ceiling:.0f}")

        if isinstance(found, Extension):
            outcome.extensions += 1
            path = absorb(graph, found.view.tolist(), index, outside=found.outside)
            nu = cfg.nu
            continue

        atlas_sizes.append(found.sizes())
        if len(outcome.profiles) < cfg.collect_trees:
            outcome.profiles.append(found.first.profile())
        if cfg.debug:
            check_tree_paths(graph, found.first, rng)
            for tree in found.second.values():
                check_tree_paths(graph, tree, rng)

        cycle = close_to_cycle(graph, found, allowed)
        if cycle is None:
            if outcome.retries_used >= cfg.retries:
                return fail("no closing edge")
            outcome.retries_used += 1
            nu *= 2
            path = _perturb(graph, path, outcome.retries_used, rng)
            logger.debug(f"Retry {outcome.retries_used}: nu={nu}, path of {len(path)} vertices")
            continue

        outcome.closings += 1
        if len(cycle) == n:
            outcome.success = True
            outcome.cycle = cycle
            logger.debug(
                f"Hamilton cycle after {outcome.er3_count} searches, {outcome.extensions} extensions"
            )
            return outcome
        try:
            path = absorb(graph, cycle, index, cycle=True)
        except Disconnected as e:
            path = cycle
            return fail(str(e))
        nu = cfg.nu
