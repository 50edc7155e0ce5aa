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
Sampling G_{n,m} with minimum degree three.

Degrees are truncated Poisson Po(lambda; >= 3) conditioned on summing to 2m, the graph
comes from a uniform configuration pairing conditioned on simplicity, and a final
Fisher-Yates shuffle of the edge array realises the ordering sigma. Edge index i is the
position of the edge in sigma.
"""

import logging
import math
from dataclasses import dataclass
from enum import IntEnum
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import brentq
from scipy.stats import poisson

from hamds3.errors import (
    DegenerateInstance,
    InputError,
    NonConvergence,
    NotSimple,
    ResampleLimitExceeded,
)

logger = logging.getLogger(__name__)

# Tail mass below which the truncated Poisson support is cut off.
TAIL_MASS = 1e-15
# Below this limiting chance of a simple pairing, clashing pairs are re-paired instead
# of redrawing the whole pairing.
EXACT_SIMPLE_FLOOR = 1e-3


class Stream(IntEnum):
    GRAPH = 0
    COIN = 1
    MATCHING = 2
    EXTEND = 3
    DIAGNOSTICS = 4


class Rng:
    """
    A (seed, stream) pair and the numpy Generator it determines.
    Identical (seed, stream) pairs produce identical sequences.
    """

    def __init__(self, seed: int, stream: int = Stream.GRAPH):
        if seed < 0:
            raise InputError(f"Seed must be non-negative, got {seed}")
        self.seed = int(seed)
        self.stream = int(stream)
        self.gen = np.random.default_rng(
            np.random.SeedSequence(self.seed, spawn_key=(self.stream,))
        )

    def fresh(self) -> "Rng":
        """Restart the same sequence from its beginning."""
        return Rng(self.seed, self.stream)

    def spawn(self, stream: int) -> "Rng":
        return Rng(self.seed, stream)

    def __repr__(self) -> str:
        return f"Rng(seed={self.seed}, stream={self.stream})"


def f_trunc(j: int, x: float) -> float:
    """
    f_j(x) = e^x - sum_{k<j} x^k / k!, for j in {0, 1, 2, 3} and x > 0.
    """
    if j not in (0, 1, 2, 3):
        raise InputError(f"f_trunc is defined for j in 0..3, got {j}")
    if x <= 0:
        raise InputError(f"f_trunc needs x > 0, got {x}")
    if x < 1.0:
        # summing the tail directly avoids the cancellation in e^x - (1 + x + ...)
        term = x**j / math.factorial(j)
        total = 0.0
        k = j
        for _ in range(64):
            total += term
            k += 1
            term *= x / k
            if term <= 1e-17 * total:
                break
        return total
    return math.exp(x) - sum(x**k / math.factorial(k) for k in range(j))


def truncated_mean(lam: float, j: int = 3) -> float:
    """Mean of Po(lam; >= j), i.e. lam * f_{j-1}(lam) / f_j(lam)."""
    return lam * f_trunc(j - 1, lam) / f_trunc(j, lam)


def _truncated_mean_derivative(lam: float) -> float:
    f1, f2, f3 = f_trunc(1, lam), f_trunc(2, lam), f_trunc(3, lam)
    return f2 / f3 + lam * f1 / f3 - lam * f2 * f2 / (f3 * f3)


def solve_lambda(c: float, tol: float = 1e-12) -> float:
    """
    Solve lam * f2(lam) / f3(lam) = 2c for lam > 0.

    The mean map is strictly increasing, so the root is unique: bracket it by doubling,
    run Brent's method and polish with Newton steps.
    """
    target = 2 * c
    if target <= 3:
        raise DegenerateInstance(f"Mean degree 2c={target} must exceed the minimum degree 3")

    lo = min(0.01, target - 3)
    hi = 1.0
    while truncated_mean(hi) < target:
        hi *= 2
        if hi > 8 * c:
            raise NonConvergence(f"Bracket for lambda exceeded 8c={8 * c} at c={c}")

    try:
        lam = brentq(lambda x: truncated_mean(x) - target, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    except (ValueError, RuntimeError) as e:
        raise NonConvergence(f"Brent solve for lambda failed at c={c}: {e}") from e
    for _ in range(3):
        residual = truncated_mean(lam) - target
        if abs(residual) <= tol / 10:
            break
        lam -= residual / _truncated_mean_derivative(lam)

    residual = abs(truncated_mean(lam) - target)
    if residual > max(tol, 1e-13 * target):
        raise NonConvergence(f"lambda solve for c={c} stalled at residual {residual}")
    logger.debug(f"solve_lambda(c={c}) = {lam} (residual {residual:.3e})")
    return lam


@dataclass(frozen=True)
class DegreeModel:
    """
    Truncated Poisson degree model for G_{n,m}, m = round(c n).

    When 2m == 3n every degree is forced to 3 and no lambda is needed; lam is 0 then.
    """

    n: int
    m: int
    c: float
    lam: float

    @classmethod
    def create(cls, n: int, c: float, tol: float = 1e-12) -> "DegreeModel":
        if n < 1:
            raise InputError(f"Vertex count must be positive, got {n}")
        m = round(c * n)
        if 2 * m < 3 * n:
            raise DegenerateInstance(
                f"No degree sequence with minimum degree 3 sums to 2m={2 * m} on n={n} vertices"
            )
        lam = solve_lambda(m / n, tol) if 2 * m > 3 * n else 0.0
        return cls(n=n, m=m, c=c, lam=lam)

    @property
    def forced(self) -> bool:
        return 2 * self.m == 3 * self.n

    @cached_property
    def k_max(self) -> int:
        if self.forced:
            return 3
        k = 3
        norm = poisson.sf(2, self.lam)
        while poisson.sf(k, self.lam) / norm >= TAIL_MASS:
            k += 1
        return k

    def support(self) -> tuple[np.ndarray, np.ndarray]:
        """Degrees 3..k_max and their normalised probabilities."""
        ks = np.arange(3, self.k_max + 1)
        if self.forced:
            return ks, np.ones(1)
        pmf = poisson.pmf(ks, self.lam) / poisson.sf(2, self.lam)
        return ks, pmf / pmf.sum()

    def pmf(self, k: int | np.ndarray) -> np.ndarray:
        """P(Z = k) = lam^k / (k! f3(lam)) for k >= 3."""
        k = np.asarray(k)
        if self.forced:
            return (k == 3).astype(float)
        return np.where(k >= 3, poisson.pmf(k, self.lam) / poisson.sf(2, self.lam), 0.0)


@dataclass
class DegreeSequence:
    degrees: np.ndarray

    def __post_init__(self):
        self.degrees = np.asarray(self.degrees, dtype=np.int64)

    @property
    def n(self) -> int:
        return len(self.degrees)

    @property
    def total(self) -> int:
        return int(self.degrees.sum())

    @property
    def max_degree(self) -> int:
        return int(self.degrees.max()) if len(self.degrees) else 0

    def counts(self) -> np.ndarray:
        """nu_k: number of vertices of each degree k, indexed by k."""
        return np.bincount(self.degrees)


def sample_degrees(
    model: DegreeModel, rng: Rng, rejection_cap: int | None = None
) -> DegreeSequence:
    """
    i.i.d. Po(lam; >= 3) degrees conditioned on summing to 2m.

    The vector of degree counts of n i.i.d. draws is multinomial, so whole sequences are
    rejection-sampled through their counts and then laid out by a uniform shuffle. After
    64 sqrt(n) rejections the last draw is repaired one unit at a time.
    """
    n, target = model.n, 2 * model.m
    if model.forced:
        return DegreeSequence(np.full(n, 3, dtype=np.int64))

    ks, pmf = model.support()
    cap = rejection_cap if rejection_cap is not None else math.ceil(64 * math.sqrt(n))
    counts = None
    for attempt in range(cap):
        counts = rng.gen.multinomial(n, pmf)
        if int(counts @ ks) == target:
            logger.debug(f"Degree sum hit 2m={target} after {attempt + 1} draws")
            degrees = np.repeat(ks, counts)
            rng.gen.shuffle(degrees)
            return DegreeSequence(degrees)

    if counts is None:
        counts = rng.gen.multinomial(n, pmf)
    degrees = np.repeat(ks, counts)
    rng.gen.shuffle(degrees)
    diff = int(degrees.sum()) - target
    logger.info(f"Degree rejection cap {cap} reached, repairing a sum offset of {diff}")
    while diff != 0:
        i = int(rng.gen.integers(n))
        if diff > 0 and degrees[i] > 3:
            degrees[i] -= 1
            diff -= 1
        elif diff < 0:
            degrees[i] += 1
            diff += 1
    return DegreeSequence(degrees)


class Graph:
    """
    Static simple graph on vertices 0..n-1 whose edge array is in sigma order.

    adj[v] lists (neighbour, edge index) pairs sorted by edge index.
    """

    def __init__(self, n: int, edges: np.ndarray | Sequence[tuple[int, int]]):
        arr = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if n < 0:
            raise InputError(f"Vertex count must be non-negative, got {n}")
        if len(arr) and (arr.min() < 0 or arr.max() >= n):
            raise InputError(f"Edge endpoints must lie in 0..{n - 1}")
        lo, hi = arr.min(axis=1), arr.max(axis=1)
        loops = int((lo == hi).sum())
        keys = lo * max(n, 1) + hi
        parallel = len(keys) - len(np.unique(keys))
        if loops or parallel:
            raise InputError(f"Graph is not simple: {loops} loops, {parallel} parallel edges")
        self.n = n
        self.m = len(arr)
        self.edges = np.stack([lo, hi], axis=1)

    @classmethod
    def from_pairs(cls, n: int, pairs: Iterable[tuple[int, int]], one_based: bool = False) -> "Graph":
        shift = 1 if one_based else 0
        return cls(n, [(u - shift, v - shift) for u, v in pairs])

    @cached_property
    def edge_list(self) -> list[tuple[int, int]]:
        return [tuple(e) for e in self.edges.tolist()]

    @cached_property
    def degrees(self) -> np.ndarray:
        return np.bincount(self.edges.ravel(), minlength=self.n)

    @cached_property
    def adj(self) -> list[list[tuple[int, int]]]:
        adj: list[list[tuple[int, int]]] = [[] for _ in range(self.n)]
        for i, (u, v) in enumerate(self.edge_list):
            adj[u].append((v, i))
            adj[v].append((u, i))
        return adj

    @cached_property
    def _index(self) -> dict[tuple[int, int], int]:
        return {e: i for i, e in enumerate(self.edge_list)}

    def edge_index(self, u: int, v: int) -> int | None:
        return self._index.get((u, v) if u < v else (v, u))

    def has_edge(self, u: int, v: int) -> bool:
        return self.edge_index(u, v) is not None

    def neighbors(self, v: int) -> list[int]:
        return [w for w, _ in self.adj[v]]

    @property
    def min_degree(self) -> int:
        return int(self.degrees.min()) if self.n else 0

    @property
    def max_degree(self) -> int:
        return int(self.degrees.max()) if self.n else 0

    def require_min_degree(self, k: int = 3) -> None:
        if self.min_degree < k:
            v = int(np.argmin(self.degrees))
            raise InputError(
                f"Minimum degree {self.min_degree} < {k} (vertex {v + 1} in 1-based ids)"
            )

    def without_edge(self, index: int) -> "Graph":
        """Drop one edge; the remaining edges keep their relative sigma order."""
        return Graph(self.n, np.delete(self.edges, index, axis=0))

    def shuffled(self, rng: Rng) -> "Graph":
        """Fisher-Yates over the edge array; the result order is the new sigma."""
        edges = self.edges.copy()
        rng.gen.shuffle(edges, axis=0)
        return Graph(self.n, edges)

    def to_text(self) -> str:
        lines = [f"{self.n} {self.m}"]
        lines += [f"{u + 1} {v + 1}" for u, v in self.edge_list]
        return "\n".join(lines) + "\n"

    def write(self, path: str | Path) -> None:
        with open(path, "w") as f:
            f.write(self.to_text())

    @classmethod
    def parse(cls, text: str) -> "Graph":
        lines = [line.split() for line in text.splitlines() if line.strip()]
        if not lines or len(lines[0]) != 2:
            raise InputError("Graph file must start with a 'n m' header line")
        try:
            n, m = int(lines[0][0]), int(lines[0][1])
            pairs = [(int(u), int(v)) for u, v in lines[1:]]
        except ValueError as e:
            raise InputError(f"Malformed graph file: {e}") from e
        if len(pairs) != m:
            raise InputError(f"Header announces {m} edges, file lists {len(pairs)}")
        return cls.from_pairs(n, pairs, one_based=True)

    @classmethod
    def read(cls, path: str | Path) -> "Graph":
        path = Path(path)
        if not path.exists():
            raise InputError(f"Graph file {path} does not exist.")
        return cls.parse(path.read_text())

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Graph)
            and self.n == other.n
            and np.array_equal(self.edges, other.edges)
        )

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m})"


def pair_configuration(degrees: DegreeSequence, rng: Rng) -> Graph:
    """
    Uniform perfect matching of the configuration points, projected onto the vertices.
    Raises NotSimple when the projection has a loop or a parallel edge.
    """
    d = degrees.degrees
    if d.sum() % 2:
        raise InputError(f"Degree sum {d.sum()} is odd")
    n = len(d)
    points = np.repeat(np.arange(n, dtype=np.int64), d)
    rng.gen.shuffle(points)
    pairs = points.reshape(-1, 2)
    lo, hi = pairs.min(axis=1), pairs.max(axis=1)
    loops = int((lo == hi).sum())
    keys = lo * n + hi
    parallel = len(keys) - len(np.unique(keys))
    if loops or parallel:
        raise NotSimple(loops, parallel)
    return Graph(n, np.stack([lo, hi], axis=1))


def simple_probability(degrees: DegreeSequence) -> float:
    """exp(-nu/2 - nu^2/4) with nu = sum d(d-1) / sum d: the limiting chance that a pairing is simple."""
    d = degrees.degrees.astype(float)
    nu = float((d * (d - 1)).sum() / d.sum())
    return math.exp(-nu / 2 - nu * nu / 4)


def repair_pairing(degrees: DegreeSequence, rng: Rng, max_rounds: int = 1000) -> Graph:
    """
    Pair the configuration points uniformly, keep every pair that is neither a loop nor a
    repeat of a kept pair, and re-pair the points of the rejected pairs until none are
    left. A round that keeps nothing puts one random kept pair back into the pool.
    Raises NotSimple when max_rounds rounds do not finish.
    """
    d = degrees.degrees
    if d.sum() % 2:
        raise InputError(f"Degree sum {d.sum()} is odd")
    n = len(d)
    points = np.repeat(np.arange(n, dtype=np.int64), d)
    kept = np.empty(0, dtype=np.int64)
    loops = parallel = 0
    for rounds in range(1, max_rounds + 1):
        rng.gen.shuffle(points)
        pairs = points.reshape(-1, 2)
        lo, hi = pairs.min(axis=1), pairs.max(axis=1)
        keys = lo * n + hi
        at = np.searchsorted(kept, keys)
        seen = at < len(kept)
        seen[seen] = kept[at[seen]] == keys[seen]
        usable = np.flatnonzero((lo != hi) & ~seen)
        fresh, first = np.unique(keys[usable], return_index=True)
        rejected = np.ones(len(pairs), dtype=bool)
        rejected[usable[first]] = False
        loops = int((lo == hi).sum())
        parallel = len(pairs) - loops - len(fresh)
        points = pairs[rejected].ravel()
        kept = np.insert(kept, np.searchsorted(kept, fresh), fresh)
        if not len(points):
            logger.debug(f"Re-paired clashing points in {rounds} rounds")
            return Graph(n, np.stack([kept // n, kept % n], axis=1))
        if not len(fresh) and len(kept):
            j = int(rng.gen.integers(len(kept)))
            points = np.concatenate([points, [kept[j] // n, kept[j] % n]])
            kept = np.delete(kept, j)
    raise NotSimple(loops, parallel)


def sample_graph(n: int, c: float, rng: Rng, resample_cap: int = 1000) -> Graph:
    """
    Draw G_{n,m} with minimum degree 3, m = round(cn), and a uniform ordering sigma.

    A degree sequence whose pairings are simple with probability at least
    EXACT_SIMPLE_FLOOR is paired by whole-pairing rejection, which is exactly uniform;
    denser sequences go through repair_pairing.
    """
    if n < 4:
        raise InputError(f"Need at least 4 vertices, got {n}")
    model = DegreeModel.create(n, c)
    for attempt in range(1, resample_cap + 1):
        degrees = sample_degrees(model, rng)
        exact = simple_probability(degrees) >= EXACT_SIMPLE_FLOOR
        try:
            graph = pair_configuration(degrees, rng) if exact else repair_pairing(degrees, rng)
        except NotSimple as e:
            logger.debug(f"Attempt {attempt}: {e}")
            continue
        logger.debug(f"Simple pairing after {attempt} attempts (n={n}, m={model.m})")
        return graph.shuffled(rng)
    raise ResampleLimitExceeded(
        f"No simple pairing in {resample_cap} attempts for n={n}, c={c}"
    )


def degree_concentration(
    graph: Graph, model: DegreeModel, k1: float = 3.0, k_range: range = range(3, 13)
) -> list[dict]:
    """
    Compare nu_k with n lam^k e^-lam / (k! f3(lam)) against the envelope
    K1 (1 + sqrt(expected)) log n.
    """
    counts = np.bincount(graph.degrees, minlength=max(k_range) + 1)
    log_n = math.log(graph.n)
    rows = []
    for k in k_range:
        expected = float(graph.n * model.pmf(k))
        envelope = k1 * (1 + math.sqrt(expected)) * log_n
        observed = int(counts[k]) if k < len(counts) else 0
        rows.append(
            {
                "k": k,
                "observed": observed,
                "expected": expected,
                "envelope": envelope,
                "inside": abs(observed - expected) <= envelope,
            }
        )
    return rows
