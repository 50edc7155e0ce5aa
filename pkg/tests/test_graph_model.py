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

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import K4_EDGES, random_graph
from hamds3 import graph_model
from hamds3.errors import DegenerateInstance, InputError, NonConvergence, NotSimple, ResampleLimitExceeded
from hamds3.graph_model import (
    DegreeModel,
    DegreeSequence,
    Graph,
    Rng,
    Stream,
    degree_concentration,
    f_trunc,
    pair_configuration,
    repair_pairing,
    sample_degrees,
    sample_graph,
    simple_probability,
    solve_lambda,
    truncated_mean,
)


def test_rng_streams_are_reproducible_and_distinct():
    a = Rng(5, Stream.COIN).gen.integers(1 << 30, size=8)
    b = Rng(5, Stream.COIN).gen.integers(1 << 30, size=8)
    c = Rng(5, Stream.GRAPH).gen.integers(1 << 30, size=8)
    assert a.tolist() == b.tolist()
    assert a.tolist() != c.tolist()


def test_rng_fresh_restarts_sequence():
    rng = Rng(3, Stream.EXTEND)
    first = rng.gen.random(4)
    again = rng.fresh().gen.random(4)
    np.testing.assert_array_equal(first, again)


def test_rng_rejects_negative_seed():
    with pytest.raises(InputError):
        Rng(-1)


@pytest.mark.parametrize("x", [0.01, 0.5, 0.99, 1.0, 3.0, 40.0])
def test_f_trunc_matches_closed_form(x):
    assert f_trunc(0, x) == pytest.approx(math.exp(x), rel=1e-12)
    assert f_trunc(1, x) == pytest.approx(math.expm1(x), rel=1e-12)
    assert f_trunc(2, x) == pytest.approx(math.expm1(x) - x, rel=1e-9)


def test_f_trunc_small_argument_has_no_cancellation():
    x = 1e-3
    assert f_trunc(3, x) == pytest.approx(x**3 / 6 + x**4 / 24, rel=1e-6)


def test_f_trunc_rejects_bad_arguments():
    with pytest.raises(InputError):
        f_trunc(4, 1.0)
    with pytest.raises(InputError):
        f_trunc(2, 0.0)


@pytest.mark.parametrize("c", [2, 5, 10, 20, 50])
def test_solve_lambda_residual(c):
    lam = solve_lambda(c)
    assert abs(truncated_mean(lam) - 2 * c) <= 1e-10


@pytest.mark.parametrize("c", [1.6, 2.0, 2.5, 3.7, 20.0, 100.0])
def test_solve_lambda_hits_the_mean_degree(c):
    assert truncated_mean(solve_lambda(c)) == pytest.approx(2 * c, rel=1e-12)


def test_solve_lambda_reports_solver_failure(monkeypatch):
    def fail(*args, **kwargs):
        raise ValueError("no sign change")

    monkeypatch.setattr(graph_model, "brentq", fail)
    with pytest.raises(NonConvergence):
        solve_lambda(5.0)


def test_solve_lambda_large_c_sits_just_below_two_c():
    lam = solve_lambda(20)
    assert 39 < lam < 40


@pytest.mark.parametrize("c", [1.0, 1.5])
def test_solve_lambda_needs_mean_above_three(c):
    with pytest.raises(DegenerateInstance):
        solve_lambda(c)


def test_truncated_mean_is_increasing():
    values = [truncated_mean(x) for x in np.linspace(0.1, 30, 50)]
    assert all(a < b for a, b in zip(values, values[1:]))
    assert values[0] > 3


def test_degree_model_forced_case():
    model = DegreeModel.create(10, 1.5)
    assert model.forced
    assert model.lam == 0.0
    degrees = sample_degrees(model, Rng(0))
    assert degrees.degrees.tolist() == [3] * 10


def test_degree_model_rejects_too_few_edges():
    with pytest.raises(DegenerateInstance):
        DegreeModel.create(10, 1.2)


def test_degree_model_support_is_normalised():
    model = DegreeModel.create(1000, 20)
    ks, pmf = model.support()
    assert ks[0] == 3
    assert ks[-1] == model.k_max
    assert pmf.sum() == pytest.approx(1.0)
    assert model.pmf(2) == 0.0


@given(n=st.integers(10, 400), c=st.floats(1.6, 8.0), seed=st.integers(0, 10_000))
def test_sample_degrees_sum_and_minimum(n, c, seed):
    model = DegreeModel.create(n, c)
    degrees = sample_degrees(model, Rng(seed))
    assert degrees.n == n
    assert degrees.total == 2 * model.m
    assert degrees.degrees.min() >= 3


def test_sample_degrees_repair_after_rejection_cap():
    model = DegreeModel.create(500, 4)
    degrees = sample_degrees(model, Rng(1), rejection_cap=0)
    assert degrees.total == 2 * model.m
    assert degrees.degrees.min() >= 3


def test_pair_configuration_two_two_is_never_simple():
    for seed in range(10):
        with pytest.raises(NotSimple):
            pair_configuration(DegreeSequence([2, 2]), Rng(seed))


def test_pair_configuration_one_one_is_a_single_edge():
    graph = pair_configuration(DegreeSequence([1, 1]), Rng(0))
    assert graph.edge_list == [(0, 1)]


def test_pair_configuration_cubic_on_four_vertices_is_k4():
    for seed in range(200):
        try:
            graph = pair_configuration(DegreeSequence([3, 3, 3, 3]), Rng(seed))
        except NotSimple:
            continue
        assert sorted(graph.edge_list) == K4_EDGES
        return
    pytest.fail("no simple pairing in 200 seeds")


def test_repair_pairing_keeps_degrees():
    model = DegreeModel.create(300, 20)
    degrees = sample_degrees(model, Rng(2))
    assert simple_probability(degrees) < 1e-3
    graph = repair_pairing(degrees, Rng(2))
    assert graph.m == model.m
    np.testing.assert_array_equal(graph.degrees, degrees.degrees)


def test_sample_graph_small_forced_is_k4():
    graph = sample_graph(4, 1.5, Rng(0))
    assert sorted(graph.edge_list) == K4_EDGES


@given(n=st.integers(20, 300), c=st.sampled_from([1.6, 2.0, 3.0, 5.0]), seed=st.integers(0, 1000))
def test_sampled_graphs_are_simple_with_min_degree_three(n, c, seed):
    graph = random_graph(n, c, seed)
    assert graph.n == n
    assert graph.m == round(c * n)
    assert graph.min_degree >= 3
    assert int(graph.degrees.sum()) == 2 * graph.m
    assert len(set(graph.edge_list)) == graph.m


def test_sample_graph_is_deterministic():
    assert random_graph(200, 5, 11) == random_graph(200, 5, 11)
    assert random_graph(200, 5, 11) != random_graph(200, 5, 12)


def test_sample_graph_dense_instance():
    graph = random_graph(2000, 20, 0)
    assert graph.m == 40_000
    assert graph.min_degree >= 3


def test_sample_graph_rejects_tiny_n():
    with pytest.raises(InputError):
        sample_graph(3, 2.0, Rng(0))


def test_sample_graph_resample_cap():
    with pytest.raises(ResampleLimitExceeded):
        sample_graph(4, 2.0, Rng(0), resample_cap=3)


def test_degree_concentration_inside_envelope():
    model = DegreeModel.create(3000, 3)
    graph = sample_graph(3000, 3, Rng(4))
    rows = degree_concentration(graph, model)
    assert [r["k"] for r in rows] == list(range(3, 13))
    assert all(r["inside"] for r in rows)


def test_graph_file_round_trip(tmp_path):
    graph = random_graph(100, 5, 1)
    path = tmp_path / "g.txt"
    graph.write(path)
    assert path.read_text().splitlines()[0] == "100 500"
    assert Graph.read(path) == graph


def test_graph_parse_is_one_based():
    graph = Graph.parse("3 3\n1 2\n2 3\n3 1\n")
    assert graph.edge_list == [(0, 1), (1, 2), (0, 2)]


@pytest.mark.parametrize(
    "text",
    [
        "",
        "3\n1 2\n",
        "3 2\n1 2\n",
        "3 1\n1 1\n",
        "3 2\n1 2\n2 1\n",
        "3 1\n1 4\n",
        "3 1\n1 x\n",
    ],
)
def test_graph_parse_rejects_malformed_input(text):
    with pytest.raises(InputError):
        Graph.parse(text)


def test_graph_read_missing_file(tmp_path):
    with pytest.raises(InputError):
        Graph.read(tmp_path / "missing.txt")


def test_require_min_degree_rejects_cycle(c5):
    with pytest.raises(InputError, match="Minimum degree 2"):
        c5.require_min_degree(3)


def test_graph_adjacency_sorted_by_sigma(k4):
    for v in range(4):
        keys = [e for _, e in k4.adj[v]]
        assert keys == sorted(keys)
    assert k4.edge_index(3, 0) == 2
    assert not k4.has_edge(1, 1)


def test_without_edge_keeps_relative_order(k4):
    smaller = k4.without_edge(1)
    assert smaller.edge_list == [(0, 1), (0, 3), (1, 2), (1, 3), (2, 3)]


def test_shuffled_keeps_edge_set():
    graph = random_graph(100, 4, 3)
    shuffled = graph.shuffled(Rng(9))
    assert sorted(shuffled.edge_list) == sorted(graph.edge_list)
