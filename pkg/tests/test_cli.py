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

import json

import pytest
from typer.testing import CliRunner

from conftest import K4_EDGES, cycle_graph
from hamds3.bench import CSV_HEADER
from hamds3.cli import EXIT_INPUT, app
from hamds3.graph_model import Graph

runner = CliRunner()


def json_tail(text: str):
    """The JSON document that ends the output, skipping any log lines before it."""
    lines = text.splitlines()
    start = next(i for i, line in enumerate(lines) if line in ("{", "["))
    return json.loads("\n".join(lines[start:]))


@pytest.fixture
def k4_file(tmp_path):
    path = tmp_path / "k4.txt"
    Graph(4, K4_EDGES).write(path)
    return path


def test_gen_is_deterministic():
    first = runner.invoke(app, ["gen", "--n", "100", "--c", "5", "--seed", "1"])
    second = runner.invoke(app, ["gen", "--n", "100", "--c", "5", "--seed", "1"])
    assert first.exit_code == 0
    assert first.stdout == second.stdout
    assert first.stdout.splitlines()[0] == "100 500"


def test_gen_to_file(tmp_path):
    path = tmp_path / "g.txt"
    result = runner.invoke(app, ["gen", "--n", "80", "--c", "4", "--out", str(path)])
    assert result.exit_code == 0
    graph = Graph.read(path)
    assert (graph.n, graph.m) == (80, 320)
    assert graph.min_degree >= 3


def test_run_on_graph_file(k4_file):
    result = runner.invoke(app, ["run", "--graph", str(k4_file)])
    assert result.exit_code == 0
    report = json_tail(result.stdout)
    assert report["success"] is True
    assert report["cycle_length"] == 4


def test_run_csv_on_sampled_graph():
    result = runner.invoke(app, ["run", "--n", "200", "--c", "4", "--seed", "2", "--format", "csv"])
    assert result.exit_code == 0
    lines = [line for line in result.stdout.splitlines() if line[:1].isdigit() or line == CSV_HEADER]
    assert lines[0] == CSV_HEADER
    assert lines[1].startswith("200,2,")


def test_run_with_config_and_flags(k4_file, tmp_path):
    config = tmp_path / "run.yaml"
    config.write_text("retries: 1\nnu: 8\n")
    result = runner.invoke(app, ["run", "--graph", str(k4_file), "--config", str(config), "--retries", "2", "--debug"])
    assert result.exit_code == 0


@pytest.mark.parametrize(
    "args",
    [
        ["run", "--format", "xml", "--n", "50"],
        ["run"],
        ["run", "--graph", "does-not-exist.txt"],
        ["diagnose", "--checks", "batch,nope", "--n", "50"],
        ["oracle", "--n-min", "5"],
        ["run", "--n", "100", "--retries", "-1"],
    ],
)
def test_input_errors_exit_3(args):
    assert runner.invoke(app, args).exit_code == EXIT_INPUT


def test_run_rejects_low_min_degree(tmp_path):
    path = tmp_path / "c5.txt"
    cycle_graph(5).write(path)
    assert runner.invoke(app, ["run", "--graph", str(path)]).exit_code == EXIT_INPUT


def test_diagnose_selected_checks():
    result = runner.invoke(app, ["diagnose", "--checks", "batch, dense", "--n", "200", "--c", "4"])
    assert result.exit_code == 0
    checks = json_tail(result.stdout)
    assert [c["name"] for c in checks] == ["batch", "dense"]
    assert checks[0]["status"] == "pass"


def test_oracle_small_run():
    result = runner.invoke(app, ["oracle", "--count", "5", "--seed", "3"])
    assert result.exit_code == 0
    lines = result.stdout.splitlines()
    assert "instance,n,success,oracle" in lines
    rows = [line for line in lines if line[:1].isdigit()]
    assert [row.split(",")[0] for row in rows] == ["0", "1", "2", "3", "4"]
    summary = [line for line in lines if line.startswith("# success=")]
    assert len(summary) == 4
    assert sum(int(line.rsplit(" ", 1)[1]) for line in summary) == 5


def test_bench_writes_csv(tmp_path):
    out = tmp_path / "bench.csv"
    args = ["bench", "--n", "150", "--n", "200", "--c", "4", "--seeds", "1", "--threads", "1", "--no-warmup"]
    result = runner.invoke(app, args + ["--out", str(out)])
    assert result.exit_code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == CSV_HEADER
    assert len([line for line in lines if not line.startswith("#")]) == 3


def test_solver_failure_exits_3(monkeypatch):
    def fail(*args, **kwargs):
        raise ValueError("rtol too small")

    monkeypatch.setattr("hamds3.graph_model.brentq", fail)
    result = runner.invoke(app, ["gen", "--n", "100", "--c", "5"])
    assert result.exit_code == EXIT_INPUT
