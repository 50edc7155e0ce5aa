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
Scaling benchmark: one pipeline run per (n, seed) on a bounded process pool, rows written
as they complete, followed by per-n medians and the log-log slope of runtime against n.
"""

import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass
from typing import IO

import numpy as np
from dotenv import load_dotenv
from tqdm import tqdm

from hamds3.config import RunConfig
from hamds3.graph_model import Rng, Stream, sample_graph
from hamds3.pipeline import RunReport, run_pipeline

logger = logging.getLogger(__name__)

CSV_HEADER = "n,seed,success,ms_total,ms_2greedy,ms_er,components,er3_count"


@dataclass(frozen=True)
class BenchRow:
    n: int
    seed: int
    success: bool
    ms_total: float
    ms_2greedy: float
    ms_er: float
    components: int
    er3_count: int

    @classmethod
    def from_report(cls, report: RunReport) -> "BenchRow":
        t = report.timings_ms
        return cls(
            n=report.n,
            seed=report.seed,
            success=report.success,
            ms_total=t["2greedy"] + t["matching"] + t["er"],
            ms_2greedy=t["2greedy"],
            ms_er=t["er"],
            components=report.components_fused,
            er3_count=report.er3_count,
        )

    def to_csv(self) -> str:
        return (
            f"{self.n},{self.seed},{str(self.success).lower()},{self.ms_total:.3f},"
            f"{self.ms_2greedy:.3f},{self.ms_er:.3f},{self.components},{self.er3_count}"
        )


def worker_count() -> int:
    """HAMDS3_THREADS from the environment or .env, else the CPU count."""
    load_dotenv()
    value = os.environ.get("HAMDS3_THREADS")
    if value:
        return max(1, int(value))
    return os.cpu_count() or 1


def bench_one(n: int, c: float, seed: int, cfg: RunConfig) -> BenchRow:
    """Sample and run one instance; ms_total covers everything after sampling."""
    start = time.perf_counter()
    graph = sample_graph(n, c, Rng(seed, Stream.GRAPH), resample_cap=cfg.resample_cap)
    sample_ms = (time.perf_counter() - start) * 1000
    return BenchRow.from_report(run_pipeline(graph, cfg, seed=seed, sample_ms=sample_ms))


def scaling_slope(rows: list[BenchRow]) -> tuple[dict[int, float], float | None]:
    """Median ms_total per n and the least-squares slope of log time on log n (3+ sizes)."""
    medians = {
        n: float(np.median([r.ms_total for r in rows if r.n == n]))
        for n in sorted({r.n for r in rows})
    }
    if len(medians) < 3:
        return medians, None
    xs = np.log(list(medians))
    ys = np.log([max(v, 1e-6) for v in medians.values()])
    slope, _ = np.polyfit(xs, ys, 1)
    return medians, float(slope)


def run_bench(
    n_list: list[int],
    c: float,
    seeds: list[int],
    cfg: RunConfig,
    out: IO[str],
    workers: int | None = None,
    warmup: bool = True,
) -> list[BenchRow]:
    """
    Rows are written to `out` in completion order and flushed one by one, so an
    interrupt keeps every finished row. Seeds are shared across all sizes.
    """
    workers = workers or worker_count()
    if warmup and n_list and seeds:
        bench_one(min(n_list), c, seeds[0], cfg)
    out.write(CSV_HEADER + "\n")
    rows: list[BenchRow] = []
    jobs = [(n, seed) for n in n_list for seed in seeds]
    logger.info(f"Benchmarking {len(jobs)} runs on {workers} workers")
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(bench_one, n, c, seed, cfg) for n, seed in jobs]
        try:
            for future in tqdm(as_completed(futures), total=len(futures), desc="bench"):
                row = future.result()
                rows.append(row)
                out.write(row.to_csv() + "\n")
                out.flush()
        except KeyboardInterrupt:
            for future in futures:
                future.cancel()
            logger.info(f"Interrupted after {len(rows)} of {len(jobs)} runs")
            raise

    medians, slope = scaling_slope(rows)
    for n, ms in medians.items():
        out.write(f"# median n={n} ms_total={ms:.3f}\n")
    if slope is not None:
        out.write(f"# slope={slope:.4f}\n")
    success = sum(r.success for r in rows)
    logger.info(f"{success}/{len(rows)} runs succeeded; slope {slope if slope is not None else math.nan:.3f}")
    return rows
