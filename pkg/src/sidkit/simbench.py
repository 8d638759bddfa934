"""Random DAG pairs, random linear SEMs and the benchmark harness.

Every pair draws from its own Philox substream keyed by ``(seed, pair_id,
stream)``, so rows do not depend on how pairs are spread over workers.
"""

from __future__ import annotations

import csv
import io
import os
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields, replace
from typing import Sequence

import numpy as np

from .cpdag import sid_dag_cpdag
from .distances import shd, sid
from .graph import Graph, GraphKind, cpdag_of, require_dag
from .oracle import LinearSem, count_effect_mismatches

REGIMES = ("sparse", "dense", "custom")
KINDS = ("sid-vs-shd", "sid-vs-effects", "scaling")

# substream tags
_TRUE, _EST, _SEM = 0, 1, 2


@dataclass(frozen=True)
class GenConfig:
    p: int
    p_connect: float
    seed: int = 0
    regime: str = "custom"

    def __post_init__(self):
        if self.p < 2:
            raise ValueError(f"need at least 2 nodes, got {self.p}")
        if not 0 < self.p_connect <= 1:
            raise ValueError(f"edge probability must lie in (0, 1], got {self.p_connect}")
        if self.regime not in REGIMES:
            raise ValueError(f"unknown regime {self.regime!r}")

    @classmethod
    def for_regime(cls, p: int, regime: str, seed: int = 0, p_connect: float | None = None) -> "GenConfig":
        """Sparse graphs expect 0.75 p edges; dense ones use probability 0.3."""
        if regime == "sparse":
            if p < 2:
                raise ValueError(f"need at least 2 nodes, got {p}")
            p_connect = 1.5 / (p - 1)
        elif regime == "dense":
            p_connect = 0.3
        elif p_connect is None:
            raise ValueError("the custom regime needs an explicit edge probability")
        return cls(p, min(p_connect, 1.0), seed, regime)


def pair_rng(seed: int, idx: int, stream: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, idx, stream])))


def random_dag(cfg: GenConfig, rng: np.random.Generator | None = None) -> Graph:
    """Orient ``perm[a] -> perm[b]`` for ``a < b`` with probability ``p_connect``."""
    rng = rng if rng is not None else pair_rng(cfg.seed, 0, _TRUE)
    perm = rng.permutation(cfg.p)
    keep = rng.random((cfg.p, cfg.p)) < cfg.p_connect
    rows = [0] * cfg.p
    for a in range(cfg.p):
        for b in range(a + 1, cfg.p):
            if keep[a, b]:
                rows[perm[a]] |= 1 << int(perm[b])
    return Graph(cfg.p, rows, GraphKind.DAG)


def random_sem(g: Graph, seed: int | np.random.Generator = 0) -> LinearSem:
    """Edge weights uniform on [-1, -0.1] u [0.1, 1]; unit noise variances."""
    require_dag(g)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    B = np.zeros((g.p, g.p))
    for k, j in g.directed_edges():
        B[j, k] = rng.choice((-1.0, 1.0)) * rng.uniform(0.1, 1.0)
    return LinearSem(g, B, np.ones(g.p))


@dataclass(frozen=True)
class ExperimentRow:
    pair_id: int
    p: int
    regime: str
    shd: int | None = None
    sid: int | None = None
    effect_mismatches: int | None = None
    sid_lower: int | None = None
    sid_upper: int | None = None
    wall_time_ns: int | None = None


COLUMNS = tuple(f.name for f in fields(ExperimentRow))


def rows_to_csv(rows: Sequence[ExperimentRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in rows:
        w.writerow(["" if (v := getattr(r, c)) is None else v for c in COLUMNS])
    return buf.getvalue()


def random_pair(cfg: GenConfig, pair_id: int) -> tuple[Graph, Graph]:
    return (
        random_dag(cfg, pair_rng(cfg.seed, pair_id, _TRUE)),
        random_dag(cfg, pair_rng(cfg.seed, pair_id, _EST)),
    )


@dataclass(frozen=True)
class _Job:
    kind: str
    cfg: GenConfig
    pair_id: int
    bounds: bool
    repeats: int


def _run_pair(job: _Job) -> ExperimentRow:
    cfg = job.cfg
    g, h = random_pair(cfg, job.pair_id)
    row = ExperimentRow(job.pair_id, cfg.p, cfg.regime)
    if job.kind == "scaling":
        times = []
        for _ in range(job.repeats):
            t0 = time.perf_counter_ns()
            s = sid(g, h).total
            times.append(time.perf_counter_ns() - t0)
        return replace(row, sid=s, wall_time_ns=int(statistics.median(times)))
    row = replace(row, shd=shd(g, h), sid=sid(g, h).total)
    if job.kind == "sid-vs-effects":
        sem = random_sem(g, pair_rng(cfg.seed, job.pair_id, _SEM))
        row = replace(row, effect_mismatches=count_effect_mismatches(sem, g, h))
    if job.bounds:
        b = sid_dag_cpdag(g, cpdag_of(h))
        row = replace(row, sid_lower=b.lower, sid_upper=b.upper)
    return row


def worker_count() -> int:
    """Workers from ``SIDKIT_THREADS``; unset or 0 means one per CPU."""
    raw = os.environ.get("SIDKIT_THREADS", "0").strip() or "0"
    n = int(raw)
    if n < 0:
        raise ValueError("SIDKIT_THREADS must be nonnegative")
    return n or os.cpu_count() or 1


def run_experiment(
    kind: str,
    cfg: GenConfig,
    n_pairs: int,
    seed: int | None = None,
    *,
    p_grid: Sequence[int] | None = None,
    bounds: bool = False,
    repeats: int = 5,
    workers: int | None = None,
) -> list[ExperimentRow]:
    """Generate ``n_pairs`` random DAG pairs and score them.

    ``scaling`` runs ``n_pairs`` pairs for each size in ``p_grid`` (default
    ``[cfg.p]``), serially so timings do not compete for cores.
    """
    if kind not in KINDS:
        raise ValueError(f"unknown experiment {kind!r}; expected one of {', '.join(KINDS)}")
    if seed is not None:
        cfg = replace(cfg, seed=seed)
    jobs = []
    if kind == "scaling":
        for p in p_grid or [cfg.p]:
            pc = GenConfig.for_regime(p, cfg.regime, cfg.seed, cfg.p_connect)
            jobs += [_Job(kind, pc, len(jobs), False, repeats) for _ in range(n_pairs)]
        jobs = [replace(j, pair_id=n) for n, j in enumerate(jobs)]
        return [_run_pair(j) for j in jobs]
    jobs = [_Job(kind, cfg, n, bounds, repeats) for n in range(n_pairs)]
    workers = worker_count() if workers is None else workers
    if workers > 1 and n_pairs > 1:
        with ProcessPoolExecutor(max_workers=min(workers, n_pairs)) as ex:
            rows = list(ex.map(_run_pair, jobs, chunksize=max(1, n_pairs // (4 * workers))))
    else:
        rows = [_run_pair(j) for j in jobs]
    return sorted(rows, key=lambda r: r.pair_id)


def median_times(rows: Sequence[ExperimentRow]) -> dict[int, float]:
    by_p: dict[int, list[int]] = {}
    for r in rows:
        if r.wall_time_ns is not None:
            by_p.setdefault(r.p, []).append(r.wall_time_ns)
    return {p: statistics.median(ts) for p, ts in sorted(by_p.items())}


def growth_ratios(rows: Sequence[ExperimentRow]) -> list[tuple[int, int, float]]:
    """``(p, q, t(q) / t(p))`` for consecutive sizes of a scaling run."""
    med = median_times(rows)
    ps = list(med)
    return [(a, b, med[b] / med[a]) for a, b in zip(ps, ps[1:])]
