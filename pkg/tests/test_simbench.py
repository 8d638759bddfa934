import numpy as np
import pytest

from sidkit.simbench import (
    COLUMNS,
    ExperimentRow,
    GenConfig,
    growth_ratios,
    median_times,
    pair_rng,
    random_dag,
    random_pair,
    random_sem,
    rows_to_csv,
    run_experiment,
    worker_count,
)
from sidkit import Graph


def test_config_validation():
    with pytest.raises(ValueError):
        GenConfig(1, 0.5)
    with pytest.raises(ValueError):
        GenConfig(5, 0.0)
    with pytest.raises(ValueError):
        GenConfig(5, 1.5)
    with pytest.raises(ValueError):
        GenConfig.for_regime(5, "custom")
    with pytest.raises(ValueError):
        GenConfig(5, 0.5, regime="medium")


@pytest.mark.parametrize("p", [3, 5, 20, 100])
def test_regime_formulas(p):
    assert GenConfig.for_regime(p, "sparse").p_connect == 1.5 / (p - 1)
    assert GenConfig.for_regime(p, "dense").p_connect == 0.3
    assert GenConfig.for_regime(p, "custom", p_connect=0.42).p_connect == 0.42


def test_sparse_two_nodes_is_clamped():
    assert GenConfig.for_regime(2, "sparse").p_connect == 1.0


def test_extreme_probabilities():
    g = random_dag(GenConfig(8, 1.0, seed=3))
    assert g.n_edges() == 8 * 7 // 2
    assert random_dag(GenConfig(8, 1e-12, seed=3)).n_edges() == 0


def test_sparse_mean_edge_count():
    cfg = GenConfig.for_regime(20, "sparse", seed=0)
    counts = [random_dag(cfg, pair_rng(0, n, 0)).n_edges() for n in range(10_000)]
    assert abs(np.mean(counts) - 15) <= 1


def test_draws_are_dags_and_deterministic():
    cfg = GenConfig.for_regime(12, "dense", seed=4)
    for n in range(50):
        g, h = random_pair(cfg, n)
        assert g.kind.value == "dag"
        assert (g, h) == random_pair(cfg, n)


def test_random_sem():
    g = random_dag(GenConfig(10, 0.5, seed=1))
    sem = random_sem(g, 5)
    w = sem.B[sem.B != 0]
    assert len(w) == g.n_edges()
    assert ((np.abs(w) >= 0.1) & (np.abs(w) <= 1.0)).all()
    assert (w > 0).any() and (w < 0).any()
    assert np.array_equal(sem.B, random_sem(g, 5).B)
    assert (sem.noise_var == 1).all()
    assert not random_sem(Graph.empty(4), 0).B.any()


def test_csv_layout():
    text = rows_to_csv([ExperimentRow(0, 5, "dense", shd=2, sid=3)])
    assert text.splitlines() == [
        "pair_id,p,regime,shd,sid,effect_mismatches,sid_lower,sid_upper,wall_time_ns",
        "0,5,dense,2,3,,,,",
    ]
    assert ",".join(COLUMNS) == text.splitlines()[0]


def test_sid_vs_shd_rows():
    rows = run_experiment("sid-vs-shd", GenConfig.for_regime(6, "dense"), 40, seed=3, workers=1)
    assert [r.pair_id for r in rows] == list(range(40))
    for r in rows:
        assert 0 <= r.sid <= 30 and r.effect_mismatches is None and r.wall_time_ns is None


def test_bounds_columns():
    rows = run_experiment("sid-vs-shd", GenConfig.for_regime(5, "sparse"), 10, seed=1, bounds=True, workers=1)
    assert all(r.sid_lower <= r.sid_upper for r in rows)


def test_effects_rows_agree_with_sid():
    rows = run_experiment("sid-vs-effects", GenConfig.for_regime(5, "dense"), 50, seed=8, workers=1)
    assert sum(r.effect_mismatches == r.sid for r in rows) >= 49


def test_reproducible_across_workers():
    cfg = GenConfig.for_regime(6, "dense", seed=2)
    serial = run_experiment("sid-vs-effects", cfg, 24, workers=1)
    parallel = run_experiment("sid-vs-effects", cfg, 24, workers=3)
    assert serial == parallel


def test_seed_argument_overrides_config():
    cfg = GenConfig.for_regime(5, "sparse", seed=1)
    a = run_experiment("sid-vs-shd", cfg, 5, seed=9, workers=1)
    b = run_experiment("sid-vs-shd", GenConfig.for_regime(5, "sparse", seed=9), 5, workers=1)
    assert a == b


def test_scaling_rows():
    rows = run_experiment("scaling", GenConfig.for_regime(5, "sparse", seed=1), 3, p_grid=[5, 10], repeats=2)
    assert [r.p for r in rows] == [5, 5, 5, 10, 10, 10]
    assert all(r.wall_time_ns > 0 for r in rows)
    med = median_times(rows)
    assert list(med) == [5, 10]
    ((a, b, ratio),) = growth_ratios(rows)
    assert (a, b) == (5, 10) and ratio > 0


def test_unknown_kind():
    with pytest.raises(ValueError):
        run_experiment("sid-vs-time", GenConfig(5, 0.3), 1)


def test_worker_count(monkeypatch):
    monkeypatch.setenv("SIDKIT_THREADS", "3")
    assert worker_count() == 3
    monkeypatch.setenv("SIDKIT_THREADS", "0")
    assert worker_count() >= 1
    monkeypatch.setenv("SIDKIT_THREADS", "-1")
    with pytest.raises(ValueError):
        worker_count()
