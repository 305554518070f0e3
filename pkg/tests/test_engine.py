"""Tests for experiment orchestration"""

import threading

import pytest

from sohot.config import ConfigError, resolve_run_config
from sohot.engine import (
    build_model,
    gather_in_threads,
    run_alpha_sweep,
    run_comparison,
    run_experiment,
)
from sohot.evaluation.pool import ModelPool
from sohot.models import HT_LIMIT_DEFAULT, ModelKind
from sohot.trees.hoeffding import HoeffdingTree
from sohot.trees.soft_tree import SoftTree
from sohot.trees.sohot import SoHoTree


def _config(**flat):
    flat = {"instances": 300, "window": 100, "grace": 50, **flat}
    return resolve_run_config(flat, environ={}, discover=False)


class TestBuildModel:
    """Test model construction per kind"""

    def test_kinds(self):
        config = _config()
        assert isinstance(build_model(config, ModelKind.SOHOT, 3, 2, 0), SoHoTree)
        assert isinstance(build_model(config, ModelKind.HT, 3, 2, 0), HoeffdingTree)
        assert isinstance(build_model(config, ModelKind.ST, 3, 2, 0), SoftTree)

    def test_ht_limit_defaults_to_full_tree_size(self):
        limited = build_model(_config(), ModelKind.HT_LIMIT, 3, 2, 0)
        assert limited.params.internal_node_limit == HT_LIMIT_DEFAULT == 127
        plain = build_model(_config(), ModelKind.HT, 3, 2, 0)
        assert plain.params.internal_node_limit is None

    def test_explicit_node_limit_wins(self):
        limited = build_model(_config(node_limit=10), ModelKind.HT_LIMIT, 3, 2, 0)
        assert limited.params.internal_node_limit == 10

    def test_overrides(self):
        tree = build_model(_config(), ModelKind.SOHOT, 3, 2, 0, {"alpha": 0.9})
        assert tree.params.alpha == 0.9

    def test_pool(self):
        config = _config(model="pool", pool_model="ht", pool_size=3)
        pool = build_model(config, ModelKind.POOL, 3, 2, 0)
        assert isinstance(pool, ModelPool)
        assert len(pool) == 3
        assert pool.assignments[0] == {
            "leaf_prediction": "mc",
            "delta": 1e-6,
            "grace_period": 200,
        }


class TestGatherInThreads:
    async def test_results_keep_job_order(self):
        jobs = [lambda i=i: i * i for i in range(10)]
        assert await gather_in_threads(jobs, workers=3) == [i * i for i in range(10)]

    async def test_single_worker_runs_inline(self):
        thread = threading.get_ident()
        jobs = [lambda: threading.get_ident()]
        assert await gather_in_threads(jobs, workers=1) == [thread]

    async def test_errors_propagate(self):
        def fail():
            raise RuntimeError("boom")

        with pytest.raises(RuntimeError, match="boom"):
            await gather_in_threads([fail, lambda: 1], workers=2)


class TestExperiments:
    """Test repetitions, comparisons and alpha sweeps"""

    async def test_parallel_equals_sequential(self):
        sequential = await run_experiment(_config(reps=3, workers=1))
        parallel = await run_experiment(_config(reps=3, workers=3))
        assert sequential.report.model_dump() == parallel.report.model_dump()
        assert [r.seed for r in parallel.report.repetitions] == [42, 43, 44]
        assert sequential.model.dump() == parallel.model.dump()

    async def test_comparison_shares_streams(self):
        results = await run_comparison(_config(reps=2), [ModelKind.SOHOT, ModelKind.HT])
        assert [r.report.model for r in results] == ["sohot", "ht"]
        for result in results:
            assert [r.seed for r in result.report.repetitions] == [42, 43]

    async def test_comparison_needs_two_models(self):
        with pytest.raises(ConfigError, match="at least two"):
            await run_comparison(_config(), [ModelKind.SOHOT])

    async def test_alpha_sweep(self):
        rows = await run_alpha_sweep(_config(), [0.0, 1.0], include_st=True)
        assert [(r.model, r.alpha) for r in rows] == [
            ("sohot", 0.0),
            ("sohot", 1.0),
            ("st", 1.0),
        ]
        assert rows[2].transparency_ratio is not None
        assert all(r.auroc is not None for r in rows)
