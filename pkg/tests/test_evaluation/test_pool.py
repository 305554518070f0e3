"""Tests for the model pool"""

import math

import numpy as np
import pytest

from sohot.evaluation.pool import (
    ModelPool,
    decayed_estimate,
    hyperparameter_grid,
    pool_predict_train,
)
from sohot.evaluation.prequential import prequential_repetition
from sohot.models import ModelKind, PrequentialConfig, SoHoTParams, StreamSpec
from sohot.streams import build_stream
from sohot.trees.sohot import SoHoTree
from tests.factories import ConstantModel


def _pool():
    members = [
        ConstantModel([0.6, 0.4]),
        ConstantModel([0.9, 0.1]),
        ConstantModel([0.2, 0.8]),
        ConstantModel([0.5, 0.5]),
    ]
    return ModelPool(members, decay=0.99), members


class TestDecayedEstimate:
    def test_infinite_estimate_takes_the_loss(self):
        assert decayed_estimate(math.inf, 2.0, 0.99) == 2.0

    def test_decay_from_zero(self):
        assert decayed_estimate(0.0, 3.0, 0.99) == pytest.approx(0.03)

    def test_converges_to_constant_loss(self):
        estimate = math.inf
        for _ in range(2000):
            estimate = decayed_estimate(estimate, 0.7, 0.99)
        assert estimate == pytest.approx(0.7)


class TestModelPool:
    """Test serving and training selection"""

    def test_first_instance_is_served_by_member_zero(self):
        pool, _ = _pool()
        assert pool.serving_index == 0
        np.testing.assert_array_equal(pool.predict_proba(np.zeros(2)), [0.6, 0.4])

    def test_serves_lowest_estimate(self):
        pool, _ = _pool()
        pool.learn_one(np.zeros(2), 0)
        np.testing.assert_allclose(
            pool.estimates, [-math.log(0.6), -math.log(0.9), -math.log(0.2), math.log(2)]
        )
        assert pool.serving_index == 1
        np.testing.assert_array_equal(pool.evaluate_one(np.ones(2)).proba, [0.9, 0.1])

    def test_trains_the_better_half(self):
        pool, members = _pool()
        pool.learn_one(np.zeros(2), 0)
        assert pool.last_step.served == 0
        assert pool.last_step.trained == [0, 1]
        assert [m.learned for m in members] == [1, 1, 0, 0]
        assert np.all(np.isinf(pool.last_step.estimates_before))

    def test_odd_pool_rounds_up(self):
        members = [ConstantModel([0.5, 0.5]) for _ in range(3)]
        pool = ModelPool(members)
        pool.learn_one(np.zeros(2), 1)
        assert pool.n_trained == 2
        assert pool.last_step.trained == [0, 1]

    def test_ties_go_to_lower_index(self):
        members = [ConstantModel([0.5, 0.5]) for _ in range(4)]
        pool = ModelPool(members)
        for _ in range(5):
            pool.learn_one(np.zeros(2), 0)
        assert pool.serving_index == 0
        assert pool.last_step.trained == [0, 1]

    def test_members_evaluated_once_per_instance(self):
        pool, members = _pool()
        x = np.array([1.0, 2.0])
        proba = pool_predict_train(pool, x, 0)
        np.testing.assert_array_equal(proba, [0.6, 0.4])
        assert all(m.calls.count(("predict", None)) == 1 for m in members)

    def test_empty_pool(self):
        with pytest.raises(ValueError, match="at least one member"):
            ModelPool([])

    def test_dump_names_the_serving_member(self):
        pool, _ = _pool()
        pool.assignments = [{"alpha": a} for a in (0.1, 0.2, 0.3, 0.4)]
        pool.learn_one(np.zeros(2), 0)
        assert pool.dump().startswith("# pool member 1 of 4 {'alpha': 0.2}\n# constant")

    def test_single_member_pool_matches_plain_model(self):
        """Test that a pool of one behaves like the member on its own"""
        spec = StreamSpec(n_instances=400)
        config = PrequentialConfig(n_instances=400, window=100)
        params = SoHoTParams(grace_period=50)
        plain = prequential_repetition(
            SoHoTree(3, 2, params), build_stream(spec, seed=2), config
        )
        pooled = prequential_repetition(
            ModelPool([SoHoTree(3, 2, params)]), build_stream(spec, seed=2), config
        )
        assert pooled.ce_loss == plain.ce_loss
        assert pooled.auroc == plain.auroc
        assert pooled.node_count == plain.node_count


class TestHyperparameterGrid:
    def test_sizes(self):
        assert len(hyperparameter_grid(ModelKind.SOHOT)) == 18
        assert len(hyperparameter_grid(ModelKind.HT)) == 18
        assert len(hyperparameter_grid(ModelKind.ST)) == 18

    def test_hyperplane_gammas(self):
        gammas = {p["gamma"] for p in hyperparameter_grid(ModelKind.SOHOT, hyperplane=True)}
        assert gammas == {0.5, 0.1}

    def test_truncation_keeps_order(self):
        full = hyperparameter_grid(ModelKind.HT)
        assert hyperparameter_grid(ModelKind.HT, size=4) == full[:4]

    def test_pool_kind_has_no_grid(self):
        with pytest.raises(ValueError, match="pool"):
            hyperparameter_grid(ModelKind.POOL)
