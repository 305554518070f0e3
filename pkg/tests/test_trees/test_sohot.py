"""Tests for the soft Hoeffding tree: statistics, splitting and training"""

import math

import numpy as np
import pytest
from scipy.stats import norm

from sohot.core.numerics import ContractViolationError
from sohot.models import SoHoTParams
from sohot.trees.observers import LeafStats, SplitTest, decide_split, hoeffding_bound
from sohot.trees.routing import InternalNode, LeafNode
from sohot.trees.sohot import (
    SoHoTree,
    attempt_split,
    train_step,
    update_leaf_statistics,
)


def _separable(rng, n):
    """Two features; class 0 iff x0 < 0, x1 is noise"""
    x = rng.uniform(-1.0, 1.0, size=(n, 2))
    y = (x[:, 0] >= 0).astype(int)
    return x, y


def _bits(counts):
    total = sum(counts)
    return -sum(c / total * math.log2(c / total) for c in counts if c > 0)


def _oracle_margin(x, y, n_candidates=10):
    """Best-minus-second gain recomputed from the raw samples"""
    n = len(y)
    classes = sorted(set(y.tolist()))
    prior = [int(np.sum(y == c)) for c in classes]
    base = _bits(prior)
    gains = [0.0]
    for j in range(x.shape[1]):
        lo, hi = x[:, j].min(), x[:, j].max()
        best = -math.inf
        for i in range(1, n_candidates + 1):
            theta = lo + (hi - lo) * i / (n_candidates + 1)
            left, right = [], []
            for c, count in zip(classes, prior, strict=True):
                values = x[y == c, j]
                mass = count * norm.cdf((theta - values.mean()) / values.std(ddof=1))
                left.append(mass)
                right.append(count - mass)
            children = (sum(left) * _bits(left) + sum(right) * _bits(right)) / n
            best = max(best, base - children)
        gains.append(best)
    gains.sort(reverse=True)
    return gains[0] - gains[1]


class TestUpdateLeafStatistics:
    """Test the reach cutoff for leaf statistics"""

    def _leaf(self, depth=0):
        return LeafNode(output_weight=np.zeros(2), depth=depth, stats=LeafStats(2, 2))

    def test_below_cutoff(self):
        leaf = self._leaf()
        assert not update_leaf_statistics(leaf, np.zeros(2), 1, 0.1, 0.25, 7)
        assert leaf.stats.total == 0

    def test_at_cutoff_is_excluded(self):
        leaf = self._leaf()
        assert not update_leaf_statistics(leaf, np.zeros(2), 1, 0.25, 0.25, 7)

    def test_reached(self):
        leaf = self._leaf()
        assert update_leaf_statistics(leaf, np.zeros(2), 1, 1.0, 0.25, 7)
        np.testing.assert_array_equal(leaf.stats.class_counts, [0, 1])

    def test_too_deep(self):
        leaf = self._leaf(depth=8)
        assert not update_leaf_statistics(leaf, np.zeros(2), 1, 1.0, 0.25, 7)

    def test_counts(self, rng):
        leaf = self._leaf()
        labels = [0] * 60 + [1] * 40
        for y in rng.permutation(labels):
            update_leaf_statistics(leaf, rng.normal(size=2), int(y), 0.9, 0.25, 7)
        np.testing.assert_array_equal(leaf.stats.class_counts, [60, 40])
        assert np.all(leaf.stats.m2 >= 0)


class TestHoeffdingBound:
    """Test the bound formula"""

    def test_values(self):
        assert hoeffding_bound(1.0, 1 / math.e, 1) == pytest.approx(math.sqrt(0.5))
        assert hoeffding_bound(1.0, 1e-7, 200) == pytest.approx(0.2007, abs=1e-4)

    def test_doubling_n(self):
        eps = hoeffding_bound(1.0, 1e-7, 300)
        assert hoeffding_bound(1.0, 1e-7, 600) == pytest.approx(eps / math.sqrt(2))

    def test_strictly_decreasing(self):
        values = [hoeffding_bound(2.0, 1e-3, n) for n in range(1, 50)]
        assert all(b < a for a, b in zip(values, values[1:], strict=False))

    def test_zero_samples(self):
        with pytest.raises(ContractViolationError, match="n must be >= 1"):
            hoeffding_bound(1.0, 1e-7, 0)


class TestAttemptSplit:
    """Test the Hoeffding split decision"""

    def _tree(self, **params):
        return SoHoTree(2, 2, SoHoTParams(normalize=False, **params))

    def test_single_class_never_splits(self, rng):
        tree = self._tree()
        for x in rng.normal(size=(500, 2)):
            tree.root.stats.observe(x, 0)
        assert not attempt_split(tree, tree.root)
        assert isinstance(tree.root, LeafNode)
        assert tree.root.stats.samples_since_last_attempt == 0

    def test_depth_cap(self, rng):
        tree = self._tree(max_depth=1)
        node = tree._split_leaf(tree.root, SplitTest(0, 0.0))
        leaf = node.left
        x, y = _separable(rng, 500)
        for xi, yi in zip(x, y, strict=True):
            leaf.stats.observe(xi, int(yi))
        assert not tree.attempt_split(leaf)
        assert tree.diagnostics().node_count == 3

    def test_separable_oracle(self, rng):
        """Test the decision against an independent gain and bound computation"""
        tree = self._tree(delta=1e-7, tau=0.05)
        x, y = _separable(rng, 500)
        for xi, yi in zip(x, y, strict=True):
            tree.root.stats.observe(xi, int(yi))

        decision = decide_split(tree.root.stats, delta=1e-7, tau=0.05)
        epsilon = math.sqrt(math.log(1e7) / (2 * 500))
        assert decision.epsilon == pytest.approx(epsilon, abs=1e-12)
        assert decision.gain_margin == pytest.approx(_oracle_margin(x, y), abs=1e-9)
        assert decision.best.feature_index == 0
        assert decision.gain_margin > decision.epsilon

        old_output = tree.root.output_weight.copy()
        assert tree.attempt_split(tree.root)
        root = tree.root
        assert isinstance(root, InternalNode)
        assert root.split.feature_index == 0
        assert abs(root.split.threshold) < 0.2
        assert not np.any(root.weight)
        np.testing.assert_array_equal(root.left.output_weight, old_output)
        np.testing.assert_array_equal(root.right.output_weight, old_output)
        assert root.left.depth == root.right.depth == 1
        assert root.left.stats.total == 0

    def test_more_evidence_keeps_positive_decision(self, rng):
        stats = LeafStats(2, 2)
        x, y = _separable(rng, 300)
        for _ in range(3):
            for xi, yi in zip(x, y, strict=True):
                stats.observe(xi, int(yi))
            assert decide_split(stats, delta=1e-7, tau=0.05).should_split

    def test_tie_break_prefers_lower_feature(self, rng):
        """Test that identical features resolve to the lower index under tau"""
        stats = LeafStats(2, 2)
        for _ in range(400):
            v = rng.uniform(-1, 1)
            stats.observe(np.array([v, v]), int(v >= 0))
        decision = decide_split(stats, delta=1e-7, tau=1.0)
        assert decision.should_split
        assert decision.best.feature_index == 0
        assert decision.gain_margin == 0.0

    def test_no_split_without_margin(self, rng):
        """Test that pure noise with a tiny tau does not split"""
        stats = LeafStats(2, 2)
        for xi in rng.normal(size=(300, 2)):
            stats.observe(xi, int(rng.integers(2)))
        assert not decide_split(stats, delta=1e-7, tau=0.0).should_split


class TestTrainStep:
    """Test training and growth"""

    def test_fresh_tree_loss(self):
        tree = SoHoTree(3, 2)
        loss = train_step(tree, np.array([0.5, 1.0, -2.0]), 0)
        assert loss == pytest.approx(math.log(2))

    def test_repeated_sample_loss_drops(self):
        tree = SoHoTree(2, 2, SoHoTParams(learning_rate=0.05))
        x = np.array([1.0, -1.0])
        losses = [tree.train_step(x, 1) for _ in range(200)]
        assert losses[-1] < 0.1 * losses[0]
        assert tree.last_grad_output_norm is not None

    def test_invalid_label(self):
        with pytest.raises(ContractViolationError, match="label"):
            SoHoTree(2, 2).train_step(np.zeros(2), 2)

    def test_growth_on_separable_stream(self, rng):
        tree = SoHoTree(2, 2, SoHoTParams(grace_period=100, max_depth=3))
        x, y = _separable(rng, 3000)
        counts = []
        for xi, yi in zip(x, y, strict=True):
            tree.learn_one(xi, int(yi))
            diag = tree.diagnostics()
            counts.append(diag.node_count)
            assert diag.node_count == 2 * diag.leaf_count - 1
            assert diag.node_count % 2 == 1
            assert diag.depth <= 3
        assert counts[-1] >= 3
        assert all(b >= a for a, b in zip(counts, counts[1:], strict=False))

    def test_learns_separable_stream(self, rng):
        tree = SoHoTree(2, 2, SoHoTParams(alpha=0.3))
        x, y = _separable(rng, 4000)
        for xi, yi in zip(x, y, strict=True):
            tree.learn_one(xi, int(yi))
        xt, yt = _separable(rng, 500)
        predictions = [int(np.argmax(tree.predict_proba(xi))) for xi in xt]
        assert np.mean(np.array(predictions) == yt) > 0.85


class TestInspection:
    """Test diagnostics and the text dump"""

    def test_fresh_diagnostics(self):
        diag = SoHoTree(2, 2).diagnostics()
        assert (diag.node_count, diag.leaf_count, diag.depth) == (1, 1, 0)
        assert diag.last_grad_output_norm is None

    def test_after_one_split(self):
        tree = SoHoTree(2, 2)
        tree._split_leaf(tree.root, SplitTest(1, 0.5))
        diag = tree.diagnostics()
        assert (diag.node_count, diag.leaf_count, diag.depth) == (3, 2, 1)

    def test_dump(self):
        tree = SoHoTree(2, 2, SoHoTParams(normalize=False))
        tree._split_leaf(tree.root, SplitTest(1, 0.5))
        tree.train_step(np.array([0.0, 0.0]), 0)
        lines = tree.dump().splitlines()
        assert lines[0] == "# sohot p=2 k=2 nodes=3"
        assert lines[1].startswith("I d=0 f=1 th=0.5 |w|=")
        assert lines[2].startswith("  L d=1 p=[")
        assert lines[2].endswith("n=1")
        assert lines[3].startswith("  L d=1 p=[")
