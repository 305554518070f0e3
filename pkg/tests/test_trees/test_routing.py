"""Tests for soft routing, the forward recurrence and the backward pass"""

import numpy as np
import pytest

from sohot.core.numerics import (
    ContractViolationError,
    SmoothStepParams,
    softmax_cross_entropy,
)
from sohot.models import SoftTreeParams, SoHoTParams
from sohot.trees.observers import SplitTest
from sohot.trees.routing import InternalNode, LeafNode, routing_probability
from sohot.trees.soft_tree import SoftTree
from sohot.trees.sohot import SoHoTree, brute_force_logits
from tests.factories import random_structure


def _node(weight, split=None):
    leaf = LeafNode(output_weight=np.zeros(2), depth=1)
    return InternalNode(
        weight=np.asarray(weight, dtype=float),
        left=leaf,
        right=LeafNode(output_weight=np.zeros(2), depth=1),
        depth=0,
        split=split,
    )


def _tree(n_features, n_classes, seed, *, alpha, gamma=1.0, depth=3, scale=1.0):
    tree = SoHoTree(
        n_features,
        n_classes,
        SoHoTParams(alpha=alpha, gamma=gamma, normalize=False),
    )
    rng = np.random.default_rng(seed)
    tree.root = random_structure(rng, n_features, n_classes, depth, weight_scale=scale)
    return tree, rng


class TestRoutingProbability:
    """Test the mixed gate and split-test routing"""

    def test_pure_indicator(self):
        node = _node([0.7, -0.2], SplitTest(0, 2.0))
        gate = SmoothStepParams(gamma=1.0)
        assert routing_probability(node, np.array([1.0, 9.0]), 0.0, gate) == 1.0
        assert routing_probability(node, np.array([2.0, 9.0]), 0.0, gate) == 0.0

    def test_pure_gate(self):
        node = _node([0.0, 0.0], SplitTest(0, 2.0))
        gate = SmoothStepParams(gamma=1.0)
        assert routing_probability(node, np.array([5.0, 1.0]), 1.0, gate) == 0.5

    def test_mixed(self):
        node = _node([0.0, 0.0], SplitTest(0, 2.0))
        gate = SmoothStepParams(gamma=1.0)
        p = routing_probability(node, np.array([5.0, 1.0]), 0.3, gate)
        assert p == pytest.approx(0.15)

    def test_saturated_gate_gives_exact_bounds(self):
        """Test that a saturated gate agreeing with the split test yields exact 0 and 1"""
        node = _node([-10.0, 0.0], SplitTest(0, 0.0))
        gate = SmoothStepParams(gamma=1.0)
        assert routing_probability(node, np.array([1.0, 0.0]), 0.37, gate) == 0.0
        assert routing_probability(node, np.array([-1.0, 0.0]), 0.37, gate) == 1.0


class TestForward:
    """Test the subtree recurrence"""

    def test_single_leaf_prediction(self):
        tree = SoHoTree(3, 2, SoHoTParams(normalize=False))
        tree.root.output_weight = np.array([0.2, 0.8])
        logits, trace = tree.forward(np.array([1.0, -4.0, 9.0]))
        np.testing.assert_array_equal(logits, [0.2, 0.8])
        assert len(trace.leaves) == 1
        assert trace.leaves[0].reach == 1.0

    def test_certain_left_route_skips_right(self):
        tree = SoHoTree(2, 2, SoHoTParams(alpha=0.0, normalize=False))
        node = tree._split_leaf(tree.root, SplitTest(0, 0.0))
        node.left.output_weight = np.array([1.0, 2.0])
        node.right.output_weight = np.array([3.0, 4.0])

        logits, trace = tree.forward(np.array([-1.0, 0.0]))
        np.testing.assert_array_equal(logits, [1.0, 2.0])
        assert [v.node for v in trace.leaves] == [node.left]

    def test_dimension_mismatch(self):
        tree = SoHoTree(3, 2)
        with pytest.raises(ContractViolationError, match="length 3"):
            tree.forward(np.zeros(2))

    def test_non_finite_input(self):
        tree = SoHoTree(2, 2)
        with pytest.raises(ContractViolationError, match="finite"):
            tree.forward(np.array([np.nan, 0.0]))

    @pytest.mark.parametrize("alpha", [0.0, 0.3, 0.8, 1.0])
    def test_matches_brute_force(self, alpha):
        """Test the recurrence against the sum of path products over all leaves"""
        for seed in range(50):
            tree, rng = _tree(4, 3, seed, alpha=alpha)
            x = rng.normal(size=4)
            logits, _ = tree.forward(x)
            np.testing.assert_allclose(logits, brute_force_logits(tree, x), atol=1e-12)

    def test_probability_conservation(self):
        """Test that reach probabilities of the visited leaves sum to one"""
        for seed in range(100):
            tree, rng = _tree(5, 2, seed, alpha=float(seed % 11) / 10, depth=4)
            soft = SoftTree(5, 2, SoftTreeParams(depth=3, normalize=False), seed=seed)
            for _ in range(50):
                x = rng.normal(size=5) * 2
                for model in (tree, soft):
                    _, trace = model.forward(x)
                    total = sum(v.reach for v in trace.leaves)
                    assert abs(total - 1.0) <= 1e-12

    def test_pruning_changes_no_bit(self):
        """Test that visiting zero-probability subtrees leaves outputs and gradients intact"""
        for seed in range(100):
            tree, rng = _tree(3, 3, seed, alpha=float(seed % 5) / 4, depth=4, scale=5.0)
            x = rng.normal(size=3)
            g = rng.normal(size=3)

            pruned, trace = tree.forward(x)
            full, full_trace = tree.forward(x, prune=False)
            np.testing.assert_array_equal(pruned, full)

            grads = tree.backward(trace, g)
            full_grads = tree.backward(full_trace, g)
            np.testing.assert_array_equal(grads.grad_x, full_grads.grad_x)

            full_w = {id(n): gw for n, gw in full_grads.weights}
            full_o = {id(n): go for n, go in full_grads.outputs}
            seen_w = {id(n) for n, _ in grads.weights}
            seen_o = {id(n) for n, _ in grads.outputs}
            for node, gw in grads.weights:
                np.testing.assert_array_equal(gw, full_w[id(node)])
            for node, go in grads.outputs:
                np.testing.assert_array_equal(go, full_o[id(node)])
            for key, gw in full_w.items():
                if key not in seen_w:
                    assert not np.any(gw)
            for key, go in full_o.items():
                if key not in seen_o:
                    assert not np.any(go)


class TestLimits:
    """Test the alpha = 0 and alpha = 1 limits"""

    def test_alpha_zero_is_a_hard_tree(self):
        for seed in range(100):
            tree, rng = _tree(4, 3, seed, alpha=0.0, depth=4)
            x = rng.normal(size=4)
            logits, trace = tree.forward(x)

            node = tree.root
            while isinstance(node, InternalNode):
                node = node.left if node.split.goes_left(x) else node.right
            assert [v.node for v in trace.leaves] == [node]
            assert trace.leaves[0].reach == 1.0
            np.testing.assert_array_equal(logits, node.output_weight)

    def test_alpha_one_equals_soft_tree(self):
        """Test that a copied soft tree reproduces the logits bit for bit"""
        params = SoftTreeParams(depth=1, gamma=2.0, normalize=False)
        rng = np.random.default_rng(7)
        for seed in range(10):
            tree, _ = _tree(4, 3, seed, alpha=1.0, gamma=2.0, depth=3)
            soft = SoftTree.from_structure(tree.root, 4, 3, params)
            for _ in range(100):
                x = rng.normal(size=4)
                np.testing.assert_array_equal(tree.forward(x)[0], soft.forward(x)[0])


class TestBackward:
    """Test the hand-derived gradients"""

    def test_single_leaf(self):
        tree = SoHoTree(3, 2, SoHoTParams(normalize=False))
        _, trace = tree.forward(np.array([1.0, 2.0, 3.0]))
        g = np.array([0.3, -0.3])
        grads = tree.backward(trace, g)
        np.testing.assert_array_equal(grads.outputs[0][1], g)
        np.testing.assert_array_equal(grads.grad_x, np.zeros(3))
        assert grads.weights == []

    def test_alpha_zero_has_no_weight_gradient(self):
        for seed in range(20):
            tree, rng = _tree(4, 2, seed, alpha=0.0)
            _, trace = tree.forward(rng.normal(size=4))
            grads = tree.backward(trace, rng.normal(size=2))
            assert all(not np.any(gw) for _, gw in grads.weights)
            assert not np.any(grads.grad_x)

    def test_stale_trace_is_rejected(self):
        tree = SoHoTree(2, 2, SoHoTParams(normalize=False))
        _, trace = tree.forward(np.zeros(2))
        tree._split_leaf(tree.root, SplitTest(0, 0.0))
        with pytest.raises(ContractViolationError, match="tree version"):
            tree.backward(trace, np.zeros(2))

    def test_grad_output_length(self):
        tree = SoHoTree(2, 3)
        _, trace = tree.forward(np.zeros(2))
        with pytest.raises(ContractViolationError, match="grad_output"):
            tree.backward(trace, np.zeros(2))

    def test_matches_finite_differences(self):
        """Test every gradient against central differences of the composed loss"""
        h = 1e-5

        def loss(tree, x, y):
            logits, _ = tree.forward(x)
            return softmax_cross_entropy(logits, y)[0]

        def numeric(tree, vector, j, x, y):
            original = vector[j]
            vector[j] = original + h
            up = loss(tree, x, y)
            vector[j] = original - h
            down = loss(tree, x, y)
            vector[j] = original
            return (up - down) / (2 * h)

        for seed in range(100):
            rng = np.random.default_rng(seed)
            p = int(rng.integers(1, 9))
            k = int(rng.integers(2, 5))
            alpha = float(rng.uniform(0.05, 1.0))
            tree, rng = _tree(p, k, seed, alpha=alpha, gamma=8.0, scale=0.5)
            x = rng.normal(size=p)
            y = int(rng.integers(k))

            logits, trace = tree.forward(x)
            _, g = softmax_cross_entropy(logits, y)
            grads = tree.backward(trace, g)
            by_weight = {id(n): gw for n, gw in grads.weights}
            by_output = {id(n): go for n, go in grads.outputs}

            for node in tree.nodes():
                if isinstance(node, InternalNode):
                    analytic = by_weight.get(id(node), np.zeros(p))
                    vector = node.weight
                else:
                    analytic = by_output.get(id(node), np.zeros(k))
                    vector = node.output_weight
                for j in range(vector.shape[0]):
                    expected = numeric(tree, vector, j, x, y)
                    assert analytic[j] == pytest.approx(expected, rel=1e-4, abs=1e-7)

            for j in range(p):
                expected = numeric(tree, x, j, x, y)
                assert grads.grad_x[j] == pytest.approx(expected, rel=1e-4, abs=1e-7)
