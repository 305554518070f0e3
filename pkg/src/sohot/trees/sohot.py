"""Soft Hoeffding tree"""

import logging

import numpy as np

from sohot.core.normalize import RunningNormalizer, normalize
from sohot.core.numerics import (
    ContractViolationError,
    SmoothStepParams,
    softmax,
    softmax_cross_entropy,
)
from sohot.core.optim import AdamState, adam_update
from sohot.models import SoHoTParams
from sohot.trees.base import Evaluation, StreamClassifier, TreeDiagnostics
from sohot.trees.dump import header_line, internal_line, leaf_line
from sohot.trees.observers import LeafStats, SplitDecision, SplitTest, decide_split
from sohot.trees.routing import (
    Gradients,
    InternalNode,
    LeafNode,
    Node,
    TraversalTrace,
    backward_pass,
    check_input,
    forward_pass,
    iter_nodes,
    routing_probability,
)
from sohot.trees.transparency import transparency_count

logger = logging.getLogger(__name__)


def update_leaf_statistics(
    leaf: LeafNode,
    x: np.ndarray,
    y: int,
    reach_prob: float,
    epsilon_s: float,
    max_depth: int,
) -> bool:
    """Count one unweighted observation if the leaf is shallow and well reached

    Returns:
        True if the statistics were updated
    """
    if leaf.stats is None or leaf.depth > max_depth or reach_prob <= epsilon_s:
        return False
    leaf.stats.observe(x, y)
    return True


class SoHoTree(StreamClassifier):
    """Incrementally growing tree with soft routing

    Starts as a single leaf. Internal nodes route with
    ``alpha * S(<w, x>) + (1 - alpha) * 1(x[a] < theta)``; leaves collect
    Hoeffding statistics and split once the bound allows it.
    """

    def __init__(
        self,
        n_features: int,
        n_classes: int,
        params: SoHoTParams | None = None,
    ) -> None:
        if n_features < 1 or n_classes < 1:
            msg = "n_features and n_classes must be >= 1"
            raise ContractViolationError(msg)
        self.n_features = n_features
        self.n_classes = n_classes
        self.params = params or SoHoTParams()
        self.gate = SmoothStepParams(gamma=self.params.gamma)
        self.normalizer = (
            RunningNormalizer(n_features) if self.params.normalize else None
        )
        self.root: Node = self._new_leaf(np.zeros(n_classes), depth=0)
        self.version = 0
        self.last_grad_output_norm: float | None = None
        self.last_split: SplitDecision | None = None

    @property
    def alpha(self) -> float:
        return self.params.alpha

    def _new_leaf(self, output_weight: np.ndarray, depth: int) -> LeafNode:
        return LeafNode(
            output_weight=output_weight.astype(float, copy=True),
            depth=depth,
            stats=LeafStats(self.n_features, self.n_classes),
            optimizer=AdamState.fresh(self.n_classes, self.params.learning_rate),
        )

    # forward / backward

    def forward(
        self, x: np.ndarray, *, prune: bool = True
    ) -> tuple[np.ndarray, TraversalTrace]:
        """Logits and traversal trace for an already normalized input"""
        x = check_input(x, self.n_features)
        return forward_pass(
            self.root,
            x,
            alpha=self.alpha,
            gate=self.gate,
            version=self.version,
            n_classes=self.n_classes,
            prune=prune,
        )

    def backward(self, trace: TraversalTrace, grad_output: np.ndarray) -> Gradients:
        """Gradients for every weight reached by ``trace``"""
        if grad_output.shape != (self.n_classes,):
            msg = f"grad_output must have length {self.n_classes}"
            raise ContractViolationError(msg)
        return backward_pass(
            trace, grad_output, alpha=self.alpha, gate=self.gate, version=self.version
        )

    def _prepare(self, x: np.ndarray, *, training: bool) -> np.ndarray:
        x = check_input(x, self.n_features)
        if self.normalizer is None:
            return x
        return normalize(self.normalizer, x, training=training)

    # StreamClassifier

    def predict_logits(self, x: np.ndarray) -> np.ndarray:
        logits, _ = self.forward(self._prepare(x, training=False))
        return logits

    def predict_proba(self, x: np.ndarray) -> np.ndarray:
        return softmax(self.predict_logits(x))

    def evaluate_one(self, x: np.ndarray) -> Evaluation:
        z = self._prepare(x, training=False)
        logits, trace = self.forward(z)
        counts = [
            transparency_count(visit.node.weight, z, self.alpha)
            for visit in trace.internals
        ]
        return Evaluation(proba=softmax(logits), transparency_counts=counts)

    def learn_one(self, x: np.ndarray, y: int) -> None:
        self.train_step(x, y)

    def train_step(self, x: np.ndarray, y: int) -> float:
        """One test-free training step; returns the loss before the update"""
        if not 0 <= y < self.n_classes:
            msg = f"label must be in [0, {self.n_classes}), got {y}"
            raise ContractViolationError(msg)
        z = self._prepare(x, training=True)
        logits, trace = self.forward(z)
        loss, grad_output = softmax_cross_entropy(logits, y)
        self.last_grad_output_norm = float(np.linalg.norm(grad_output))

        grads = self.backward(trace, grad_output)

        touched: list[LeafNode] = []
        for visit in trace.leaves:
            leaf = visit.node
            leaf.samples_seen += 1
            if update_leaf_statistics(
                leaf,
                z,
                y,
                visit.reach,
                self.params.epsilon_s,
                self.params.max_depth,
            ):
                touched.append(leaf)

        self._apply_gradients(grads)

        # only leaves whose counter moved can be due for an attempt
        for leaf in touched:
            stats = leaf.stats
            if stats is not None and (
                stats.samples_since_last_attempt >= self.params.grace_period
            ):
                self.attempt_split(leaf)
        return loss

    def _apply_gradients(self, grads: Gradients) -> None:
        for node, grad in grads.weights:
            if node.optimizer is not None and np.any(grad):
                adam_update(node.optimizer, node.weight, grad)
        for leaf, grad in grads.outputs:
            if leaf.optimizer is not None and np.any(grad):
                adam_update(leaf.optimizer, leaf.output_weight, grad)

    # growth

    def attempt_split(self, leaf: LeafNode) -> bool:
        """Run the Hoeffding split test on ``leaf`` and split it when it passes"""
        stats = leaf.stats
        if stats is None:
            return False
        stats.samples_since_last_attempt = 0
        if stats.observed_classes() < 2 or leaf.depth >= self.params.max_depth:
            return False

        decision = decide_split(
            stats,
            delta=self.params.delta,
            tau=self.params.tau,
            n_candidates=self.params.n_candidate_thresholds,
        )
        self.last_split = decision
        if not decision.should_split or decision.best is None:
            return False

        split = SplitTest(decision.best.feature_index, decision.best.threshold)
        self._split_leaf(leaf, split)
        logger.info(
            "Split leaf at depth %d on feature %d < %.6g (gain margin %.4f, eps %.4f)",
            leaf.depth,
            split.feature_index,
            split.threshold,
            decision.gain_margin,
            decision.epsilon,
        )
        return True

    def _split_leaf(self, leaf: LeafNode, split: SplitTest) -> InternalNode:
        depth = leaf.depth
        left = self._new_leaf(leaf.output_weight, depth + 1)
        right = self._new_leaf(leaf.output_weight, depth + 1)
        node = InternalNode(
            weight=np.zeros(self.n_features),
            left=left,
            right=right,
            depth=depth,
            split=split,
            optimizer=AdamState.fresh(self.n_features, self.params.learning_rate),
            parent=leaf.parent,
        )
        left.parent = node
        right.parent = node

        parent = leaf.parent
        if parent is None:
            self.root = node
        elif parent.left is leaf:
            parent.left = node
        else:
            parent.right = node
        self.version += 1
        return node

    # inspection

    def nodes(self) -> list[Node]:
        return iter_nodes(self.root)

    def leaves(self) -> list[LeafNode]:
        return [n for n in self.nodes() if isinstance(n, LeafNode)]

    def diagnostics(self) -> TreeDiagnostics:
        nodes = self.nodes()
        leaves = [n for n in nodes if isinstance(n, LeafNode)]
        return TreeDiagnostics(
            node_count=len(nodes),
            leaf_count=len(leaves),
            depth=max(leaf.depth for leaf in leaves),
            last_grad_output_norm=self.last_grad_output_norm,
        )

    def dump(self) -> str:
        lines = [
            header_line(
                "sohot", self.n_features, self.n_classes, len(self.nodes())
            )
        ]
        for node in self.nodes():
            if isinstance(node, LeafNode):
                lines.append(
                    leaf_line(node.depth, softmax(node.output_weight), node.samples_seen)
                )
            else:
                split = node.split
                lines.append(
                    internal_line(
                        node.depth,
                        split.feature_index if split else None,
                        split.threshold if split else None,
                        float(np.linalg.norm(node.weight)),
                    )
                )
        return "\n".join(lines) + "\n"


def brute_force_logits(tree: SoHoTree, x: np.ndarray) -> np.ndarray:
    """Sum over all leaves of path probability times output weight"""
    total = np.zeros(tree.n_classes)

    def walk(node: Node, reach: float) -> None:
        nonlocal total
        if isinstance(node, LeafNode):
            total = total + reach * node.output_weight
            return
        p = routing_probability(node, x, tree.alpha, tree.gate)
        walk(node.left, reach * p)
        walk(node.right, reach * (1.0 - p))

    walk(tree.root, 1.0)
    return total


def forward(
    tree: SoHoTree, x: np.ndarray, *, prune: bool = True
) -> tuple[np.ndarray, TraversalTrace]:
    return tree.forward(x, prune=prune)


def backward(
    tree: SoHoTree, trace: TraversalTrace, grad_output: np.ndarray
) -> Gradients:
    return tree.backward(trace, grad_output)


def attempt_split(tree: SoHoTree, leaf: LeafNode) -> bool:
    return tree.attempt_split(leaf)


def train_step(tree: SoHoTree, x: np.ndarray, y: int) -> float:
    return tree.train_step(x, y)


def diagnostics(tree: SoHoTree) -> TreeDiagnostics:
    return tree.diagnostics()
