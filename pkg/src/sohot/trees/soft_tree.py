"""Fixed-topology soft tree with smooth-step gates"""

import numpy as np

from sohot.core.normalize import RunningNormalizer, normalize
from sohot.core.numerics import (
    ContractViolationError,
    SmoothStepParams,
    softmax,
    softmax_cross_entropy,
)
from sohot.core.optim import AdamState, adam_update
from sohot.models import SoftTreeParams
from sohot.trees.base import Evaluation, StreamClassifier, TreeDiagnostics
from sohot.trees.dump import header_line, internal_line, leaf_line
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
)
from sohot.trees.transparency import transparency_count

# routing is the pure gate S(<w, x>)
SOFT_ALPHA = 1.0


class SoftTree(StreamClassifier):
    """Complete binary soft tree trained by gradient descent

    The topology is fixed at construction. Forward and backward share the
    routing code of the soft Hoeffding tree with every split test absent.
    """

    def __init__(
        self,
        n_features: int,
        n_classes: int,
        params: SoftTreeParams | None = None,
        *,
        seed: int = 0,
    ) -> None:
        if n_features < 1 or n_classes < 1:
            msg = "n_features and n_classes must be >= 1"
            raise ContractViolationError(msg)
        self.n_features = n_features
        self.n_classes = n_classes
        self.params = params or SoftTreeParams()
        self.gate = SmoothStepParams(gamma=self.params.gamma)
        self.normalizer = (
            RunningNormalizer(n_features) if self.params.normalize else None
        )
        self.version = 0
        self.last_grad_output_norm: float | None = None

        rng = np.random.default_rng(seed)
        self.root: Node = self._build(0, rng, parent=None)

    def _build(
        self, depth: int, rng: np.random.Generator, parent: InternalNode | None
    ) -> Node:
        scale = self.params.init_scale
        lr = self.params.learning_rate
        if depth == self.params.depth:
            return LeafNode(
                output_weight=rng.uniform(-scale, scale, self.n_classes),
                depth=depth,
                optimizer=AdamState.fresh(self.n_classes, lr),
                parent=parent,
            )
        node = InternalNode(
            weight=rng.uniform(-scale, scale, self.n_features),
            left=None,  # type: ignore[arg-type]
            right=None,  # type: ignore[arg-type]
            depth=depth,
            optimizer=AdamState.fresh(self.n_features, lr),
            parent=parent,
        )
        node.left = self._build(depth + 1, rng, node)
        node.right = self._build(depth + 1, rng, node)
        return node

    @classmethod
    def from_structure(
        cls,
        root: Node,
        n_features: int,
        n_classes: int,
        params: SoftTreeParams | None = None,
    ) -> "SoftTree":
        """Soft tree with the topology and weights of ``root``

        Split tests are dropped; weights are copied.
        """
        tree = cls(n_features, n_classes, params)

        def copy(node: Node, parent: InternalNode | None) -> Node:
            lr = tree.params.learning_rate
            if isinstance(node, LeafNode):
                return LeafNode(
                    output_weight=node.output_weight.copy(),
                    depth=node.depth,
                    optimizer=AdamState.fresh(n_classes, lr),
                    parent=parent,
                )
            clone = InternalNode(
                weight=node.weight.copy(),
                left=None,  # type: ignore[arg-type]
                right=None,  # type: ignore[arg-type]
                depth=node.depth,
                optimizer=AdamState.fresh(n_features, lr),
                parent=parent,
            )
            clone.left = copy(node.left, clone)
            clone.right = copy(node.right, clone)
            return clone

        tree.root = copy(root, None)
        return tree

    def forward(
        self, x: np.ndarray, *, prune: bool = True
    ) -> tuple[np.ndarray, TraversalTrace]:
        x = check_input(x, self.n_features)
        return forward_pass(
            self.root,
            x,
            alpha=SOFT_ALPHA,
            gate=self.gate,
            version=self.version,
            n_classes=self.n_classes,
            prune=prune,
        )

    def backward(self, trace: TraversalTrace, grad_output: np.ndarray) -> Gradients:
        if grad_output.shape != (self.n_classes,):
            msg = f"grad_output must have length {self.n_classes}"
            raise ContractViolationError(msg)
        return backward_pass(
            trace,
            grad_output,
            alpha=SOFT_ALPHA,
            gate=self.gate,
            version=self.version,
        )

    def _prepare(self, x: np.ndarray, *, training: bool) -> np.ndarray:
        x = check_input(x, self.n_features)
        if self.normalizer is None:
            return x
        return normalize(self.normalizer, x, training=training)

    def predict_logits(self, x: np.ndarray) -> np.ndarray:
        logits, _ = self.forward(self._prepare(x, training=False))
        return logits

    def predict_proba(self, x: np.ndarray) -> np.ndarray:
        return softmax(self.predict_logits(x))

    def evaluate_one(self, x: np.ndarray) -> Evaluation:
        z = self._prepare(x, training=False)
        logits, trace = self.forward(z)
        counts = [
            transparency_count(visit.node.weight, z, SOFT_ALPHA)
            for visit in trace.internals
        ]
        return Evaluation(proba=softmax(logits), transparency_counts=counts)

    def learn_one(self, x: np.ndarray, y: int) -> None:
        self.train_step(x, y)

    def train_step(self, x: np.ndarray, y: int) -> float:
        """Forward, cross-entropy, backward and one Adam step per touched weight"""
        if not 0 <= y < self.n_classes:
            msg = f"label must be in [0, {self.n_classes}), got {y}"
            raise ContractViolationError(msg)
        z = self._prepare(x, training=True)
        logits, trace = self.forward(z)
        loss, grad_output = softmax_cross_entropy(logits, y)
        self.last_grad_output_norm = float(np.linalg.norm(grad_output))
        grads = self.backward(trace, grad_output)

        for visit in trace.leaves:
            visit.node.samples_seen += 1
        for node, grad in grads.weights:
            if node.optimizer is not None and np.any(grad):
                adam_update(node.optimizer, node.weight, grad)
        for leaf, grad in grads.outputs:
            if leaf.optimizer is not None and np.any(grad):
                adam_update(leaf.optimizer, leaf.output_weight, grad)
        return loss

    def nodes(self) -> list[Node]:
        return iter_nodes(self.root)

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
        nodes = self.nodes()
        lines = [header_line("st", self.n_features, self.n_classes, len(nodes))]
        for node in nodes:
            if isinstance(node, LeafNode):
                lines.append(
                    leaf_line(node.depth, softmax(node.output_weight), node.samples_seen)
                )
            else:
                lines.append(
                    internal_line(
                        node.depth, None, None, float(np.linalg.norm(node.weight))
                    )
                )
        return "\n".join(lines) + "\n"


def st_forward(tree: SoftTree, x: np.ndarray) -> tuple[np.ndarray, TraversalTrace]:
    return tree.forward(x)


def st_backward(
    tree: SoftTree, trace: TraversalTrace, grad_output: np.ndarray
) -> Gradients:
    return tree.backward(trace, grad_output)


def st_train_step(tree: SoftTree, x: np.ndarray, y: int) -> float:
    return tree.train_step(x, y)
