"""Soft routing shared by the soft Hoeffding tree and the soft tree

Forward computes the subtree recurrence
``a(i) = p_i * a(left) + (1 - p_i) * a(right)`` with ``a(leaf) = o_leaf`` and
skips every subtree whose routing probability is exactly zero. The trace
keeps what the backward pass needs, so backward never re-evaluates a gate.
"""

from dataclasses import dataclass, field

import numpy as np

from sohot.core.numerics import (
    ContractViolationError,
    SmoothStepParams,
    check_length,
    smooth_step,
    smooth_step_derivative,
)
from sohot.core.optim import AdamState
from sohot.trees.observers import LeafStats, SplitTest


@dataclass(eq=False)
class LeafNode:
    """Leaf holding an output weight vector o_l"""

    output_weight: np.ndarray
    depth: int
    stats: LeafStats | None = None
    optimizer: AdamState | None = None
    samples_seen: int = 0
    parent: "InternalNode | None" = None

    @property
    def is_leaf(self) -> bool:
        return True


@dataclass(eq=False)
class InternalNode:
    """Internal node with gate weight w_i and an optional univariate split test"""

    weight: np.ndarray
    left: "Node"
    right: "Node"
    depth: int
    split: SplitTest | None = None
    optimizer: AdamState | None = None
    parent: "InternalNode | None" = None

    @property
    def is_leaf(self) -> bool:
        return False


Node = LeafNode | InternalNode


@dataclass(slots=True)
class InternalVisit:
    """Forward quantities of one visited internal node"""

    node: InternalNode
    reach: float
    preactivation: float
    probability: float
    out_left: np.ndarray
    out_right: np.ndarray


@dataclass(slots=True)
class LeafVisit:
    node: LeafNode
    reach: float


@dataclass
class TraversalTrace:
    """Per-instance record of a forward pass"""

    x: np.ndarray
    version: int
    internals: list[InternalVisit] = field(default_factory=list)
    leaves: list[LeafVisit] = field(default_factory=list)


@dataclass
class Gradients:
    """Gradients returned by :func:`backward_pass`"""

    grad_x: np.ndarray
    weights: list[tuple[InternalNode, np.ndarray]]
    outputs: list[tuple[LeafNode, np.ndarray]]


def _mix(node: InternalNode, soft: float, x: np.ndarray, alpha: float) -> float:
    if node.split is None or alpha == 1.0:
        return soft
    hard = 1.0 if x[node.split.feature_index] < node.split.threshold else 0.0
    if alpha == 0.0:
        return hard
    # written as hard + alpha * (soft - hard) so saturated gates give exact 0 and 1
    return hard + alpha * (soft - hard)


def routing_probability(
    node: InternalNode, x: np.ndarray, alpha: float, gate: SmoothStepParams
) -> float:
    """Probability of routing ``x`` to the left child

    ``alpha * S(<w, x>) + (1 - alpha) * 1(x[a] < theta)``; nodes without a
    split test (plain soft trees) contribute no indicator term.
    """
    return _mix(node, smooth_step(float(node.weight @ x), gate), x, alpha)


def forward_pass(
    root: Node,
    x: np.ndarray,
    *,
    alpha: float,
    gate: SmoothStepParams,
    version: int,
    n_classes: int,
    prune: bool = True,
) -> tuple[np.ndarray, TraversalTrace]:
    """Logits of the tree for ``x`` and the trace of visited nodes

    With ``prune=False`` zero-probability subtrees are visited as well; the
    output is unchanged and the extra nodes appear in the trace with reach 0.
    """
    trace = TraversalTrace(x=x, version=version)
    zeros = np.zeros(n_classes)

    def descend(node: Node, reach: float) -> np.ndarray:
        if isinstance(node, LeafNode):
            trace.leaves.append(LeafVisit(node, reach))
            return node.output_weight

        preactivation = float(node.weight @ x)
        p = _mix(node, smooth_step(preactivation, gate), x, alpha)

        visit = InternalVisit(node, reach, preactivation, p, zeros, zeros)
        trace.internals.append(visit)
        if p > 0.0 or not prune:
            visit.out_left = descend(node.left, reach * p)
        if p < 1.0 or not prune:
            visit.out_right = descend(node.right, reach * (1.0 - p))
        return p * visit.out_left + (1.0 - p) * visit.out_right

    logits = descend(root, 1.0)
    return np.array(logits, dtype=float), trace


def backward_pass(
    trace: TraversalTrace,
    grad_output: np.ndarray,
    *,
    alpha: float,
    gate: SmoothStepParams,
    version: int,
) -> Gradients:
    """Gradients of the loss for every visited weight and for the input

    ``dL/do_l = mu(l) * g``; for internal nodes with
    ``d_i = <g, a(left) - a(right)>``, ``dL/dw_i = mu(i) d_i alpha S'(<w_i, x>) x``
    and ``dL/dx`` collects ``mu(i) d_i alpha S'(<w_i, x>) w_i``. The split
    indicator is piecewise constant and passes no gradient.

    Raises:
        ContractViolationError: If the trace was produced by another tree state
    """
    if trace.version != version:
        msg = (
            f"Trace was recorded for tree version {trace.version}, "
            f"tree is at version {version}"
        )
        raise ContractViolationError(msg)

    x = trace.x
    grad_x = np.zeros_like(x, dtype=float)
    weights: list[tuple[InternalNode, np.ndarray]] = []
    outputs: list[tuple[LeafNode, np.ndarray]] = []

    for leaf_visit in trace.leaves:
        outputs.append((leaf_visit.node, leaf_visit.reach * grad_output))

    for visit in trace.internals:
        node = visit.node
        slope = smooth_step_derivative(visit.preactivation, gate)
        if node.split is not None:
            slope *= alpha
        if slope == 0.0 or visit.reach == 0.0:
            weights.append((node, np.zeros_like(node.weight)))
            continue
        d = float(grad_output @ (visit.out_left - visit.out_right))
        scale = visit.reach * d * slope
        weights.append((node, scale * x))
        grad_x += scale * node.weight

    return Gradients(grad_x=grad_x, weights=weights, outputs=outputs)


def iter_nodes(root: Node) -> list[Node]:
    """All nodes in pre-order"""
    nodes: list[Node] = []
    stack: list[Node] = [root]
    while stack:
        node = stack.pop()
        nodes.append(node)
        if isinstance(node, InternalNode):
            stack.append(node.right)
            stack.append(node.left)
    return nodes


def check_input(x: np.ndarray, n_features: int) -> np.ndarray:
    """Validate and coerce a feature vector"""
    x = np.asarray(x, dtype=float)
    check_length("x", x, n_features)
    if not np.all(np.isfinite(x)):
        msg = "x must contain only finite values"
        raise ContractViolationError(msg)
    return x
