"""Classic Hoeffding tree with majority-class and naive-Bayes-adaptive leaves"""

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import norm

from sohot.core.numerics import ContractViolationError
from sohot.models import HoeffdingParams, LeafPrediction
from sohot.trees.base import StreamClassifier, TreeDiagnostics
from sohot.trees.dump import header_line, internal_line, leaf_line
from sohot.trees.observers import LeafStats, SplitTest, decide_split
from sohot.trees.routing import check_input

logger = logging.getLogger(__name__)

LAPLACE = 1.0
NB_MIN_STD = 1e-3


@dataclass(eq=False)
class HTLeaf:
    """Leaf with sufficient statistics and predictor tallies

    ``prior`` holds the class distribution inherited from the split that
    created the leaf; it is added to the observed counts for prediction.
    """

    stats: LeafStats
    depth: int
    prior: np.ndarray
    mc_correct: int = 0
    nb_correct: int = 0
    samples_seen: int = 0
    parent: "HTSplitNode | None" = None

    def counts(self) -> np.ndarray:
        return self.prior + self.stats.class_counts

    def majority_proba(self) -> np.ndarray:
        counts = self.counts()
        return (counts + LAPLACE) / (counts.sum() + LAPLACE * counts.shape[0])

    def naive_bayes_proba(self, x: np.ndarray) -> np.ndarray:
        """Gaussian naive Bayes posterior over classes observed at this leaf"""
        stats = self.stats
        observed = stats.class_counts > 0
        if not np.any(observed):
            return self.majority_proba()
        log_prior = np.log(self.majority_proba())
        stds = np.maximum(np.sqrt(stats.variances()), NB_MIN_STD)
        log_lik = norm.logpdf(x[None, :], loc=stats.means, scale=stds).sum(axis=1)
        joint = np.where(observed, log_prior + log_lik, -np.inf)
        joint -= joint.max()
        proba = np.exp(joint)
        return proba / proba.sum()


@dataclass(eq=False)
class HTSplitNode:
    split: SplitTest
    left: "HTNode"
    right: "HTNode"
    depth: int
    parent: "HTSplitNode | None" = None


HTNode = HTLeaf | HTSplitNode


@dataclass
class _Counters:
    internal: int = 0
    leaves: int = 1
    limit_logged: bool = field(default=False)


class HoeffdingTree(StreamClassifier):
    """Very fast decision tree with Gaussian numeric observers

    Uses the same split machinery as the soft Hoeffding tree; routing is
    hard and there is no gradient training.
    """

    def __init__(
        self,
        n_features: int,
        n_classes: int,
        params: HoeffdingParams | None = None,
    ) -> None:
        if n_features < 1 or n_classes < 1:
            msg = "n_features and n_classes must be >= 1"
            raise ContractViolationError(msg)
        self.n_features = n_features
        self.n_classes = n_classes
        self.params = params or HoeffdingParams()
        self.root: HTNode = self._new_leaf(np.zeros(n_classes), depth=0)
        self._counters = _Counters()

    def _new_leaf(
        self, prior: np.ndarray, depth: int, parent: HTSplitNode | None = None
    ) -> HTLeaf:
        return HTLeaf(
            stats=LeafStats(self.n_features, self.n_classes),
            depth=depth,
            prior=np.asarray(prior, dtype=float).copy(),
            parent=parent,
        )

    @property
    def internal_count(self) -> int:
        return self._counters.internal

    def sort(self, x: np.ndarray) -> HTLeaf:
        """Leaf reached by ``x`` along the split tests"""
        node = self.root
        while isinstance(node, HTSplitNode):
            node = node.left if node.split.goes_left(x) else node.right
        return node

    def _leaf_proba(self, leaf: HTLeaf, x: np.ndarray) -> np.ndarray:
        mode = self.params.leaf_prediction
        if mode == LeafPrediction.MAJORITY_CLASS:
            return leaf.majority_proba()
        if leaf.nb_correct > leaf.mc_correct:
            return leaf.naive_bayes_proba(x)
        return leaf.majority_proba()

    def predict_proba(self, x: np.ndarray) -> np.ndarray:
        x = check_input(x, self.n_features)
        return self._leaf_proba(self.sort(x), x)

    def learn_one(self, x: np.ndarray, y: int) -> None:
        if not 0 <= y < self.n_classes:
            msg = f"label must be in [0, {self.n_classes}), got {y}"
            raise ContractViolationError(msg)
        x = check_input(x, self.n_features)
        leaf = self.sort(x)

        if leaf.stats.total > 0:
            if int(np.argmax(leaf.majority_proba())) == y:
                leaf.mc_correct += 1
            if int(np.argmax(leaf.naive_bayes_proba(x))) == y:
                leaf.nb_correct += 1

        leaf.stats.observe(x, y)
        leaf.samples_seen += 1
        if leaf.stats.samples_since_last_attempt >= self.params.grace_period:
            self.attempt_split(leaf)

    def attempt_split(self, leaf: HTLeaf) -> bool:
        """Hoeffding split test on ``leaf``; respects the internal node limit"""
        leaf.stats.samples_since_last_attempt = 0
        limit = self.params.internal_node_limit
        if limit is not None and self._counters.internal >= limit:
            if not self._counters.limit_logged:
                logger.info("Internal node limit %d reached, growth stopped", limit)
                self._counters.limit_logged = True
            return False
        if leaf.stats.observed_classes() < 2:
            return False

        decision = decide_split(
            leaf.stats,
            delta=self.params.delta,
            tau=self.params.tau,
            n_candidates=self.params.n_candidate_thresholds,
        )
        best = decision.best
        if not decision.should_split or best is None:
            return False

        node = HTSplitNode(
            split=SplitTest(best.feature_index, best.threshold),
            left=None,  # type: ignore[arg-type]
            right=None,  # type: ignore[arg-type]
            depth=leaf.depth,
            parent=leaf.parent,
        )
        node.left = self._new_leaf(best.left_counts, leaf.depth + 1, node)
        node.right = self._new_leaf(best.right_counts, leaf.depth + 1, node)

        parent = leaf.parent
        if parent is None:
            self.root = node
        elif parent.left is leaf:
            parent.left = node
        else:
            parent.right = node
        self._counters.internal += 1
        self._counters.leaves += 1
        logger.info(
            "HT split at depth %d on feature %d < %.6g",
            leaf.depth,
            best.feature_index,
            best.threshold,
        )
        return True

    def nodes(self) -> list[HTNode]:
        nodes: list[HTNode] = []
        stack: list[HTNode] = [self.root]
        while stack:
            node = stack.pop()
            nodes.append(node)
            if isinstance(node, HTSplitNode):
                stack.append(node.right)
                stack.append(node.left)
        return nodes

    def diagnostics(self) -> TreeDiagnostics:
        leaves = [n for n in self.nodes() if isinstance(n, HTLeaf)]
        return TreeDiagnostics(
            node_count=self._counters.internal + self._counters.leaves,
            leaf_count=len(leaves),
            depth=max(leaf.depth for leaf in leaves),
        )

    def dump(self) -> str:
        nodes = self.nodes()
        lines = [header_line("ht", self.n_features, self.n_classes, len(nodes))]
        for node in nodes:
            if isinstance(node, HTLeaf):
                lines.append(
                    leaf_line(node.depth, node.majority_proba(), node.samples_seen)
                )
            else:
                lines.append(
                    internal_line(
                        node.depth, node.split.feature_index, node.split.threshold, None
                    )
                )
        return "\n".join(lines) + "\n"


def ht_predict_proba(tree: HoeffdingTree, x: np.ndarray) -> np.ndarray:
    return tree.predict_proba(x)


def ht_learn_one(tree: HoeffdingTree, x: np.ndarray, y: int) -> None:
    tree.learn_one(x, y)
