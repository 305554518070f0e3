"""Tree learners: soft Hoeffding tree, Hoeffding tree and soft tree"""

from sohot.trees.base import Evaluation, StreamClassifier, TreeDiagnostics
from sohot.trees.hoeffding import HoeffdingTree
from sohot.trees.observers import LeafStats, SplitTest, hoeffding_bound
from sohot.trees.routing import InternalNode, LeafNode, routing_probability
from sohot.trees.soft_tree import SoftTree
from sohot.trees.sohot import SoHoTree
from sohot.trees.transparency import transparency_count

__all__ = [
    "Evaluation",
    "HoeffdingTree",
    "InternalNode",
    "LeafNode",
    "LeafStats",
    "SoHoTree",
    "SoftTree",
    "SplitTest",
    "StreamClassifier",
    "TreeDiagnostics",
    "hoeffding_bound",
    "routing_probability",
    "transparency_count",
]
