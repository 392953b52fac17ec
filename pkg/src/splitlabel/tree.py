"""Hierarchy of data subsets with per-node label bookkeeping.

Leaves partition the dataset. Each node tracks two disjoint pools of labeled
examples: the bound set (counted in m and n, feeding the bound) and the
isolated set (reserved for training supervised splitters, never counted).
Splitting a node zeroes the children's counts; labels acquired before the
split survive only in the engine's global cache.
"""

from dataclasses import dataclass, field

import numpy as np


class TreeError(Exception):
    """Base class for tree bookkeeping violations."""


class EmptyDatasetError(TreeError):
    """A tree needs at least one example."""


class NotLeafError(TreeError):
    """Operation attempted on an interior (already split) node."""


class MembershipError(TreeError):
    """Example does not belong to the node."""


class DoubleConsumeError(TreeError):
    """Example already holds a label in this node."""


class DegenerateSplitError(TreeError):
    """Partition produced fewer than two nonempty children."""


class CoverageError(TreeError):
    """Partition does not assign every node example exactly once."""


@dataclass
class Node:
    """One subset of the dataset with its label statistics."""

    id: int
    example_ids: np.ndarray  # sorted dataset indices, int64
    parent: int | None = None
    children: list = field(default_factory=list)
    bound_labels: dict = field(default_factory=dict)  # example_id -> class
    class_counts: dict = field(default_factory=dict)  # class -> count
    majority_class: int | None = None
    m: int = 0
    n: int = 0
    isolated: list = field(default_factory=list)  # (example_id, class) pairs
    consumed: set = field(default_factory=set)
    split_cache: object = None

    @property
    def N(self):
        return len(self.example_ids)

    def uniformity(self):
        """Empirical majority fraction m/n of the bound set (0 when n = 0)."""
        if self.n == 0:
            return 0.0
        return self.m / self.n

    def unconsumed(self):
        """Member ids that hold no label in this node yet, in sorted order."""
        if not self.consumed:
            return self.example_ids
        keep = np.fromiter(
            (eid not in self.consumed for eid in self.example_ids),
            dtype=bool, count=len(self.example_ids),
        )
        return self.example_ids[keep]


class Tree:
    """Mutable split tree over dataset indices 0..dataset_size-1."""

    def __init__(self, dataset_size):
        if dataset_size < 1:
            raise EmptyDatasetError("dataset must contain at least one example")
        self.dataset_size = dataset_size
        root = Node(id=0, example_ids=np.arange(dataset_size, dtype=np.int64))
        self.nodes = {0: root}
        self.leaves = {0}
        self._next_id = 1

    def node(self, node_id):
        return self.nodes[node_id]

    def leaf(self, node_id):
        node = self.nodes[node_id]
        if node_id not in self.leaves:
            raise NotLeafError(f"node {node_id} is not a leaf")
        return node

    def leaf_ids(self):
        """Leaf ids in ascending order (the deterministic scan order)."""
        return sorted(self.leaves)

    def _check_membership(self, node, example_id):
        idx = np.searchsorted(node.example_ids, example_id)
        if idx >= len(node.example_ids) or node.example_ids[idx] != example_id:
            raise MembershipError(
                f"example {example_id} is not in node {node.id}"
            )
        if example_id in node.consumed:
            raise DoubleConsumeError(
                f"example {example_id} already labeled in node {node.id}"
            )

    def add_bound_label(self, node_id, example_id, cls):
        """Record a sampled label in the node's bound set and update m, n.

        Majority ties break toward the lowest class index.
        """
        node = self.leaf(node_id)
        self._check_membership(node, example_id)
        node.bound_labels[example_id] = cls
        node.consumed.add(example_id)
        count = node.class_counts.get(cls, 0) + 1
        node.class_counts[cls] = count
        node.n += 1
        if (node.majority_class is None or count > node.m
                or (count == node.m and cls < node.majority_class)):
            node.majority_class = cls
            node.m = count
        return node

    def add_training_label(self, node_id, example_id, cls):
        """Append a label to the node's isolated set; m, n stay untouched.

        Invalidates the node's split cache, since a supervised splitter
        trained before this label is now stale.
        """
        node = self.leaf(node_id)
        self._check_membership(node, example_id)
        node.isolated.append((example_id, cls))
        node.consumed.add(example_id)
        node.split_cache = None
        return node

    def apply_split(self, node_id, partition):
        """Replace a leaf by one child leaf per nonempty partition group.

        ``partition.assignment`` must align with the node's example_ids
        ordering. Children start from scratch: zero counts, empty isolated
        and consumed sets, no split cache.
        """
        node = self.leaf(node_id)
        assignment = np.asarray(partition.assignment)
        if len(assignment) != node.N:
            raise CoverageError(
                f"assignment covers {len(assignment)} of {node.N} examples"
            )
        groups = np.unique(assignment)
        if groups.min() < 0:
            raise CoverageError("negative child index in assignment")
        if len(groups) < 2:
            raise DegenerateSplitError("a split needs at least 2 nonempty children")
        child_ids = []
        for g in groups:
            child = Node(
                id=self._next_id,
                example_ids=node.example_ids[assignment == g],
                parent=node_id,
            )
            self.nodes[child.id] = child
            child_ids.append(child.id)
            self._next_id += 1
        node.children = child_ids
        node.split_cache = None
        self.leaves.discard(node_id)
        self.leaves.update(child_ids)
        return child_ids

    def leaf_summaries(self):
        """JSON-ready per-leaf snapshot for reporting and the UI."""
        out = []
        for leaf_id in self.leaf_ids():
            node = self.nodes[leaf_id]
            out.append({
                "id": leaf_id,
                "N": node.N,
                "n": node.n,
                "m": node.m,
                "majority_class": node.majority_class,
                "uniformity": node.uniformity(),
            })
        return out

    # ------------------------------------------------------- serialization

    def to_dict(self):
        """JSON-safe snapshot of the full tree (used for checkpoints)."""
        nodes = []
        for node in self.nodes.values():
            nodes.append({
                "id": node.id,
                "parent": node.parent,
                "children": list(node.children),
                "example_ids": node.example_ids.tolist(),
                "bound_labels": [[int(k), int(v)] for k, v in node.bound_labels.items()],
                "isolated": [[int(e), int(c)] for e, c in node.isolated],
                "consumed": sorted(int(e) for e in node.consumed),
            })
        return {"dataset_size": self.dataset_size, "next_id": self._next_id,
                "leaves": sorted(self.leaves), "nodes": nodes}

    @classmethod
    def from_dict(cls, payload):
        tree = cls.__new__(cls)
        tree.dataset_size = payload["dataset_size"]
        tree._next_id = payload["next_id"]
        tree.leaves = set(payload["leaves"])
        tree.nodes = {}
        for entry in payload["nodes"]:
            node = Node(
                id=entry["id"],
                example_ids=np.asarray(entry["example_ids"], dtype=np.int64),
                parent=entry["parent"],
                children=list(entry["children"]),
            )
            for example_id, cls_ in entry["bound_labels"]:
                node.bound_labels[example_id] = cls_
                node.class_counts[cls_] = node.class_counts.get(cls_, 0) + 1
                node.n += 1
            for cls_ in sorted(node.class_counts):
                if node.class_counts[cls_] > node.m:
                    node.m = node.class_counts[cls_]
                    node.majority_class = cls_
            node.isolated = [(e, c) for e, c in entry["isolated"]]
            node.consumed = set(entry["consumed"])
            tree.nodes[node.id] = node
        return tree


def create_root(dataset_size):
    """Tree with a single leaf holding every dataset index."""
    return Tree(dataset_size)
