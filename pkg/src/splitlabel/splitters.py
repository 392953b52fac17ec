"""Candidate partitions of a node and their speculative statistics.

Two partition builders: unsupervised 2-means over the node's features, and a
multinomial logistic regression trained on the node's isolated label set that
groups examples by predicted class. Either may signal that no usable split
exists (all rows identical, too little training data, a single predicted
class); the signal is the value None, not an exception, and the engine simply
offers no split action for that node.
"""

from dataclasses import dataclass

import numpy as np

from splitlabel.bound import NodeStats


class ConfigError(ValueError):
    """Splitter configuration violates its invariants."""


@dataclass(frozen=True)
class SplitterConfig:
    """Hyperparameters for both partition builders."""

    kind: str  # "kmeans2" or "logistic"
    seed: int = 0
    kmeans_max_iters: int = 100
    kmeans_tol: float = 1e-6
    lr_epochs: int = 200
    lr_step: float = 0.1
    lr_l2: float = 1e-3
    min_train_examples: int = 5

    def __post_init__(self):
        if self.kind not in ("kmeans2", "logistic"):
            raise ConfigError(f"unknown splitter kind {self.kind!r}")
        for name in ("kmeans_max_iters", "lr_epochs", "min_train_examples"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if self.lr_step <= 0:
            raise ConfigError("lr_step must be > 0")
        if self.lr_l2 < 0:
            raise ConfigError("lr_l2 must be >= 0")
        if self.kmeans_tol <= 0:
            raise ConfigError("kmeans_tol must be > 0")


@dataclass(eq=False)
class Partition:
    """Dense child assignment aligned with the node's example_ids order."""

    node: int
    assignment: np.ndarray
    num_children: int


def kmeans_partition(features, seed, max_iters=100, tol=1e-6):
    """2-way partition by Lloyd's algorithm with k-means++ seeding.

    Returns the assignment array, or None when the rows are all identical
    (no second center can be placed). Distances use the expanded form
    ||x||^2 - 2 x.c + ||c||^2 to avoid materializing row differences.
    Deterministic given the seed.
    """
    features = np.asarray(features, dtype=np.float64)
    if len(features) < 2 or np.all(features == features[0]):
        return None
    rng = np.random.default_rng(seed)
    num = len(features)

    first = int(rng.integers(num))
    d2 = ((features - features[first]) ** 2).sum(axis=1)
    total = d2.sum()
    if total == 0:
        return None
    second = int(rng.choice(num, p=d2 / total))
    centers = features[[first, second]].copy()

    x2 = (features ** 2).sum(axis=1)[:, None]
    prev_inertia = None
    assign = None
    for _ in range(max_iters):
        c2 = (centers ** 2).sum(axis=1)[None, :]
        d2 = np.maximum(x2 - 2.0 * features @ centers.T + c2, 0.0)
        assign = np.argmin(d2, axis=1)
        for k in range(2):
            if not np.any(assign == k):
                # Re-seat an emptied cluster at the worst-fit point so the
                # partition stays 2-way.
                assign[int(np.argmax(d2[np.arange(num), assign]))] = k
        inertia = float(d2[np.arange(num), assign].sum())
        if prev_inertia is not None and abs(prev_inertia - inertia) <= tol * max(prev_inertia, 1e-12):
            break
        prev_inertia = inertia
        centers = np.stack([features[assign == k].mean(axis=0) for k in range(2)])
    return assign.astype(np.int64)


class SoftmaxRegression:
    """Multinomial logistic regression by full-batch gradient descent.

    Weights start at zero, so training is deterministic. L2 regularization
    applies to the weights only, not the bias. Shared by the supervised
    splitter and the downstream evaluation in the data module.
    """

    def __init__(self, epochs=200, step=0.1, l2=1e-3):
        self.epochs = epochs
        self.step = step
        self.l2 = l2
        self.weights = None
        self.bias = None

    def fit(self, X, y, num_classes):
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.int64)
        num, dim = X.shape
        self.weights = np.zeros((dim, num_classes))
        self.bias = np.zeros(num_classes)
        rows = np.arange(num)
        for _ in range(self.epochs):
            logits = X @ self.weights + self.bias
            logits -= logits.max(axis=1, keepdims=True)
            probs = np.exp(logits)
            probs /= probs.sum(axis=1, keepdims=True)
            probs[rows, y] -= 1.0
            grad_w = X.T @ probs / num + self.l2 * self.weights
            grad_b = probs.mean(axis=0)
            self.weights -= self.step * grad_w
            self.bias -= self.step * grad_b
        return self

    def predict(self, X):
        scores = np.asarray(X, dtype=np.float64) @ self.weights + self.bias
        return np.argmax(scores, axis=1)


def standardize_stats(features, floor=1e-8):
    """Column means and floored standard deviations for standardization."""
    mu = features.mean(axis=0)
    sd = np.maximum(features.std(axis=0), floor)
    return mu, sd


def logistic_partition(features, isolated_set, config):
    """Partition a node by the predicted classes of a trained classifier.

    ``isolated_set`` holds (row_index, class) pairs indexing into
    ``features``. The model trains on those rows only; standardization
    statistics come from the whole node. Returns None when the training set
    is too small, single-class, or the predictions collapse to one group.
    """
    if len(isolated_set) < config.min_train_examples:
        return None
    rows = np.asarray([r for r, _ in isolated_set], dtype=np.int64)
    labels = np.asarray([c for _, c in isolated_set], dtype=np.int64)
    classes = np.unique(labels)
    if len(classes) < 2:
        return None
    features = np.asarray(features, dtype=np.float64)
    mu, sd = standardize_stats(features)
    scaled = (features - mu) / sd
    model = SoftmaxRegression(config.lr_epochs, config.lr_step, config.lr_l2)
    model.fit(scaled[rows], np.searchsorted(classes, labels), len(classes))
    predictions = model.predict(scaled)
    kept, assignment = np.unique(predictions, return_inverse=True)
    if len(kept) < 2:
        return None
    return assignment.astype(np.int64)


def _route_stats(node, partition):
    """Speculative (m, n, N) per child from the node's current bound labels."""
    sizes = np.bincount(partition.assignment, minlength=partition.num_children)
    per_child_counts = [dict() for _ in range(partition.num_children)]
    for example_id, cls in node.bound_labels.items():
        pos = int(np.searchsorted(node.example_ids, example_id))
        per_child_counts[partition.assignment[pos]][cls] = (
            per_child_counts[partition.assignment[pos]].get(cls, 0) + 1
        )
    children = []
    for child, counts in enumerate(per_child_counts):
        n_child = sum(counts.values())
        m_child = max(counts.values()) if counts else 0
        children.append(NodeStats(m=m_child, n=n_child, N=int(sizes[child])))
    return children


def propose_split(node, features, config):
    """Candidate partition of a leaf plus its speculative child statistics.

    Reuses the node's cached partition when present (the cache is cleared
    whenever the isolated set grows); child statistics are recomputed from
    the live bound labels on every call. Returns None when the configured
    splitter signals that no usable split exists, and caches that outcome
    too.
    """
    cache = node.split_cache
    if cache is not None:
        if cache[0] == "unavailable":
            return None
        partition = cache[1]
    else:
        sub = features[node.example_ids]
        if config.kind == "kmeans2":
            assignment = kmeans_partition(
                sub, seed=(config.seed, node.id),
                max_iters=config.kmeans_max_iters, tol=config.kmeans_tol,
            )
        else:
            positions = {
                int(eid): i for i, eid in enumerate(node.example_ids)
            }
            pairs = [(positions[eid], cls) for eid, cls in node.isolated]
            assignment = logistic_partition(sub, pairs, config)
        if assignment is None:
            node.split_cache = ("unavailable",)
            return None
        partition = Partition(
            node=node.id, assignment=assignment,
            num_children=int(assignment.max()) + 1,
        )
        node.split_cache = ("partition", partition)
    return partition, _route_stats(node, partition)
