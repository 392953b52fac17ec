"""Dataset ingestion, synthetic generators, oracle simulation, and export.

CSV is the single ingestion format: a header row, numeric feature columns,
and optionally one integer label column providing ground truth for simulated
runs. Floats are printed with 9 significant digits throughout so that an
export/import round trip is lossless at that precision.
"""

import gzip
from dataclasses import dataclass

import numpy as np

from splitlabel.splitters import SoftmaxRegression, standardize_stats

FLOAT_FORMAT = "%.9g"


class DataError(Exception):
    """Dataset loading or oracle construction failed."""


@dataclass
class Dataset:
    """Feature matrix with optional ground truth and display hint."""

    features: np.ndarray
    truth: np.ndarray | None = None
    num_classes: int | None = None
    render_hint: tuple | None = None

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        if self.truth is not None:
            self.truth = np.asarray(self.truth, dtype=np.int64)
            if len(self.truth) != len(self.features):
                raise DataError("truth length does not match feature rows")
            if self.num_classes is None:
                self.num_classes = int(self.truth.max()) + 1
            if self.truth.min() < 0 or self.truth.max() >= self.num_classes:
                raise DataError("labels out of range [0, num_classes)")
        if self.num_classes is not None and self.num_classes < 2:
            raise DataError("num_classes must be at least 2")

    @property
    def size(self):
        return len(self.features)


def _open_text(path):
    path = str(path)
    if path.endswith(".gz"):
        return gzip.open(path, "rt")
    return open(path, "r")


def load_csv(path, label_column="label", render_hint=None, num_classes=None):
    """Parse a numeric CSV with a header row into a Dataset.

    The column named by ``label_column`` (when present in the header) becomes
    the ground truth; pass label_column=None to ignore it. Ragged rows,
    non-numeric cells, and out-of-range or fractional labels are reported
    with their row index.
    """
    with _open_text(path) as fh:
        header = fh.readline().strip()
        if not header:
            raise DataError(f"{path}: empty file, expected a header row")
        columns = header.split(",")
        try:
            table = np.loadtxt(fh, delimiter=",", ndmin=2, dtype=np.float64)
        except ValueError:
            _locate_bad_row(path, len(columns))
            raise
    if table.size == 0:
        raise DataError(f"{path}: no data rows")
    if table.shape[1] != len(columns):
        raise DataError(
            f"{path}: header names {len(columns)} columns, rows have {table.shape[1]}"
        )
    truth = None
    if label_column is not None and label_column in columns:
        idx = columns.index(label_column)
        raw = table[:, idx]
        table = np.delete(table, idx, axis=1)
        if np.any(raw != np.round(raw)):
            bad = int(np.nonzero(raw != np.round(raw))[0][0])
            raise DataError(f"{path}: non-integer label at data row {bad}")
        truth = raw.astype(np.int64)
        if truth.min() < 0:
            bad = int(np.nonzero(truth < 0)[0][0])
            raise DataError(f"{path}: negative label at data row {bad}")
        if num_classes is not None and truth.max() >= num_classes:
            bad = int(np.nonzero(truth >= num_classes)[0][0])
            raise DataError(f"{path}: label out of range at data row {bad}")
    return Dataset(features=table, truth=truth, num_classes=num_classes,
                   render_hint=render_hint)


def _locate_bad_row(path, num_columns):
    """Re-scan a rejected file to point at the offending row."""
    with _open_text(path) as fh:
        fh.readline()
        for row_index, line in enumerate(fh):
            cells = line.strip().split(",")
            if len(cells) != num_columns:
                raise DataError(
                    f"{path}: ragged row at data row {row_index}: "
                    f"{len(cells)} cells, expected {num_columns}"
                )
            for cell in cells:
                try:
                    float(cell)
                except ValueError:
                    raise DataError(
                        f"{path}: non-numeric cell {cell!r} at data row {row_index}"
                    ) from None


def _mixture(rng, N, d, C, spread):
    """Gaussian mixture with class means spaced 10*spread apart."""
    if d == 1:
        means = (np.arange(C, dtype=np.float64) * 10.0 * spread)[:, None]
    else:
        radius = 5.0 * spread / np.sin(np.pi / C)
        angles = 2.0 * np.pi * np.arange(C) / C
        means = np.zeros((C, d))
        means[:, 0] = radius * np.cos(angles)
        means[:, 1] = radius * np.sin(angles)
    sizes = np.full(C, N // C)
    sizes[: N % C] += 1
    blocks, labels = [], []
    for c in range(C):
        blocks.append(rng.normal(0.0, spread, size=(sizes[c], d)) + means[c])
        labels.append(np.full(sizes[c], c, dtype=np.int64))
    features = np.concatenate(blocks)
    truth = np.concatenate(labels)
    order = rng.permutation(N)
    return features[order], truth[order]


def gen_blobs(seed, N, d, C, spread=1.0):
    """C well-separated isotropic Gaussian clusters; truth = cluster id."""
    if not N >= C >= 2:
        raise DataError("need N >= C >= 2")
    rng = np.random.default_rng(seed)
    features, truth = _mixture(rng, N, d, C, spread)
    return Dataset(features=features, truth=truth, num_classes=C)


def gen_noise_dims(seed, N, d_relevant, d_noise, C):
    """Class signal in d_relevant dimensions, drowned in uniform noise dims.

    The relevant block is exactly gen_blobs(seed, N, d_relevant, C); the
    d_noise extra dimensions are uniform on [-10, 10] and carry no class
    information. Distance-based clustering degrades toward chance as d_noise
    grows, while a trained splitter can still find the signal.
    """
    if d_relevant < 1:
        raise DataError("need at least one relevant dimension")
    rng = np.random.default_rng(seed)
    features, truth = _mixture(rng, N, d_relevant, C, spread=1.0)
    if d_noise > 0:
        noise = rng.uniform(-10.0, 10.0, size=(N, d_noise))
        features = np.concatenate([features, noise], axis=1)
    return Dataset(features=features, truth=truth, num_classes=C)


def save_csv(dataset, path):
    """Write a Dataset back to CSV (columns f0..fd-1 plus label if known).

    Floats are printed with 9 significant digits, matching what load_csv
    documents as its lossless round-trip precision.
    """
    dim = dataset.features.shape[1]
    columns = [f"f{i}" for i in range(dim)]
    if dataset.truth is not None:
        columns.append("label")
    opener = gzip.open if str(path).endswith(".gz") else open
    with opener(path, "wt", newline="") as fh:
        fh.write(",".join(columns) + "\n")
        for i in range(dataset.size):
            row = [FLOAT_FORMAT % v for v in dataset.features[i]]
            if dataset.truth is not None:
                row.append(str(int(dataset.truth[i])))
            fh.write(",".join(row) + "\n")


class SimulatedOracle:
    """Oracle that reveals the dataset's stored ground truth."""

    def __init__(self, dataset):
        if dataset.truth is None:
            raise DataError("simulated oracle needs ground-truth labels")
        self._truth = dataset.truth

    def query(self, example_id, features=None):
        return int(self._truth[example_id])


def simulated_oracle(dataset):
    return SimulatedOracle(dataset)


def export_labels(assignment, path):
    """Write a LabelAssignment as CSV.

    Columns: example_id,label,source,node_id,uniformity. The label cell is
    empty when source is none. Newlines are fixed to "\\n" so identical
    assignments serialize byte-identically on any platform.
    """
    with open(path, "w", newline="") as fh:
        fh.write(export_labels_text(assignment))


def export_labels_text(assignment):
    lines = ["example_id,label,source,node_id,uniformity"]
    for row in assignment.rows():
        label = "" if row["label"] is None else str(row["label"])
        lines.append(
            f"{row['example_id']},{label},{row['source']},{row['node_id']},"
            + (FLOAT_FORMAT % row["uniformity"])
        )
    return "\n".join(lines) + "\n"


def train_eval(train_features, train_labels, test_dataset, config):
    """Test accuracy of a classifier trained on the produced labels.

    Uses the same multinomial logistic regression as the supervised splitter.
    Returns None when training is impossible (fewer than two classes). The
    class count is taken from the test dataset so that a training set missing
    some class still scores against all of them.
    """
    train_labels = np.asarray(train_labels, dtype=np.int64)
    if len(train_labels) == 0 or len(np.unique(train_labels)) < 2:
        return None
    if test_dataset.truth is None:
        raise DataError("evaluation needs ground truth on the test set")
    num_classes = test_dataset.num_classes
    mu, sd = standardize_stats(np.asarray(train_features, dtype=np.float64))
    model = SoftmaxRegression(config.lr_epochs, config.lr_step, config.lr_l2)
    model.fit((train_features - mu) / sd, train_labels, num_classes)
    predictions = model.predict((test_dataset.features - mu) / sd)
    return float(np.mean(predictions == test_dataset.truth))
