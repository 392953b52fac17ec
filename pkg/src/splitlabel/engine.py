"""Greedy budget-constrained labeling loop.

Each step scores every leaf three ways: its current maximized bound S, the
anticipated bound if one more sampled label confirms the majority (S_label),
and the summed child bounds of its cached split proposal (S_split). The
action with the largest improvement over S executes; labeling samples one
unconsumed example uniformly and routes it to the bound set with probability
1 - training_ratio, otherwise to the isolated training set. The loop runs
while oracle budget remains, then finalizes: leaves whose bound-set
uniformity exceeds the quality threshold push their majority label onto
their unlabeled members, and every cached oracle answer is exported as is.

Oracle answers are cached globally by example id. A split forgets the
children's counts, but re-sampling a previously answered example costs no
budget: the cache serves it.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from splitlabel.bound import NodeStats, maximize_bound, score_label, score_split
from splitlabel.splitters import ConfigError, SplitterConfig, propose_split
from splitlabel.tree import Tree, create_root


class OracleError(Exception):
    """The oracle failed to produce a usable answer; the run stops cleanly."""


@dataclass(frozen=True)
class RunConfig:
    """Inputs of one labeling run."""

    budget: int
    training_ratio: float = 0.0
    quality: float = 0.85
    splitter: SplitterConfig = field(
        default_factory=lambda: SplitterConfig(kind="kmeans2")
    )
    min_split_size: int = 10
    seed: int = 0
    bound_tolerance: float = 1e-7
    early_stop: bool = False

    def __post_init__(self):
        if self.budget < 0:
            raise ConfigError("budget must be >= 0")
        if not 0.0 <= self.training_ratio <= 1.0:
            raise ConfigError("training_ratio must be in [0, 1]")
        if not 0.0 <= self.quality <= 1.0:
            raise ConfigError("quality must be in [0, 1]")
        if self.min_split_size < 2:
            raise ConfigError("min_split_size must be >= 2")
        if self.bound_tolerance <= 0:
            raise ConfigError("bound_tolerance must be > 0")


@dataclass(frozen=True)
class LeafScores:
    """Current and anticipated bounds for one leaf; None when unavailable."""

    S: float
    S_label: float | None
    S_split: float | None


@dataclass(frozen=True)
class ActionRecord:
    """One executed step, with enough detail to replay and audit it."""

    step_index: int
    action: str  # "label" or "split"
    node: int
    delta: float
    budget_before: int
    budget_after: int
    oracle_called: bool
    cached_reuse: bool
    example_id: int | None
    label: int | None
    routed_to: str | None  # "bound" or "isolated" for label actions
    num_children: int | None
    total_bound_after: float
    true_correct_after: int | None

    def to_dict(self):
        return dict(self.__dict__)


@dataclass
class LabelAssignment:
    """Final per-example output: label, provenance, leaf id, uniformity."""

    labels: np.ndarray  # class index, -1 where no label was assigned
    sources: list  # "oracle" | "inferred" | "none"
    node_ids: np.ndarray
    uniformities: np.ndarray

    def rows(self):
        for i in range(len(self.labels)):
            yield {
                "example_id": i,
                "label": None if self.sources[i] == "none" else int(self.labels[i]),
                "source": self.sources[i],
                "node_id": int(self.node_ids[i]),
                "uniformity": float(self.uniformities[i]),
            }

    def counts(self):
        out = {"oracle": 0, "inferred": 0, "none": 0}
        for source in self.sources:
            out[source] += 1
        return out

    def size_of_y(self):
        return len(self.sources) - self.counts()["none"]

    def accuracy(self, truth):
        """Fraction of returned labels matching truth (None when Y is empty)."""
        mask = np.asarray([s != "none" for s in self.sources])
        if not mask.any():
            return None
        return float(np.mean(self.labels[mask] == np.asarray(truth)[mask]))


class Engine:
    """Single-writer state machine advancing one greedy step at a time."""

    def __init__(self, config, dataset, oracle):
        if dataset.size < 1:
            raise ConfigError("dataset is empty")
        if dataset.num_classes is None:
            raise ConfigError(
                "dataset must declare num_classes (needed to validate oracle answers)"
            )
        self.config = config
        self.dataset = dataset
        self.oracle = oracle
        self.tree = create_root(dataset.size)
        self.rng = np.random.default_rng(config.seed)
        self.budget = config.budget
        self.label_cache = {}
        self.step_index = 0
        self.trace = []

    # ------------------------------------------------------------- scoring

    def compute_scores(self):
        """Fresh per-leaf scores; pure given the current tree state.

        S_label is offered only when the leaf still has an unconsumed
        example; S_split only when the leaf meets min_split_size and its
        splitter produces a usable partition (proposals are cached on the
        node, so repeated calls are cheap).
        """
        scores = {}
        for leaf_id in self.tree.leaf_ids():
            node = self.tree.node(leaf_id)
            stats = NodeStats(m=node.m, n=node.n, N=node.N)
            current = maximize_bound(stats).value
            label_score = None
            if len(node.unconsumed()) > 0:
                label_score = score_label(stats)
            split_score = None
            if node.N >= self.config.min_split_size:
                proposal = propose_split(node, self.dataset.features,
                                         self.config.splitter)
                if proposal is not None:
                    split_score = score_split(proposal[1])
            scores[leaf_id] = LeafScores(S=current, S_label=label_score,
                                         S_split=split_score)
        return scores

    def select_action(self, scores):
        """Best (action, node, delta) by improvement over the current bound.

        Ties prefer label over split, then the lower node id. Returns None
        when no leaf offers any action. The best delta is returned even when
        it is not positive; the loop runs on budget, not on improvement.
        """
        best = None
        for leaf_id in sorted(scores):
            leaf = scores[leaf_id]
            if leaf.S_label is not None:
                key = (leaf.S_label - leaf.S, 1, -leaf_id)
                if best is None or key > best[0]:
                    best = (key, "label", leaf_id)
            if leaf.S_split is not None:
                key = (leaf.S_split - leaf.S, 0, -leaf_id)
                if best is None or key > best[0]:
                    best = (key, "split", leaf_id)
        if best is None:
            return None
        return best[1], best[2], best[0][0]

    # ----------------------------------------------------------- execution

    def _query_oracle(self, example_id):
        """One validated oracle answer; re-asks on out-of-range replies."""
        for _ in range(100):
            answer = self.oracle.query(example_id, self.dataset.features[example_id])
            answer = int(answer)
            if 0 <= answer < self.dataset.num_classes:
                return answer
        raise OracleError(
            f"oracle kept answering outside [0, {self.dataset.num_classes}) "
            f"for example {example_id}"
        )

    def _telemetry(self):
        total_bound = 0.0
        true_correct = None if self.dataset.truth is None else 0
        for leaf_id in self.tree.leaves:
            node = self.tree.node(leaf_id)
            stats = NodeStats(m=node.m, n=node.n, N=node.N)
            total_bound += maximize_bound(stats).value
            if true_correct is not None and node.majority_class is not None:
                true_correct += int(np.sum(
                    self.dataset.truth[node.example_ids] == node.majority_class
                ))
        return total_bound, true_correct

    def _execute_label(self, node_id, delta):
        node = self.tree.node(node_id)
        candidates = node.unconsumed()
        example_id = int(candidates[int(self.rng.integers(len(candidates)))])
        budget_before = self.budget
        if example_id in self.label_cache:
            cls = self.label_cache[example_id]
            oracle_called, cached_reuse = False, True
        else:
            cls = self._query_oracle(example_id)  # may raise OracleError
            self.label_cache[example_id] = cls
            self.budget -= 1
            oracle_called, cached_reuse = True, False
        if self.rng.random() < 1.0 - self.config.training_ratio:
            self.tree.add_bound_label(node_id, example_id, cls)
            routed_to = "bound"
        else:
            self.tree.add_training_label(node_id, example_id, cls)
            routed_to = "isolated"
        total_bound, true_correct = self._telemetry()
        return ActionRecord(
            step_index=self.step_index, action="label", node=node_id,
            delta=delta, budget_before=budget_before, budget_after=self.budget,
            oracle_called=oracle_called, cached_reuse=cached_reuse,
            example_id=example_id, label=cls, routed_to=routed_to,
            num_children=None, total_bound_after=total_bound,
            true_correct_after=true_correct,
        )

    def _execute_split(self, node_id, delta):
        node = self.tree.node(node_id)
        proposal = propose_split(node, self.dataset.features, self.config.splitter)
        if proposal is None:
            return None  # proposal vanished; caller reruns selection
        partition = proposal[0]
        child_ids = self.tree.apply_split(node_id, partition)
        total_bound, true_correct = self._telemetry()
        return ActionRecord(
            step_index=self.step_index, action="split", node=node_id,
            delta=delta, budget_before=self.budget, budget_after=self.budget,
            oracle_called=False, cached_reuse=False,
            example_id=None, label=None, routed_to=None,
            num_children=len(child_ids), total_bound_after=total_bound,
            true_correct_after=true_correct,
        )

    def step(self):
        """Execute the next greedy action; None when the run is over."""
        if self.budget <= 0:
            return None
        while True:
            scores = self.compute_scores()
            choice = self.select_action(scores)
            if choice is None:
                return None
            kind, node_id, delta = choice
            if self.config.early_stop and delta <= 0:
                return None
            if kind == "label":
                record = self._execute_label(node_id, delta)
            else:
                record = self._execute_split(node_id, delta)
                if record is None:
                    continue
            self.step_index += 1
            self.trace.append(record)
            return record

    def run(self, on_step=None):
        """Loop until the budget or the actions run out, then finalize.

        An oracle failure stops the loop; whatever was learned up to that
        point still finalizes into a partial assignment and trace.
        """
        while self.budget > 0:
            try:
                record = self.step()
            except OracleError:
                break
            if record is None:
                break
            if on_step is not None:
                on_step(record, self)
        return self.finalize(), self.trace

    # ---------------------------------------------------------- finalizing

    def finalize(self):
        """Assignment from the current state; idempotent and side-effect free.

        Inference first: leaves with uniformity strictly above the quality
        threshold stamp their majority class on their members. Oracle labels
        second: every cached answer overrides whatever inference said.
        """
        size = self.dataset.size
        labels = np.full(size, -1, dtype=np.int64)
        sources = ["none"] * size
        node_ids = np.zeros(size, dtype=np.int64)
        uniformities = np.zeros(size)
        for leaf_id in self.tree.leaf_ids():
            node = self.tree.node(leaf_id)
            uniformity = node.uniformity()
            node_ids[node.example_ids] = leaf_id
            uniformities[node.example_ids] = uniformity
            if uniformity > self.config.quality and node.majority_class is not None:
                labels[node.example_ids] = node.majority_class
                for example_id in node.example_ids:
                    sources[example_id] = "inferred"
        for example_id, cls in self.label_cache.items():
            labels[example_id] = cls
            sources[example_id] = "oracle"
        return LabelAssignment(labels=labels, sources=sources,
                               node_ids=node_ids, uniformities=uniformities)

    # --------------------------------------------------------- checkpoints

    def state_dict(self):
        """JSON-safe snapshot of everything needed to resume the run."""
        return {
            "budget": self.budget,
            "step_index": self.step_index,
            "label_cache": [[int(k), int(v)] for k, v in self.label_cache.items()],
            "rng_state": self.rng.bit_generator.state,
            "tree": self.tree.to_dict(),
            "trace": [r.to_dict() for r in self.trace],
        }

    @classmethod
    def from_state(cls, config, dataset, oracle, payload):
        engine = cls(config, dataset, oracle)
        engine.budget = payload["budget"]
        engine.step_index = payload["step_index"]
        engine.label_cache = {int(k): int(v) for k, v in payload["label_cache"]}
        engine.rng.bit_generator.state = payload["rng_state"]
        engine.tree = Tree.from_dict(payload["tree"])
        engine.trace = [ActionRecord(**r) for r in payload["trace"]]
        return engine

    def save_checkpoint(self, path):
        with open(path, "w") as fh:
            json.dump(self.state_dict(), fh)

    @classmethod
    def load_checkpoint(cls, config, dataset, oracle, path):
        with open(path) as fh:
            return cls.from_state(config, dataset, oracle, json.load(fh))
