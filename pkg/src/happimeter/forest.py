"""From-scratch random forest classifier with Gini decision trees.

Trees are grown greedily: at each node a random subset of features is
considered, thresholds are placed at midpoints between consecutive
distinct sorted values, and the split maximizing the weighted impurity
decrease is taken. Growth stops when no split with positive decrease
exists or child-size constraints (min_leaf) forbid one.

Everything is deterministic for a fixed seed: tree t draws its bootstrap
sample and per-node feature subsets from an rng stream derived from
(seed, t), so results are identical regardless of how many workers train
trees concurrently.
"""

from __future__ import annotations

import hashlib
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import ContractViolation, EmptyDatasetError, ValidationError

TARGETS = ("pleasance", "activation", "mood_state")

FORMAT_NAME = "happimeter-forest"
FORMAT_VERSION = 1


# ---------------------------------------------------------------------------
# model structure


@dataclass(frozen=True)
class LeafNode:
    """Terminal node holding per-class training counts (class_set order)."""

    class_counts: tuple[int, ...]

    @property
    def n(self) -> int:
        return sum(self.class_counts)

    @property
    def majority_index(self) -> int:
        # ties resolve to the lowest class index, i.e. the lowest label
        return int(np.argmax(self.class_counts))


@dataclass(frozen=True)
class SplitNode:
    """Internal binary node: rows with value <= threshold go left."""

    feature_index: int
    threshold: float
    left: "TreeNode"
    right: "TreeNode"
    n: int
    impurity: float


TreeNode = LeafNode | SplitNode


@dataclass(frozen=True)
class ModelScope:
    kind: str  # "general" | "individual"
    user: str | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("general", "individual"):
            raise ValidationError(f"unknown scope kind {self.kind!r}")
        if self.kind == "individual" and not self.user:
            raise ValidationError("individual scope requires a user")
        if self.kind == "general" and self.user is not None:
            raise ValidationError("general scope takes no user")

    @classmethod
    def general(cls) -> "ModelScope":
        return cls("general")

    @classmethod
    def individual(cls, user: str) -> "ModelScope":
        return cls("individual", user)


@dataclass(frozen=True)
class ForestHyperparams:
    n_trees: int = 100
    min_leaf: int = 50
    features_per_split: int = 4  # ceil(sqrt(13)) for the standard feature set
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_trees < 1:
            raise ValidationError("n_trees must be >= 1")
        if self.min_leaf < 1:
            raise ValidationError("min_leaf must be >= 1")
        if self.features_per_split < 1:
            raise ValidationError("features_per_split must be >= 1")


@dataclass(frozen=True)
class ForestModel:
    trees: tuple[TreeNode, ...]
    target: str
    scope: ModelScope
    feature_names: tuple[str, ...]
    hyperparams: ForestHyperparams
    class_set: tuple[int, ...]


@dataclass(frozen=True)
class Dataset:
    """Feature matrix plus integer labels, as consumed by training."""

    X: np.ndarray
    y: np.ndarray
    feature_names: tuple[str, ...]

    def __post_init__(self) -> None:
        if self.X.ndim != 2:
            raise ValidationError("X must be 2-dimensional")
        if self.y.ndim != 1 or len(self.y) != len(self.X):
            raise ValidationError("y must be 1-dimensional and match X")
        if self.X.shape[1] != len(self.feature_names):
            raise ValidationError("feature_names must match X columns")

    def __len__(self) -> int:
        return len(self.y)


@dataclass(frozen=True)
class Prediction:
    label: int
    distribution: dict[int, float]


@dataclass(frozen=True)
class FoldResult:
    accuracy: float
    kappa: float | None


@dataclass(frozen=True)
class EvaluationReport:
    target: str
    scope: ModelScope
    accuracy: float
    kappa: float | None
    confusion: tuple[tuple[int, ...], ...]  # rows = truth, cols = predicted
    class_set: tuple[int, ...]
    per_fold: tuple[FoldResult, ...]
    stratified: bool
    n: int
    k: int


@dataclass(frozen=True)
class ImportanceReport:
    feature_names: tuple[str, ...]
    mean_impurity_decrease: tuple[float, ...]
    node_count: tuple[int, ...]

    def ranked_by_decrease(self) -> list[tuple[str, float]]:
        order = sorted(
            range(len(self.feature_names)),
            key=lambda i: (-self.mean_impurity_decrease[i], i),
        )
        return [(self.feature_names[i], self.mean_impurity_decrease[i]) for i in order]

    def ranked_by_nodes(self) -> list[tuple[str, int]]:
        order = sorted(
            range(len(self.feature_names)), key=lambda i: (-self.node_count[i], i)
        )
        return [(self.feature_names[i], self.node_count[i]) for i in order]

    def normalized_decrease(self) -> tuple[float, ...]:
        total = sum(self.mean_impurity_decrease)
        if total == 0:
            return tuple(0.0 for _ in self.mean_impurity_decrease)
        return tuple(v / total for v in self.mean_impurity_decrease)


# ---------------------------------------------------------------------------
# impurity and splitting


def gini(class_counts: Mapping[object, int] | Sequence[int] | np.ndarray) -> float:
    """Gini impurity 1 - sum((c_i / N)^2) of a count vector."""
    if isinstance(class_counts, Mapping):
        counts = np.array([class_counts[k] for k in sorted(class_counts, key=str)])
    else:
        counts = np.asarray(class_counts)
    if counts.size and counts.min() < 0:
        raise ValidationError("class counts must be non-negative")
    total = int(counts.sum())
    if total == 0:
        raise ContractViolation("gini of an empty count vector is undefined")
    return float(1.0 - np.sum((counts / total) ** 2))


@dataclass(frozen=True)
class BestSplit:
    feature: int
    threshold: float
    impurity_decrease: float


def best_split(
    X: np.ndarray,
    y: np.ndarray,
    candidate_features: Iterable[int],
    min_leaf: int,
    n_classes: int | None = None,
) -> BestSplit | None:
    """Exact best (feature, threshold) by weighted Gini decrease.

    Thresholds sit at midpoints between consecutive distinct sorted
    values; candidates leaving a child below min_leaf are skipped. Ties
    break toward the lowest feature index, then the lowest threshold.
    Returns None when no candidate has a strictly positive decrease.
    """
    n = len(y)
    if n == 0:
        raise ContractViolation("best_split on an empty example set")
    if n < 2 * min_leaf:
        return None

    k = int(n_classes) if n_classes is not None else int(y.max()) + 1
    onehot = np.zeros((n, k), dtype=np.float64)
    onehot[np.arange(n), y] = 1.0
    parent_counts = onehot.sum(axis=0)
    parent_gini = float(1.0 - np.sum((parent_counts / n) ** 2))
    if parent_gini == 0.0:
        return None

    best: BestSplit | None = None
    left_sizes = np.arange(1, n, dtype=np.float64)
    for f in sorted(set(int(f) for f in candidate_features)):
        values = X[:, f]
        order = np.argsort(values, kind="stable")
        sv = values[order]
        cum = np.cumsum(onehot[order], axis=0)

        valid = (sv[:-1] != sv[1:]) & (left_sizes >= min_leaf) & (n - left_sizes >= min_leaf)
        if not valid.any():
            continue
        pos = np.flatnonzero(valid)
        nl = left_sizes[pos]
        nr = n - nl
        lc = cum[pos]
        rc = parent_counts - lc
        gl = 1.0 - ((lc / nl[:, None]) ** 2).sum(axis=1)
        gr = 1.0 - ((rc / nr[:, None]) ** 2).sum(axis=1)
        delta = parent_gini - (nl / n) * gl - (nr / n) * gr

        j = int(np.argmax(delta))  # first max = lowest threshold
        d = float(delta[j])
        if d > 0.0 and (best is None or d > best.impurity_decrease):
            thr = float((sv[pos[j]] + sv[pos[j] + 1]) / 2.0)
            best = BestSplit(feature=f, threshold=thr, impurity_decrease=d)
    return best


# ---------------------------------------------------------------------------
# training


def _grow(
    X: np.ndarray,
    y: np.ndarray,
    indices: np.ndarray,
    k: int,
    hyper: ForestHyperparams,
    rng: np.random.Generator,
) -> TreeNode:
    counts = np.bincount(y[indices], minlength=k)
    n = int(indices.size)
    node_gini = float(1.0 - np.sum((counts / n) ** 2))
    if n >= 2 * hyper.min_leaf and node_gini > 0.0:
        n_features = X.shape[1]
        m = min(hyper.features_per_split, n_features)
        cand = rng.choice(n_features, size=m, replace=False)
        split = best_split(X[indices], y[indices], cand, hyper.min_leaf, n_classes=k)
        if split is not None:
            go_left = X[indices, split.feature] <= split.threshold
            left = _grow(X, y, indices[go_left], k, hyper, rng)
            right = _grow(X, y, indices[~go_left], k, hyper, rng)
            return SplitNode(
                feature_index=split.feature,
                threshold=split.threshold,
                left=left,
                right=right,
                n=n,
                impurity=node_gini,
            )
    return LeafNode(class_counts=tuple(int(c) for c in counts))


def train_tree(
    X: np.ndarray,
    y: np.ndarray,
    hyper: ForestHyperparams,
    rng: np.random.Generator,
    n_classes: int | None = None,
) -> TreeNode:
    """Grow one tree on the given (already bootstrapped) sample."""
    if len(y) == 0:
        raise ContractViolation("cannot grow a tree on an empty sample")
    k = int(n_classes) if n_classes is not None else int(y.max()) + 1
    return _grow(X, y, np.arange(len(y)), k, hyper, rng)


def _tree_seed(seed: int, tree_index: int) -> np.random.Generator:
    return np.random.default_rng([seed & 0xFFFFFFFF, tree_index])


def _build_one_tree(
    X: np.ndarray, y: np.ndarray, k: int, hyper: ForestHyperparams, tree_index: int
) -> TreeNode:
    rng = _tree_seed(hyper.seed, tree_index)
    boot = rng.integers(0, len(y), size=len(y))
    return train_tree(X[boot], y[boot], hyper, rng, n_classes=k)


def _build_tree_chunk(args: tuple) -> list[tuple[int, TreeNode]]:
    X, y, k, hyper, tree_indices = args
    return [(t, _build_one_tree(X, y, k, hyper, t)) for t in tree_indices]


def train_forest(
    dataset: Dataset,
    target: str,
    scope: ModelScope,
    hyper: ForestHyperparams = ForestHyperparams(),
    n_jobs: int = 1,
) -> ForestModel:
    """Train an ensemble; bit-identical output for a fixed seed at any n_jobs."""
    if target not in TARGETS:
        raise ValidationError(f"unknown target {target!r}, expected one of {TARGETS}")
    if len(dataset) == 0:
        raise EmptyDatasetError(f"no examples to train {target} ({scope.kind})")

    class_set = tuple(int(v) for v in np.unique(dataset.y))
    index_of = {label: i for i, label in enumerate(class_set)}
    y_idx = np.array([index_of[int(v)] for v in dataset.y], dtype=np.int64)
    X = np.ascontiguousarray(dataset.X, dtype=np.float64)
    k = len(class_set)

    indices = list(range(hyper.n_trees))
    if n_jobs <= 1 or hyper.n_trees == 1:
        trees = [_build_one_tree(X, y_idx, k, hyper, t) for t in indices]
    else:
        chunks = [(X, y_idx, k, hyper, indices[w::n_jobs]) for w in range(n_jobs)]
        built: dict[int, TreeNode] = {}
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            for pairs in pool.map(_build_tree_chunk, chunks):
                built.update(pairs)
        trees = [built[t] for t in indices]

    return ForestModel(
        trees=tuple(trees),
        target=target,
        scope=scope,
        feature_names=tuple(dataset.feature_names),
        hyperparams=hyper,
        class_set=class_set,
    )


# ---------------------------------------------------------------------------
# prediction


def _assign_leaf_majority(node: TreeNode, X: np.ndarray, rows: np.ndarray, out: np.ndarray) -> None:
    if isinstance(node, LeafNode):
        out[rows] = node.majority_index
        return
    go_left = X[rows, node.feature_index] <= node.threshold
    if go_left.any():
        _assign_leaf_majority(node.left, X, rows[go_left], out)
    if not go_left.all():
        _assign_leaf_majority(node.right, X, rows[~go_left], out)


def predict_votes(model: ForestModel, X: np.ndarray) -> np.ndarray:
    """Per-row vote counts over model.class_set, one vote per tree."""
    if X.ndim != 2 or X.shape[1] != len(model.feature_names):
        raise ValidationError(
            f"expected {len(model.feature_names)} features, got shape {X.shape}"
        )
    X = np.ascontiguousarray(X, dtype=np.float64)
    votes = np.zeros((len(X), len(model.class_set)), dtype=np.int64)
    rows = np.arange(len(X))
    picked = np.empty(len(X), dtype=np.int64)
    for tree in model.trees:
        _assign_leaf_majority(tree, X, rows, picked)
        votes[rows, picked] += 1
    return votes


def predict_labels(model: ForestModel, X: np.ndarray) -> np.ndarray:
    votes = predict_votes(model, X)
    classes = np.asarray(model.class_set)
    return classes[np.argmax(votes, axis=1)]  # first max = lowest label code


def predict(model: ForestModel, features: Sequence[float]) -> Prediction:
    """Plurality vote over trees for one feature vector."""
    row = np.asarray(features, dtype=np.float64).reshape(1, -1)
    if row.shape[1] != len(model.feature_names):
        raise ValidationError(
            f"expected {len(model.feature_names)} features, got {row.shape[1]}"
        )
    votes = predict_votes(model, row)[0]
    label = int(model.class_set[int(np.argmax(votes))])
    total = votes.sum()
    distribution = {
        int(c): int(v) / int(total)
        for c, v in zip(model.class_set, votes)
        if v > 0
    }
    return Prediction(label=label, distribution=distribution)


# ---------------------------------------------------------------------------
# metrics


def _as_confusion(confusion) -> np.ndarray:
    m = np.asarray(confusion, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.size == 0:
        raise ValidationError("confusion matrix must be square and non-empty")
    if m.sum() <= 0:
        raise ValidationError("confusion matrix must have a positive total")
    return m


def accuracy(confusion) -> float:
    """Trace over total of a (truth x predicted) count matrix."""
    m = _as_confusion(confusion)
    return float(np.trace(m) / m.sum())


def cohens_kappa(confusion) -> float:
    """Chance-corrected agreement (p_o - p_e) / (1 - p_e)."""
    m = _as_confusion(confusion)
    total = m.sum()
    p_o = float(np.trace(m) / total)
    p_e = float(np.sum(m.sum(axis=1) * m.sum(axis=0)) / (total * total))
    if p_e == 1.0:
        if p_o == 1.0:
            return 1.0
        raise ValidationError("kappa undefined: chance agreement is 1 without perfect agreement")
    return (p_o - p_e) / (1.0 - p_e)


def confusion_matrix(
    y_true: np.ndarray, y_pred: np.ndarray, class_set: Sequence[int]
) -> np.ndarray:
    index_of = {int(label): i for i, label in enumerate(class_set)}
    m = np.zeros((len(class_set), len(class_set)), dtype=np.int64)
    for t, p in zip(y_true, y_pred):
        m[index_of[int(t)], index_of[int(p)]] += 1
    return m


# ---------------------------------------------------------------------------
# cross-validation


def _fold_seed(seed: int, fold: int) -> int:
    digest = hashlib.sha256(f"fold:{seed}:{fold}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def stratified_folds(
    y: np.ndarray, k: int, seed: int
) -> tuple[list[np.ndarray], bool]:
    """Split indices into k folds, class-balanced when every class has >= k.

    Within each class the members are shuffled with the seeded rng and
    dealt round-robin; the dealing cursor carries across classes so fold
    sizes never differ by more than one.
    """
    n = len(y)
    if k < 2 or k > n:
        raise ValidationError(f"k must be in [2, {n}], got {k}")
    rng = np.random.default_rng([seed & 0xFFFFFFFF, 0xF01D])
    labels, counts = np.unique(y, return_counts=True)
    stratified = bool(counts.min() >= k)

    folds: list[list[int]] = [[] for _ in range(k)]
    cursor = 0
    if stratified:
        groups = [np.flatnonzero(y == label) for label in labels]
    else:
        groups = [np.arange(n)]
    for group in groups:
        shuffled = group.copy()
        rng.shuffle(shuffled)
        for idx in shuffled:
            folds[cursor % k].append(int(idx))
            cursor += 1
    return [np.array(sorted(f), dtype=np.int64) for f in folds], stratified


def cross_validate(
    dataset: Dataset,
    target: str,
    hyper: ForestHyperparams = ForestHyperparams(),
    k: int = 10,
    seed: int | None = None,
    scope: ModelScope | None = None,
    n_jobs: int = 1,
) -> EvaluationReport:
    """Stratified k-fold evaluation; aggregate confusion summed over folds."""
    if target not in TARGETS:
        raise ValidationError(f"unknown target {target!r}")
    if len(dataset) == 0:
        raise EmptyDatasetError("cannot cross-validate an empty dataset")
    seed = hyper.seed if seed is None else seed
    scope = scope or ModelScope.general()

    folds, stratified = stratified_folds(dataset.y, k, seed)
    class_set = tuple(int(v) for v in np.unique(dataset.y))

    total = np.zeros((len(class_set), len(class_set)), dtype=np.int64)
    per_fold: list[FoldResult] = []
    all_idx = np.arange(len(dataset))
    for fold_index, test_idx in enumerate(folds):
        train_mask = np.ones(len(dataset), dtype=bool)
        train_mask[test_idx] = False
        train_idx = all_idx[train_mask]
        fold_hyper = replace(hyper, seed=_fold_seed(seed, fold_index))
        sub = Dataset(
            X=dataset.X[train_idx], y=dataset.y[train_idx], feature_names=dataset.feature_names
        )
        model = train_forest(sub, target, scope, fold_hyper, n_jobs=n_jobs)
        pred = predict_labels(model, dataset.X[test_idx])
        fold_conf = confusion_matrix(dataset.y[test_idx], pred, class_set)
        total += fold_conf
        try:
            fold_kappa: float | None = cohens_kappa(fold_conf)
        except ValidationError:
            fold_kappa = None
        per_fold.append(FoldResult(accuracy=accuracy(fold_conf), kappa=fold_kappa))

    try:
        agg_kappa: float | None = cohens_kappa(total)
    except ValidationError:
        agg_kappa = None
    return EvaluationReport(
        target=target,
        scope=scope,
        accuracy=accuracy(total),
        kappa=agg_kappa,
        confusion=tuple(tuple(int(v) for v in row) for row in total),
        class_set=class_set,
        per_fold=tuple(per_fold),
        stratified=stratified,
        n=len(dataset),
        k=k,
    )


# ---------------------------------------------------------------------------
# feature importance


def _leaf_or_split_impurity(node: TreeNode) -> float:
    if isinstance(node, SplitNode):
        return node.impurity
    counts = np.asarray(node.class_counts)
    total = counts.sum()
    return float(1.0 - np.sum((counts / total) ** 2))


def _node_size(node: TreeNode) -> int:
    return node.n if isinstance(node, SplitNode) else node.n


def feature_importance(model: ForestModel) -> ImportanceReport:
    """Sample-weighted mean impurity decrease and split counts per feature."""
    n_features = len(model.feature_names)
    acc = np.zeros(n_features, dtype=np.float64)
    node_count = np.zeros(n_features, dtype=np.int64)

    def walk(node: TreeNode, n_root: int) -> None:
        if isinstance(node, LeafNode):
            return
        nl = _node_size(node.left)
        nr = _node_size(node.right)
        delta = (
            node.impurity
            - (nl / node.n) * _leaf_or_split_impurity(node.left)
            - (nr / node.n) * _leaf_or_split_impurity(node.right)
        )
        acc[node.feature_index] += (node.n / n_root) * delta
        node_count[node.feature_index] += 1
        walk(node.left, n_root)
        walk(node.right, n_root)

    for tree in model.trees:
        walk(tree, _node_size(tree))

    return ImportanceReport(
        feature_names=model.feature_names,
        mean_impurity_decrease=tuple(float(v) / len(model.trees) for v in acc),
        node_count=tuple(int(v) for v in node_count),
    )


# ---------------------------------------------------------------------------
# serialization


def _node_to_dict(node: TreeNode) -> dict:
    if isinstance(node, LeafNode):
        return {"kind": "leaf", "counts": list(node.class_counts)}
    return {
        "kind": "split",
        "feature": node.feature_index,
        "threshold": node.threshold,
        "n": node.n,
        "impurity": node.impurity,
        "left": _node_to_dict(node.left),
        "right": _node_to_dict(node.right),
    }


def _node_from_dict(d: dict) -> TreeNode:
    if d["kind"] == "leaf":
        return LeafNode(class_counts=tuple(int(c) for c in d["counts"]))
    return SplitNode(
        feature_index=int(d["feature"]),
        threshold=float(d["threshold"]),
        left=_node_from_dict(d["left"]),
        right=_node_from_dict(d["right"]),
        n=int(d["n"]),
        impurity=float(d["impurity"]),
    )


def model_to_dict(model: ForestModel) -> dict:
    return {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "target": model.target,
        "scope": {"kind": model.scope.kind, "user": model.scope.user},
        "feature_names": list(model.feature_names),
        "class_set": list(model.class_set),
        "hyperparams": {
            "n_trees": model.hyperparams.n_trees,
            "min_leaf": model.hyperparams.min_leaf,
            "features_per_split": model.hyperparams.features_per_split,
            "seed": model.hyperparams.seed,
        },
        "trees": [_node_to_dict(t) for t in model.trees],
    }


def model_from_dict(d: dict) -> ForestModel:
    if d.get("format") != FORMAT_NAME:
        raise ValidationError(f"not a forest model payload: {d.get('format')!r}")
    if d.get("version") != FORMAT_VERSION:
        raise ValidationError(f"unsupported model version {d.get('version')!r}")
    hp = d["hyperparams"]
    return ForestModel(
        trees=tuple(_node_from_dict(t) for t in d["trees"]),
        target=d["target"],
        scope=ModelScope(d["scope"]["kind"], d["scope"]["user"]),
        feature_names=tuple(d["feature_names"]),
        hyperparams=ForestHyperparams(
            n_trees=int(hp["n_trees"]),
            min_leaf=int(hp["min_leaf"]),
            features_per_split=int(hp["features_per_split"]),
            seed=int(hp["seed"]),
        ),
        class_set=tuple(int(c) for c in d["class_set"]),
    )


def serialize_model(model: ForestModel) -> bytes:
    """Canonical byte form: load -> re-save is bit-exact."""
    return (json.dumps(model_to_dict(model), sort_keys=True, separators=(",", ":")) + "\n").encode()


def save_model(model: ForestModel, path: str | Path) -> None:
    Path(path).write_bytes(serialize_model(model))


def load_model(path: str | Path) -> ForestModel:
    return model_from_dict(json.loads(Path(path).read_bytes()))
