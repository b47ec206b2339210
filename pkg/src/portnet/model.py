"""Top-k labeling, stratified split, Gini random forest, and ROC/AUC.

The forest is grown from scratch: each tree fits a bootstrap resample,
considers floor(sqrt(d)) features per split by default, scores candidate
midpoint thresholds by weighted Gini impurity, and grows until nodes are
pure or too small to split.  A tree votes with its leaf's majority class;
the forest's score for a row is the fraction of positive votes.
"""
from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np


class ModelError(ValueError):
    pass


@dataclass
class Labeling:
    """Binary top-k labels over the ranked aggregate centrality."""

    k: float
    port_ids: np.ndarray
    labels: np.ndarray  # int8, aligned with port_ids
    positive_count: int


def label_topk(port_ids: np.ndarray, a_values: np.ndarray, k: float) -> Labeling:
    """Mark the ceil(k*N) ports with the highest aggregate centrality as
    positive; ties at the boundary go to the smaller port id."""
    if not 0.0 < k < 1.0:
        raise ModelError("k must lie in (0, 1)")
    n = len(port_ids)
    if n < 2:
        raise ModelError("need at least 2 ports to label")
    positives = math.ceil(k * n)
    order = np.lexsort((port_ids, -np.asarray(a_values)))
    labels = np.zeros(n, dtype=np.int8)
    labels[order[:positives]] = 1
    return Labeling(k=k, port_ids=np.asarray(port_ids), labels=labels,
                    positive_count=positives)


def stratified_split(
    labels: np.ndarray, train_fraction: float = 0.75, seed: int = 0
) -> tuple[np.ndarray, np.ndarray]:
    """Disjoint, exhaustive train/test indices preserving the class ratio to
    within one sample per class; deterministic per seed."""
    labels = np.asarray(labels)
    rng = np.random.default_rng(seed)
    train_parts, test_parts = [], []
    for cls in np.unique(labels):
        idx = np.nonzero(labels == cls)[0]
        if len(idx) < 2:
            raise ModelError(f"class {cls} has fewer than 2 samples")
        perm = rng.permutation(idx)
        n_train = int(round(train_fraction * len(idx)))
        n_train = min(max(n_train, 1), len(idx) - 1)
        train_parts.append(perm[:n_train])
        test_parts.append(perm[n_train:])
    train = np.sort(np.concatenate(train_parts))
    test = np.sort(np.concatenate(test_parts))
    return train, test


@dataclass
class DecisionTree:
    """Array-of-nodes binary tree; feature == -1 marks a leaf."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    n0: np.ndarray  # class counts of the samples reaching each node
    n1: np.ndarray

    def predict_vote(self, X: np.ndarray) -> np.ndarray:
        """Per-row leaf majority vote (ties vote negative)."""
        node = np.zeros(len(X), dtype=np.int64)
        while True:
            at_leaf = self.feature[node] < 0
            if at_leaf.all():
                break
            live = ~at_leaf
            f = self.feature[node[live]]
            go_left = X[live, f] <= self.threshold[node[live]]
            nxt = np.where(go_left, self.left[node[live]], self.right[node[live]])
            node[live] = nxt
        return (self.n1[node] > self.n0[node]).astype(np.int8)

    def max_depth(self) -> int:
        depth = {0: 0}
        best = 0
        stack = [0]
        while stack:
            i = stack.pop()
            if self.feature[i] >= 0:
                for child in (self.left[i], self.right[i]):
                    depth[child] = depth[i] + 1
                    best = max(best, depth[child])
                    stack.append(int(child))
        return best


def gini_impurity(n0: int, n1: int) -> float:
    total = n0 + n1
    if total == 0:
        return 0.0
    p0 = n0 / total
    p1 = n1 / total
    return 1.0 - p0 * p0 - p1 * p1


def _best_split(values: np.ndarray, labels: np.ndarray) -> tuple[float, float] | None:
    """(weighted_gini, threshold) minimizing impurity over midpoints of
    consecutive distinct sorted values; None when the column is constant."""
    order = np.argsort(values, kind="stable")
    sv = values[order]
    sl = labels[order].astype(np.int64)
    n = len(sv)
    cut = np.nonzero(sv[:-1] != sv[1:])[0]
    if len(cut) == 0:
        return None
    c1 = np.cumsum(sl)
    n_left = cut + 1
    n1_left = c1[cut]
    n0_left = n_left - n1_left
    n_right = n - n_left
    n1_right = c1[-1] - n1_left
    n0_right = n_right - n1_right
    gini_left = 1.0 - (n0_left / n_left) ** 2 - (n1_left / n_left) ** 2
    gini_right = 1.0 - (n0_right / n_right) ** 2 - (n1_right / n_right) ** 2
    weighted = (n_left * gini_left + n_right * gini_right) / n
    best = int(np.argmin(weighted))  # first minimum: lowest threshold wins
    threshold = (sv[cut[best]] + sv[cut[best] + 1]) / 2.0
    return float(weighted[best]), float(threshold)


def grow_tree(
    X: np.ndarray,
    y: np.ndarray,
    rng: np.random.Generator,
    m_features: int,
    min_samples_split: int = 2,
) -> DecisionTree:
    n, d = X.shape
    feature: list[int] = []
    threshold: list[float] = []
    left: list[int] = []
    right: list[int] = []
    n0s: list[int] = []
    n1s: list[int] = []

    def new_node(idx: np.ndarray) -> int:
        i = len(feature)
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        n1 = int(y[idx].sum())
        n0s.append(len(idx) - n1)
        n1s.append(n1)
        return i

    root_idx = np.arange(n)
    root = new_node(root_idx)
    stack: list[tuple[int, np.ndarray]] = [(root, root_idx)]
    while stack:
        node, idx = stack.pop()
        n1 = int(y[idx].sum())
        if n1 == 0 or n1 == len(idx) or len(idx) < min_samples_split:
            continue
        if m_features < d:
            candidates = rng.choice(d, size=m_features, replace=False)
        else:
            candidates = np.arange(d)
        best = None
        for f in candidates:
            found = _best_split(X[idx, f], y[idx])
            if found is None:
                continue
            score, thr = found
            if best is None or score < best[0]:
                best = (score, int(f), thr)
        if best is None:
            continue  # all sampled features constant: leaf
        _, f, thr = best
        go_left = X[idx, f] <= thr
        feature[node] = f
        threshold[node] = thr
        left_node = new_node(idx[go_left])
        right_node = new_node(idx[~go_left])
        left[node] = left_node
        right[node] = right_node
        # push right first so the left subtree is grown first
        stack.append((right_node, idx[~go_left]))
        stack.append((left_node, idx[go_left]))
    return DecisionTree(
        feature=np.array(feature, dtype=np.int32),
        threshold=np.array(threshold, dtype=np.float64),
        left=np.array(left, dtype=np.int32),
        right=np.array(right, dtype=np.int32),
        n0=np.array(n0s, dtype=np.int64),
        n1=np.array(n1s, dtype=np.int64),
    )


@dataclass
class RandomForest:
    trees: list[DecisionTree]
    feature_names: list[str] = field(default_factory=list)
    seed: int = 0
    m_features: int = 0

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        """Fraction of trees voting positive, in [0, 1]."""
        X = np.asarray(X, dtype=np.float64)
        votes = np.zeros(len(X), dtype=np.float64)
        for tree in self.trees:
            votes += tree.predict_vote(X)
        return votes / len(self.trees)

    def predict(self, X: np.ndarray) -> np.ndarray:
        return (self.predict_proba(X) >= 0.5).astype(np.int8)


def _grow_one(args) -> DecisionTree:
    X, y, seed, tree_idx, m, min_split, bootstrap = args
    rng = np.random.default_rng([seed, tree_idx])
    if bootstrap:
        sample = rng.integers(0, len(y), len(y))
    else:
        sample = np.arange(len(y))
    return grow_tree(X[sample], y[sample], rng, m, min_split)


def train_forest(
    X: np.ndarray,
    y: np.ndarray,
    trees: int = 100,
    m_features: int | None = None,
    seed: int = 0,
    bootstrap: bool = True,
    min_samples_split: int = 2,
    feature_names: list[str] | None = None,
    threads: int = 1,
) -> RandomForest:
    """Bootstrap-aggregated Gini trees; per-tree seeds derive from the master
    seed, so the same seed always yields the same forest."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int8)
    if X.ndim != 2 or X.shape[1] < 1:
        raise ModelError("feature matrix must be 2-D with at least 1 column")
    classes = np.unique(y)
    if len(classes) < 2:
        raise ModelError("training data has a single class")
    d = X.shape[1]
    m = m_features if m_features is not None else max(1, int(math.isqrt(d)))
    jobs = [(X, y, seed, t, m, min_samples_split, bootstrap) for t in range(trees)]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            grown = list(pool.map(_grow_one, jobs))
    else:
        grown = [_grow_one(job) for job in jobs]
    return RandomForest(
        trees=grown,
        feature_names=feature_names or [f"f{i}" for i in range(d)],
        seed=seed,
        m_features=m,
    )


@dataclass
class RocCurve:
    thresholds: np.ndarray  # descending distinct scores
    fpr: np.ndarray  # len(thresholds) + 1 points from (0,0) to (1,1)
    tpr: np.ndarray
    auc: float


def _rank_auc(scores: np.ndarray, labels: np.ndarray) -> float:
    """Probability a random positive outscores a random negative, ties 1/2
    (Mann-Whitney U through midranks)."""
    order = np.argsort(scores, kind="stable")
    ranks = np.empty(len(scores), dtype=np.float64)
    sorted_scores = scores[order]
    i = 0
    while i < len(scores):
        j = i
        while j + 1 < len(scores) and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    pos = labels == 1
    n1 = int(pos.sum())
    n0 = len(labels) - n1
    u = ranks[pos].sum() - n1 * (n1 + 1) / 2.0
    return float(u / (n1 * n0))


def roc_auc(scores: np.ndarray, labels: np.ndarray) -> RocCurve:
    """Threshold-swept ROC with trapezoid AUC, cross-checked against the
    rank-statistic formulation."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    n1 = int((labels == 1).sum())
    n0 = int((labels == 0).sum())
    if n1 == 0 or n0 == 0:
        raise ModelError("ROC requires both classes in the labels")
    thresholds = np.unique(scores)[::-1]
    fpr = [0.0]
    tpr = [0.0]
    for t in thresholds:
        pred = scores >= t
        tp = int(np.sum(pred & (labels == 1)))
        fp = int(np.sum(pred & (labels == 0)))
        tpr.append(tp / n1)
        fpr.append(fp / n0)
    fpr_arr = np.array(fpr)
    tpr_arr = np.array(tpr)
    auc = float(np.trapezoid(tpr_arr, fpr_arr))
    rank = _rank_auc(scores, labels)
    if abs(auc - rank) > 1e-9:
        raise ModelError(
            f"AUC cross-check failed: trapezoid {auc!r} vs rank {rank!r}"
        )
    return RocCurve(thresholds=thresholds, fpr=fpr_arr, tpr=tpr_arr, auc=auc)


MODEL_FORMAT = "portnet-forest"
MODEL_VERSION = 1


def save_model(model: RandomForest, path, extra: dict | None = None) -> None:
    """Self-describing JSON: version tag, feature names, per-tree node arrays."""
    doc = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "feature_names": model.feature_names,
        "seed": model.seed,
        "m_features": model.m_features,
        "trees": [
            {
                "feature": t.feature.tolist(),
                "threshold": t.threshold.tolist(),
                "left": t.left.tolist(),
                "right": t.right.tolist(),
                "n0": t.n0.tolist(),
                "n1": t.n1.tolist(),
            }
            for t in model.trees
        ],
    }
    if extra:
        doc.update(extra)
    with open(path, "w") as fh:
        json.dump(doc, fh)


def load_model(path) -> tuple[RandomForest, dict]:
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("format") != MODEL_FORMAT:
        raise ModelError(f"not a {MODEL_FORMAT} file: {path}")
    trees = [
        DecisionTree(
            feature=np.array(t["feature"], dtype=np.int32),
            threshold=np.array(t["threshold"], dtype=np.float64),
            left=np.array(t["left"], dtype=np.int32),
            right=np.array(t["right"], dtype=np.int32),
            n0=np.array(t["n0"], dtype=np.int64),
            n1=np.array(t["n1"], dtype=np.int64),
        )
        for t in doc["trees"]
    ]
    model = RandomForest(
        trees=trees,
        feature_names=doc["feature_names"],
        seed=doc["seed"],
        m_features=doc["m_features"],
    )
    meta = {k: v for k, v in doc.items() if k not in
            ("format", "version", "feature_names", "seed", "m_features", "trees")}
    return model, meta


def write_roc(curve: RocCurve, path) -> None:
    """`threshold,fpr,tpr` rows plus a trailing AUC summary line."""
    with open(path, "w", newline="") as fh:
        fh.write("threshold,fpr,tpr\n")
        for t, f, tp in zip(np.concatenate(([np.inf], curve.thresholds)),
                            curve.fpr, curve.tpr):
            fh.write(f"{repr(float(t))},{repr(float(f))},{repr(float(tp))}\n")
        fh.write(f"# auc,{repr(curve.auc)}\n")


__all__ = [
    "DecisionTree",
    "Labeling",
    "ModelError",
    "RandomForest",
    "RocCurve",
    "gini_impurity",
    "grow_tree",
    "label_topk",
    "load_model",
    "roc_auc",
    "save_model",
    "stratified_split",
    "train_forest",
    "write_roc",
]
