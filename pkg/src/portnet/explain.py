"""Shapley-based attribution of port-importance predictions.

Local attributions (per-port SHAP values) and global attributions (SAGE
loss-reduction values) share the same machinery: excluded features are
marginalized interventionally by substituting background rows, and subsets
are combined with the standard Shapley kernel.  Exact mode enumerates every
subset (d <= 15); sampled mode averages marginal contributions over random
feature permutations.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

PredictFn = Callable[[np.ndarray], np.ndarray]

EXACT_MAX_FEATURES = 15
PREDICT_CHUNK = 65536
LOSS_CLIP = 1e-6


class ExplainError(ValueError):
    pass


def _predict_chunked(predict: PredictFn, X: np.ndarray) -> np.ndarray:
    if len(X) <= PREDICT_CHUNK:
        return np.asarray(predict(X), dtype=np.float64)
    parts = [np.asarray(predict(X[i: i + PREDICT_CHUNK]), dtype=np.float64)
             for i in range(0, len(X), PREDICT_CHUNK)]
    return np.concatenate(parts)


def _shapley_subset_weights(d: int) -> np.ndarray:
    """weight(|S|) = |S|! (d-1-|S|)! / d! = 1 / (d * C(d-1, |S|))."""
    return np.array([1.0 / (d * math.comb(d - 1, s)) for s in range(d)])


def _combine_subset_values(v: np.ndarray, d: int) -> np.ndarray:
    """Shapley values from the 2^d table of subset values."""
    weights = _shapley_subset_weights(d)
    sizes = np.array([bin(m).count("1") for m in range(1 << d)])
    phi = np.zeros(d)
    for i in range(d):
        bit = 1 << i
        without = np.array([m for m in range(1 << d) if not m & bit])
        phi[i] = float(np.sum(weights[sizes[without]] *
                              (v[without | bit] - v[without])))
    return phi


def cross_entropy(p: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Per-row binary cross entropy with probabilities clipped away from 0/1."""
    p = np.clip(np.asarray(p, dtype=np.float64), LOSS_CLIP, 1.0 - LOSS_CLIP)
    y = np.asarray(y, dtype=np.float64)
    return -(y * np.log(p) + (1.0 - y) * np.log1p(-p))


@dataclass
class ShapExplanation:
    """Additive attribution of one prediction to the features."""

    observation_id: int | str | None
    base_value: float  # expected model output over the background
    values: np.ndarray  # per-feature contributions
    prediction: float  # model output at x
    x: np.ndarray
    feature_names: list[str]


def shap_values(
    predict: PredictFn,
    background: np.ndarray,
    x: np.ndarray,
    mode: str = "exact",
    permutations: int = 2048,
    seed: int = 0,
    observation_id=None,
    feature_names: Sequence[str] | None = None,
) -> ShapExplanation:
    """Shapley attribution of predict(x) against a background sample.

    Exact mode enumerates all feature subsets and satisfies local accuracy
    to float precision; sampled mode telescopes marginal contributions over
    random permutations, one background draw per permutation.
    """
    background = np.atleast_2d(np.asarray(background, dtype=np.float64))
    x = np.asarray(x, dtype=np.float64).ravel()
    if background.size == 0:
        raise ExplainError("background set is empty")
    d = len(x)
    if background.shape[1] != d:
        raise ExplainError("background and observation dimensions differ")
    names = list(feature_names) if feature_names else [f"f{i}" for i in range(d)]
    prediction = float(_predict_chunked(predict, x[None, :])[0])
    if mode == "exact":
        if d > EXACT_MAX_FEATURES:
            raise ExplainError(
                f"exact mode supports at most {EXACT_MAX_FEATURES} features; "
                f"got {d}"
            )
        v = _subset_values_local(predict, background, x)
        phi = _combine_subset_values(v, d)
        base = float(v[0])
    elif mode == "sampled":
        phi, base = _sampled_shap(predict, background, x, permutations, seed)
    else:
        raise ExplainError(f"unknown mode {mode!r}")
    return ShapExplanation(
        observation_id=observation_id,
        base_value=base,
        values=phi,
        prediction=prediction,
        x=x.copy(),
        feature_names=names,
    )


def _subset_values_local(predict: PredictFn, background: np.ndarray, x: np.ndarray) -> np.ndarray:
    """v(S) = mean over background of f(x_S, b_rest), for every subset."""
    n_bg, d = background.shape
    n_masks = 1 << d
    rows = np.empty((n_masks * n_bg, d))
    for mask in range(n_masks):
        block = background.copy()
        for i in range(d):
            if mask & (1 << i):
                block[:, i] = x[i]
        rows[mask * n_bg: (mask + 1) * n_bg] = block
    preds = _predict_chunked(predict, rows)
    return preds.reshape(n_masks, n_bg).mean(axis=1)


def _sampled_shap(
    predict: PredictFn, background: np.ndarray, x: np.ndarray,
    permutations: int, seed: int,
) -> tuple[np.ndarray, float]:
    n_bg, d = background.shape
    rng = np.random.default_rng(seed)
    perms = np.array([rng.permutation(d) for _ in range(permutations)])
    starts = background[rng.integers(0, n_bg, permutations)].copy()
    prev = _predict_chunked(predict, starts)
    base = float(prev.mean())
    phi = np.zeros(d)
    z = starts
    rows = np.arange(permutations)
    for step in range(d):
        cols = perms[:, step]
        z[rows, cols] = x[cols]
        cur = _predict_chunked(predict, z)
        np.add.at(phi, cols, cur - prev)
        prev = cur
    return phi / permutations, base


@dataclass
class SageValues:
    """Global per-feature predictive-power attribution (loss reduction)."""

    values: np.ndarray
    stderr: np.ndarray  # zero in exact mode
    v_total: float  # E[loss(f_empty)] - E[loss(f_D)]
    loss: str
    feature_names: list[str]


def sage_values(
    predict: PredictFn,
    X: np.ndarray,
    y: np.ndarray,
    mode: str = "exact",
    permutations: int = 4096,
    seed: int = 0,
    background: np.ndarray | None = None,
    background_batch: int = 128,
    feature_names: Sequence[str] | None = None,
) -> SageValues:
    """SAGE attribution of cross-entropy predictive power to the features.

    Excluded features are marginalized by substituting rows drawn from the
    evaluation set itself (or an explicit background).  Sampled mode reports
    a per-feature standard error over the permutation draws.
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    y = np.asarray(y, dtype=np.float64).ravel()
    if len(X) != len(y):
        raise ExplainError("labels not aligned with rows")
    if len(np.unique(y)) < 2:
        raise ExplainError("SAGE requires both classes in the labels")
    bg = X if background is None else np.atleast_2d(np.asarray(background, dtype=np.float64))
    d = X.shape[1]
    names = list(feature_names) if feature_names else [f"f{i}" for i in range(d)]
    if mode == "exact":
        if d > EXACT_MAX_FEATURES:
            raise ExplainError(
                f"exact mode supports at most {EXACT_MAX_FEATURES} features; "
                f"got {d}"
            )
        v = _subset_values_global(predict, X, y, bg)
        phi = _combine_subset_values(v, d)
        return SageValues(values=phi, stderr=np.zeros(d), v_total=float(v[-1]),
                          loss="cross_entropy", feature_names=names)
    if mode != "sampled":
        raise ExplainError(f"unknown mode {mode!r}")
    return _sampled_sage(predict, X, y, bg, permutations, seed,
                         background_batch, names)


def _subset_values_global(
    predict: PredictFn, X: np.ndarray, y: np.ndarray, bg: np.ndarray
) -> np.ndarray:
    """v(S) = E[l(f_empty)] - E[l(f_S)] for every subset, by full
    marginalization over the background."""
    n_eval, d = X.shape
    n_bg = len(bg)
    n_masks = 1 << d
    base_pred = float(_predict_chunked(predict, bg).mean())
    loss_empty = float(cross_entropy(np.full(n_eval, base_pred), y).mean())
    v = np.empty(n_masks)
    tiled_bg = np.tile(bg, (n_eval, 1))
    for mask in range(n_masks):
        rows = tiled_bg.copy()
        for i in range(d):
            if mask & (1 << i):
                rows[:, i] = np.repeat(X[:, i], n_bg)
        preds = _predict_chunked(predict, rows).reshape(n_eval, n_bg).mean(axis=1)
        v[mask] = loss_empty - float(cross_entropy(preds, y).mean())
    return v


_SAGE_CHUNK = 512


def _sampled_sage(
    predict: PredictFn, X: np.ndarray, y: np.ndarray, bg: np.ndarray,
    permutations: int, seed: int, background_batch: int, names: list[str],
) -> SageValues:
    """Permutation sampling, vectorized: each draw pairs one evaluation row
    with a background minibatch and walks one random feature order."""
    n_eval, d = X.shape
    rng = np.random.default_rng(seed)
    rows_idx = rng.integers(0, n_eval, permutations)
    perms = np.array([rng.permutation(d) for _ in range(permutations)])
    batch_idx = rng.integers(0, len(bg), (permutations, background_batch))
    sums = np.zeros(d)
    sq_sums = np.zeros(d)
    counts = np.zeros(d)
    for lo in range(0, permutations, _SAGE_CHUNK):
        hi = min(lo + _SAGE_CHUNK, permutations)
        c = hi - lo
        rows = rows_idx[lo:hi]
        y_chunk = y[rows]
        batches = bg[batch_idx[lo:hi]].copy()  # (c, B, d)
        flat = batches.reshape(c * background_batch, d)
        preds = _predict_chunked(predict, flat).reshape(c, background_batch).mean(axis=1)
        loss_prev = cross_entropy(preds, y_chunk)
        arange_c = np.arange(c)
        for step in range(d):
            cols = perms[lo:hi, step]
            batches[arange_c, :, cols] = X[rows, cols][:, None]
            preds = _predict_chunked(predict, flat).reshape(
                c, background_batch).mean(axis=1)
            loss_cur = cross_entropy(preds, y_chunk)
            delta = loss_prev - loss_cur
            np.add.at(sums, cols, delta)
            np.add.at(sq_sums, cols, delta * delta)
            np.add.at(counts, cols, 1.0)
            loss_prev = loss_cur
    values = sums / counts
    variance = sq_sums / counts - values ** 2
    stderr = np.sqrt(np.maximum(variance, 0.0) / counts)
    return SageValues(values=values, stderr=stderr,
                      v_total=float(values.sum()), loss="cross_entropy",
                      feature_names=names)


@dataclass
class PartialDependence:
    feature: str
    grid: np.ndarray
    mean_output: np.ndarray
    histogram: np.ndarray  # observed count per grid value


def partial_dependence(
    predict: PredictFn,
    X: np.ndarray,
    feature_index: int,
    grid: np.ndarray | None = None,
    feature_name: str | None = None,
) -> PartialDependence:
    """Mean model output with one feature clamped across a grid (defaults to
    the distinct observed values)."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    col = X[:, feature_index]
    if grid is None:
        grid = np.unique(col)
    else:
        grid = np.asarray(grid, dtype=np.float64)
        if grid.min() < col.min() or grid.max() > col.max():
            raise ExplainError("grid extends beyond the observed range")
    means = np.empty(len(grid))
    for g_idx, g in enumerate(grid):
        clamped = X.copy()
        clamped[:, feature_index] = g
        means[g_idx] = float(_predict_chunked(predict, clamped).mean())
    hist = np.array([(col == g).sum() for g in grid], dtype=np.int64)
    name = feature_name or f"f{feature_index}"
    return PartialDependence(feature=name, grid=grid, mean_output=means,
                             histogram=hist)


@dataclass
class LocalRank:
    feature_names: list[str]
    average_rank: np.ndarray  # mean descending rank of |phi| per feature


def _descending_ranks(magnitudes: np.ndarray) -> np.ndarray:
    """Rank 1 = largest magnitude; ties share the average rank."""
    order = np.argsort(-magnitudes, kind="stable")
    ranks = np.empty(len(magnitudes))
    sorted_mag = magnitudes[order]
    i = 0
    while i < len(magnitudes):
        j = i
        while j + 1 < len(magnitudes) and sorted_mag[j + 1] == sorted_mag[i]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def local_rank(explanations: Sequence[ShapExplanation]) -> LocalRank:
    """Average, across observations, of each feature's |phi| rank."""
    if not explanations:
        raise ExplainError("no explanations to rank")
    names = explanations[0].feature_names
    for e in explanations:
        if e.feature_names != names:
            raise ExplainError("explanations have inconsistent feature sets")
    ranks = np.zeros(len(names))
    for e in explanations:
        ranks += _descending_ranks(np.abs(e.values))
    return LocalRank(feature_names=list(names),
                     average_rank=ranks / len(explanations))


def force_report(explanation: ShapExplanation) -> dict:
    """Signed contributions sorted by magnitude: the data behind a force plot."""
    order = np.argsort(-np.abs(explanation.values), kind="stable")
    return {
        "observation_id": explanation.observation_id,
        "base_value": explanation.base_value,
        "prediction": explanation.prediction,
        "contributions": [
            {
                "feature": explanation.feature_names[i],
                "value": float(explanation.x[i]),
                "phi": float(explanation.values[i]),
            }
            for i in order
        ],
    }


def write_shap_matrix(explanations: Sequence[ShapExplanation], path) -> None:
    """Rows = observations, columns = features, plus a base-value column."""
    if not explanations:
        raise ExplainError("nothing to write")
    names = explanations[0].feature_names
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["observation_id"] + names + ["base_value"])
        for e in explanations:
            writer.writerow([e.observation_id] +
                            [repr(float(v)) for v in e.values] +
                            [repr(float(e.base_value))])


def write_sage(values: SageValues, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["feature", "value", "stderr"])
        for name, v, s in zip(values.feature_names, values.values, values.stderr):
            writer.writerow([name, repr(float(v)), repr(float(s))])


def write_partial_dependence(pd: PartialDependence, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["grid_value", "mean_output", "count"])
        for g, m, c in zip(pd.grid, pd.mean_output, pd.histogram):
            writer.writerow([repr(float(g)), repr(float(m)), int(c)])


def write_force_report(report: dict, path) -> None:
    with open(path, "w") as fh:
        json.dump(report, fh, indent=2)


__all__ = [
    "EXACT_MAX_FEATURES",
    "ExplainError",
    "LocalRank",
    "PartialDependence",
    "SageValues",
    "ShapExplanation",
    "cross_entropy",
    "force_report",
    "local_rank",
    "partial_dependence",
    "sage_values",
    "shap_values",
    "write_force_report",
    "write_partial_dependence",
    "write_sage",
    "write_shap_matrix",
]
