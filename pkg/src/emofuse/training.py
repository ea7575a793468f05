"""Toy end-to-end training of an aggregation descriptor with a linear softmax head."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .aggregation import PARAM_GROUPS, ClusterParams, aggregate, backward, output_size
from .core import N_CLASSES
from .errors import EmptyDataset
from .synth import SplitMix64, softmax


@dataclass
class TrainResult:
    kind: str
    params: ClusterParams
    head_weights: np.ndarray
    head_bias: np.ndarray
    history: list = field(default_factory=list)

    @property
    def final_accuracy(self) -> float:
        return self.history[-1]["accuracy"]

    def to_dict(self):
        return {
            "kind": self.kind,
            "history": self.history,
            "final_accuracy": self.final_accuracy,
        }


def init_params(sequences, n_clusters: int, alpha: float = 1.0) -> ClusterParams:
    """Anchors are the first ``n_clusters`` training descriptors (dataset order)."""
    frames = np.concatenate([np.asarray(s, dtype=np.float64) for s in sequences])
    if len(frames) < n_clusters:
        raise EmptyDataset(f"only {len(frames)} descriptors for {n_clusters} clusters")
    return ClusterParams.from_anchors(frames[:n_clusters], alpha)


def _evaluate(kind, sequences, labels, params, w, b, normalize):
    feats = np.stack([aggregate(kind, s, params, normalize) for s in sequences])
    p = softmax(feats @ w.T + b)
    loss = -np.mean(np.log(p[np.arange(len(labels)), labels]))
    acc = float(np.mean(np.argmax(p, axis=1) == labels))
    return float(loss), acc


def train_toy(
    kind,
    sequences,
    labels,
    epochs: int = 30,
    lr: float = 0.05,
    seed: int = 0,
    n_clusters: int = 4,
    batch_size: int | None = None,
    normalize: bool = False,
    n_classes: int = N_CLASSES,
    params: ClusterParams | None = None,
) -> TrainResult:
    """Minimize softmax cross-entropy of ``head(aggregate(seq))`` by SGD.

    The head starts at zero, so the epoch-0 loss is ``ln(n_classes)``. Each
    epoch visits the data in a shuffled order drawn from ``seed``; gradients
    within a batch are summed in that order. ``batch_size=None`` means one
    full batch per epoch. ``history[0]`` is measured before any update and
    ``history[e]`` after epoch ``e``.
    """
    sequences = [np.asarray(s, dtype=np.float64) for s in sequences]
    labels = np.asarray(labels, dtype=np.int64)
    if not sequences:
        raise EmptyDataset("no training sequences")
    if lr < 0:
        raise ValueError("lr must be >= 0")
    params = init_params(sequences, n_clusters) if params is None else params.copy()
    dim_out = output_size(kind, params.n_clusters, params.dim)
    w = np.zeros((n_classes, dim_out))
    b = np.zeros(n_classes)
    n = len(sequences)
    bs = n if batch_size is None else max(1, min(batch_size, n))
    rng = SplitMix64(seed)

    history = []
    loss, acc = _evaluate(kind, sequences, labels, params, w, b, normalize)
    history.append({"epoch": 0, "loss": loss, "accuracy": acc})
    for epoch in range(1, epochs + 1):
        order = rng.permutation(n)
        for start in range(0, n, bs):
            batch = order[start : start + bs]
            gw = np.zeros_like(w)
            gb = np.zeros_like(b)
            gp = {name: np.zeros_like(getattr(params, name)) for name in PARAM_GROUPS}
            for i in batch:
                feat = aggregate(kind, sequences[i], params, normalize)
                p = softmax(feat @ w.T + b)
                p[labels[i]] -= 1.0
                p /= len(batch)
                gw += np.outer(p, feat)
                gb += p
                grads = backward(kind, sequences[i], params, w.T @ p, normalize)
                for name in PARAM_GROUPS:
                    gp[name] += grads.group(name)
            w -= lr * gw
            b -= lr * gb
            for name in PARAM_GROUPS:
                getattr(params, name)[...] -= lr * gp[name]
        loss, acc = _evaluate(kind, sequences, labels, params, w, b, normalize)
        history.append({"epoch": epoch, "loss": loss, "accuracy": acc})
    return TrainResult(kind, params, w, b, history)
