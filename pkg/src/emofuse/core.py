"""Labels, score matrices, aligned model banks and evaluation primitives."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (
    DuplicateModelId,
    DuplicateSampleId,
    EmptyInput,
    InvalidScores,
    LengthMismatch,
    MissingSample,
)

EMOTIONS = ("angry", "disgust", "fear", "happy", "neutral", "sad", "surprise")
N_CLASSES = len(EMOTIONS)
LABEL_INDEX = {name: i for i, name in enumerate(EMOTIONS)}
SPLITS = ("train", "val", "test")

ROW_SUM_TOL = 1e-6
# rows off by more than ROW_SUM_TOL but within this are renormalized with a warning
ROW_REPAIR_TOL = 1e-3


def label_name(index: int) -> str:
    return EMOTIONS[index]


def label_index(name: str) -> int:
    try:
        return LABEL_INDEX[name.strip().lower()]
    except KeyError:
        raise InvalidScores(f"unknown emotion label {name!r}") from None


def _check_unique(ids, what):
    seen = set()
    for sid in ids:
        if not sid:
            raise InvalidScores(f"empty {what} id")
        if sid in seen:
            raise DuplicateSampleId(f"duplicate {what} id {sid!r}")
        seen.add(sid)


def _frozen(a):
    a = np.array(a, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class ScoreMatrix:
    """One model's class-probability rows, one per sample, in canonical class order.

    Rows must be nonnegative and sum to one. Rows that miss by less than
    ``ROW_REPAIR_TOL`` (text rounding) are renormalized with a warning.
    """

    model_id: str
    sample_ids: tuple[str, ...]
    scores: np.ndarray

    def __post_init__(self):
        if not self.model_id:
            raise InvalidScores("model_id must be nonempty")
        ids = tuple(self.sample_ids)
        _check_unique(ids, "sample")
        scores = np.array(self.scores, dtype=np.float64)
        if scores.ndim != 2 or scores.shape != (len(ids), N_CLASSES):
            raise InvalidScores(
                f"{self.model_id}: expected shape ({len(ids)}, {N_CLASSES}), got {scores.shape}"
            )
        if not np.all(np.isfinite(scores)):
            raise InvalidScores(f"{self.model_id}: non-finite score")
        if np.any(scores < 0):
            i = int(np.argwhere(scores < 0)[0, 0])
            raise InvalidScores(f"{self.model_id}: negative score for sample {ids[i]!r}")
        dev = np.abs(scores.sum(axis=1) - 1.0)
        if np.any(dev > ROW_SUM_TOL):
            worst = int(np.argmax(dev))
            if dev[worst] > ROW_REPAIR_TOL:
                raise InvalidScores(
                    f"{self.model_id}: row for sample {ids[worst]!r} sums to "
                    f"{scores[worst].sum():.6g}"
                )
            warnings.warn(
                f"{self.model_id}: renormalizing {int(np.sum(dev > ROW_SUM_TOL))} row(s) "
                f"off by up to {dev[worst]:.2e}",
                stacklevel=3,
            )
            scores = scores / scores.sum(axis=1, keepdims=True)
        object.__setattr__(self, "sample_ids", ids)
        object.__setattr__(self, "scores", _frozen(scores))

    def __len__(self):
        return len(self.sample_ids)

    def rows_for(self, ids: Sequence[str]) -> np.ndarray:
        index = {sid: i for i, sid in enumerate(self.sample_ids)}
        try:
            rows = [index[sid] for sid in ids]
        except KeyError as exc:
            raise MissingSample(self.model_id, exc.args[0]) from None
        return self.scores[rows]


@dataclass(frozen=True, eq=False)
class LabeledSet:
    sample_ids: tuple[str, ...]
    gold: np.ndarray
    split_tag: str = "val"

    def __post_init__(self):
        ids = tuple(self.sample_ids)
        _check_unique(ids, "sample")
        gold = np.asarray(self.gold, dtype=np.int64)
        if gold.shape != (len(ids),):
            raise LengthMismatch(f"{len(ids)} sample ids but {gold.shape[0]} labels")
        if gold.size and (gold.min() < 0 or gold.max() >= N_CLASSES):
            raise InvalidScores("gold label outside 0..6")
        if self.split_tag not in SPLITS:
            raise InvalidScores(f"split_tag must be one of {SPLITS}, got {self.split_tag!r}")
        gold = gold.copy()
        gold.setflags(write=False)
        object.__setattr__(self, "sample_ids", ids)
        object.__setattr__(self, "gold", gold)

    def __len__(self):
        return len(self.sample_ids)

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.gold, minlength=N_CLASSES)


@dataclass(frozen=True, eq=False)
class ModelBank:
    """Score matrices of several models, row-aligned on one shared id order."""

    models: tuple[ScoreMatrix, ...]
    sample_ids: tuple[str, ...]
    _by_id: dict = field(init=False, repr=False)

    def __post_init__(self):
        models = tuple(self.models)
        if not models:
            raise EmptyInput("a model bank needs at least one model")
        by_id = {}
        for m in models:
            if m.model_id in by_id:
                raise DuplicateModelId(f"duplicate model id {m.model_id!r}")
            if m.sample_ids != tuple(self.sample_ids):
                raise InvalidScores(f"{m.model_id} is not aligned with the bank")
            by_id[m.model_id] = m
        object.__setattr__(self, "models", models)
        object.__setattr__(self, "sample_ids", tuple(self.sample_ids))
        object.__setattr__(self, "_by_id", by_id)

    @property
    def model_ids(self) -> tuple[str, ...]:
        return tuple(m.model_id for m in self.models)

    def __len__(self):
        return len(self.models)

    def __contains__(self, model_id):
        return model_id in self._by_id

    def __getitem__(self, model_id) -> ScoreMatrix:
        return self._by_id[model_id]


@dataclass(frozen=True)
class ConfusionMatrix:
    counts: np.ndarray
    row_normalized: np.ndarray

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def accuracy(self) -> float:
        return float(np.trace(self.counts)) / self.total


def align_bank(models: Sequence[ScoreMatrix], gold: LabeledSet) -> ModelBank:
    """Reorder every model's rows to ``gold``'s id order, dropping extra rows.

    The bank lists models sorted by ``model_id`` so its content does not
    depend on the order the models were passed in.
    """
    if not models:
        raise EmptyInput("no models given")
    seen = set()
    for m in models:
        if m.model_id in seen:
            raise DuplicateModelId(f"duplicate model id {m.model_id!r}")
        seen.add(m.model_id)
    aligned = [
        ScoreMatrix(m.model_id, gold.sample_ids, m.rows_for(gold.sample_ids))
        for m in sorted(models, key=lambda m: m.model_id)
    ]
    return ModelBank(tuple(aligned), gold.sample_ids)


def argmax_predict(scores) -> np.ndarray:
    """Per-row class index of the largest score; ties go to the lowest index."""
    a = scores.scores if isinstance(scores, ScoreMatrix) else np.asarray(scores)
    # np.argmax returns the first maximal entry
    return np.argmax(a, axis=1)


def _pair(pred, gold):
    pred = np.asarray(pred, dtype=np.int64)
    gold = np.asarray(gold, dtype=np.int64)
    if pred.shape != gold.shape:
        raise LengthMismatch(f"{pred.size} predictions vs {gold.size} gold labels")
    if pred.size == 0:
        raise EmptyInput("no predictions to score")
    return pred, gold


def accuracy(pred, gold) -> float:
    pred, gold = _pair(pred, gold)
    return float(np.count_nonzero(pred == gold)) / pred.size


def confusion(pred, gold) -> ConfusionMatrix:
    """Counts with rows = gold class and columns = predicted class."""
    pred, gold = _pair(pred, gold)
    counts = np.zeros((N_CLASSES, N_CLASSES), dtype=np.int64)
    np.add.at(counts, (gold, pred), 1)
    totals = counts.sum(axis=1, keepdims=True)
    norm = np.divide(counts, totals, out=np.zeros(counts.shape), where=totals > 0)
    return ConfusionMatrix(counts, norm)


def format_confusion(cm: ConfusionMatrix | np.ndarray, digits: int = 2) -> str:
    """Aligned text table of row-normalized rates, gold classes down the side."""
    m = cm.row_normalized if isinstance(cm, ConfusionMatrix) else np.asarray(cm)
    names = [e.capitalize() for e in EMOTIONS]
    width = max(len(n) for n in names)
    cell = max(digits + 2, width)
    lines = [" " * width + "".join(f" {n:>{cell}}" for n in names)]
    for name, row in zip(names, m):
        lines.append(f"{name:<{width}}" + "".join(f" {v:>{cell}.{digits}f}" for v in row))
    return "\n".join(lines)
