"""Published reference tables shipped with the package.

``afew_split_counts.csv``: per-class clip counts of the AFEW 2018
train/val/test splits. ``afew_test_confusion.csv``: the two-decimal
row-normalized test confusion matrix of the fused system.
"""

from __future__ import annotations

import csv
import itertools
from importlib import resources

import numpy as np

from .core import EMOTIONS, SPLITS


def _read(name):
    text = resources.files(__package__).joinpath("data").joinpath(name).read_text(encoding="utf-8")
    rows = list(csv.reader(text.splitlines()))
    return rows[0], rows[1:]


def load_split_counts() -> dict:
    """``{split: array of 7 class counts}``."""
    header, rows = _read("afew_split_counts.csv")
    assert header == ["emotion", *SPLITS] and [r[0] for r in rows] == list(EMOTIONS)
    return {s: np.array([int(r[1 + i]) for r in rows]) for i, s in enumerate(SPLITS)}


def load_test_confusion() -> np.ndarray:
    header, rows = _read("afew_test_confusion.csv")
    assert header == ["gold", *EMOTIONS] and [r[0] for r in rows] == list(EMOTIONS)
    return np.array([[float(v) for v in r[1:]] for r in rows])


def split_manifest(split: str, counts=None) -> tuple[list, np.ndarray]:
    """Sample ids and gold labels with the per-class counts of one split."""
    counts = load_split_counts()[split] if counts is None else counts
    labels = np.repeat(np.arange(len(EMOTIONS)), counts)
    width = len(str(len(labels)))
    ids = [f"{split}_{i:0{width}d}" for i in range(1, len(labels) + 1)]
    return ids, labels


def rounding_counts(row, target_total: int, digits: int = 2, max_shift: int = 200):
    """Integer counts whose row-normalized values print as ``row`` at ``digits`` decimals.

    Searches totals outward from ``target_total`` and returns the first
    ``(total, counts)`` found, or ``None``.
    """
    want = [f"{v:.{digits}f}" for v in row]
    for shift in range(max_shift + 1):
        for n in dict.fromkeys((target_total + shift, target_total - shift)):
            if n <= 0:
                continue
            options = [[c for c in range(n + 1) if f"{c / n:.{digits}f}" == w] for w in want]
            for combo in itertools.product(*options):
                if sum(combo) == n:
                    return n, np.array(combo)
    return None


def confusion_replay_counts() -> np.ndarray:
    """A 7x7 count matrix that renders exactly as the shipped two-decimal matrix.

    Row totals start from the test-split class sizes; rows that cannot be
    reproduced at that size (disgust, sad) use the nearest size that can.
    """
    published = load_test_confusion()
    sizes = load_split_counts()["test"]
    return np.stack([rounding_counts(r, int(n))[1] for r, n in zip(published, sizes)])
