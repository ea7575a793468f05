"""Sequence preprocessing: fixed-length padding, window concatenation, pooling."""

from __future__ import annotations

import numpy as np

from .errors import AllMasked, InvalidOverlap, NonFiniteInput, ShapeMismatch, WindowTooLarge

FUNCTIONALS = ("mean", "max")


def _as_frames(seq):
    x = np.array(seq, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2 or x.shape[0] < 1:
        raise ShapeMismatch("a feature sequence is a nonempty (L, D) matrix")
    if not np.all(np.isfinite(x)):
        raise NonFiniteInput("feature sequence contains non-finite values")
    return x


def pad_or_truncate(seq, target_len: int):
    """Right-pad with zero frames or drop the tail so exactly ``target_len`` frames remain.

    Returns ``(frames, mask)``; ``mask`` is 1 on real frames and 0 on padding.
    """
    if target_len < 1:
        raise ValueError("target_len must be >= 1")
    x = _as_frames(seq)
    n = min(len(x), target_len)
    out = np.zeros((target_len, x.shape[1]))
    out[:n] = x[:n]
    mask = np.zeros(target_len, dtype=np.int8)
    mask[:n] = 1
    return out, mask


def n_windows(length: int, window: int, overlap: int) -> int:
    """Number of complete windows: floor((L - window) / (window - overlap)) + 1."""
    return (length - window) // (window - overlap) + 1


def window_concat(seq, window: int, overlap: int = 0) -> np.ndarray:
    """Concatenate each run of ``window`` consecutive frames into one frame.

    Windows start every ``window - overlap`` frames; an incomplete tail window
    is dropped. The output has ``window * D`` columns, earliest frame first.
    """
    if window < 1 or overlap < 0 or overlap >= window:
        raise InvalidOverlap(f"need window >= 1 and 0 <= overlap < window, got {window}, {overlap}")
    x = _as_frames(seq)
    if len(x) < window:
        raise WindowTooLarge(f"sequence of {len(x)} frames is shorter than window {window}")
    stride = window - overlap
    starts = np.arange(n_windows(len(x), window, overlap)) * stride
    idx = starts[:, None] + np.arange(window)[None, :]
    return x[idx].reshape(len(starts), window * x.shape[1])


def pool(seq, functional: str = "mean", mask=None) -> np.ndarray:
    """Coordinatewise mean or max over the frames whose mask entry is nonzero."""
    x = _as_frames(seq)
    if mask is not None:
        mask = np.asarray(mask).astype(bool)
        if mask.shape != (len(x),):
            raise ShapeMismatch(f"mask of length {mask.size} for {len(x)} frames")
        x = x[mask]
    if len(x) == 0:
        raise AllMasked("every frame is masked out")
    if functional == "mean":
        return x.mean(axis=0)
    if functional == "max":
        return x.max(axis=0)
    raise ValueError(f"unknown functional {functional!r}; expected one of {FUNCTIONALS}")
