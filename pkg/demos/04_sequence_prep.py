"""
Windows, padding and functionals
================================

Turn frame-level features into segment-level and utterance-level vectors.
"""

import numpy as np

from emofuse.sequence import n_windows, pad_or_truncate, pool, window_concat

frames = np.arange(14, dtype=float).reshape(7, 2)

# windows of 3 frames starting every 2 frames; the incomplete tail is dropped
seg = window_concat(frames, window=3, overlap=1)
print(seg.shape, "=", n_windows(7, 3, 1), "windows of", seg.shape[1], "values")
print(seg)

# fixed length with a mask marking real frames
padded, mask = pad_or_truncate(frames, 9)
print(mask)

# functionals ignore the padding
print("mean", pool(padded, "mean", mask), "max", pool(padded, "max", mask))
