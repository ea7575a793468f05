"""Seeded synthetic score banks and descriptor-sequence datasets.

All randomness comes from :class:`SplitMix64`, a counter-based generator that
is easy to reproduce bit-for-bit in any language: uniforms use the top 53
bits of each output, normals use Box-Muller on consecutive uniform pairs.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .core import EMOTIONS, N_CLASSES, LabeledSet, ModelBank, ScoreMatrix
from .errors import InvalidSpec

GOLDEN_GAMMA = 0x9E3779B97F4A7C15
_MASK64 = (1 << 64) - 1


class SplitMix64:
    """SplitMix64 stream. Output ``i`` is ``mix(seed + (i + 1) * GOLDEN_GAMMA)``.

    Because the state advances by a constant, blocks of outputs are computed
    in one vectorized pass; uint64 array arithmetic wraps modulo 2**64.
    """

    def __init__(self, seed: int):
        self.state = int(seed) & _MASK64

    def next_u64(self, n: int) -> np.ndarray:
        steps = np.arange(1, n + 1, dtype=np.uint64)
        z = np.uint64(self.state) + steps * np.uint64(GOLDEN_GAMMA)
        self.state = (self.state + n * GOLDEN_GAMMA) & _MASK64
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        return z ^ (z >> np.uint64(31))

    def uniform(self, n: int) -> np.ndarray:
        """``n`` doubles in [0, 1) with 53 random bits each."""
        return (self.next_u64(n) >> np.uint64(11)).astype(np.float64) * 2.0**-53

    def normal(self, n: int) -> np.ndarray:
        """``n`` standard normals; pair ``(u1, u2)`` yields ``r cos t`` then ``r sin t``."""
        pairs = (n + 1) // 2
        u = self.uniform(2 * pairs).reshape(pairs, 2)
        r = np.sqrt(-2.0 * np.log1p(-u[:, 0]))
        t = 2.0 * np.pi * u[:, 1]
        return np.column_stack([r * np.cos(t), r * np.sin(t)]).ravel()[:n]

    def integers(self, low: int, high: int, n: int) -> np.ndarray:
        """Integers in ``[low, high]`` by scaling uniforms (bias < 2**-40 for small ranges)."""
        span = high - low + 1
        return low + np.floor(self.uniform(n) * span).astype(np.int64)

    def permutation(self, n: int) -> np.ndarray:
        """Fisher-Yates shuffle of ``range(n)`` driven by this stream."""
        perm = np.arange(n)
        u = self.uniform(max(n - 1, 0))
        for k, i in enumerate(range(n - 1, 0, -1)):
            j = int(u[k] * (i + 1))
            perm[i], perm[j] = perm[j], perm[i]
        return perm


def softmax(z, axis=-1):
    z = np.asarray(z, dtype=np.float64)
    e = np.exp(z - z.max(axis=axis, keepdims=True))
    return e / e.sum(axis=axis, keepdims=True)


def _categorical(u, probs):
    cdf = np.cumsum(probs)
    cdf[-1] = 1.0
    return np.minimum(np.searchsorted(cdf, u, side="right"), len(probs) - 1)


@dataclass
class SynthSpec:
    """Parameters of a synthetic score bank.

    ``accuracy`` is one value per model (a scalar is broadcast). Each model's
    row is ``softmax(sharpness * onehot(target) + noise)`` where the target is
    gold with probability ``accuracy`` and otherwise a uniformly chosen wrong
    class. ``shared_noise`` in [0, 1) mixes a noise field common to all
    models into each model's noise, making models correlated.
    """

    n_models: int = 5
    n_samples: int = 200
    accuracy: float | list = 0.6
    noise: float = 0.5
    sharpness: float = 4.0
    prior: list | None = None
    seed: int = 0
    shared_noise: float = 0.0
    model_prefix: str = "m"

    def accuracies(self) -> list:
        acc = self.accuracy
        if np.isscalar(acc):
            return [float(acc)] * self.n_models
        return [float(a) for a in acc]

    def class_prior(self) -> np.ndarray:
        if self.prior is None:
            return np.full(N_CLASSES, 1.0 / N_CLASSES)
        return np.asarray(self.prior, dtype=np.float64) / np.sum(self.prior)

    def validate(self):
        if int(self.n_models) != self.n_models or self.n_models < 1:
            raise InvalidSpec("n_models", f"must be a positive integer, got {self.n_models}")
        if int(self.n_samples) != self.n_samples or self.n_samples < 1:
            raise InvalidSpec("n_samples", f"must be a positive integer, got {self.n_samples}")
        acc = self.accuracies()
        if len(acc) != self.n_models:
            raise InvalidSpec("accuracy", f"{len(acc)} values for {self.n_models} models")
        for a in acc:
            if not 0.0 < a < 1.0:
                raise InvalidSpec("accuracy", f"{a} is outside (0, 1)")
        if not np.isfinite(self.noise) or self.noise < 0:
            raise InvalidSpec("noise", f"must be >= 0, got {self.noise}")
        if not np.isfinite(self.sharpness) or self.sharpness <= 0:
            raise InvalidSpec("sharpness", f"must be > 0, got {self.sharpness}")
        if not 0.0 <= self.shared_noise < 1.0:
            raise InvalidSpec("shared_noise", f"must lie in [0, 1), got {self.shared_noise}")
        if self.prior is not None:
            p = np.asarray(self.prior, dtype=np.float64)
            if p.shape != (N_CLASSES,) or np.any(~np.isfinite(p)) or np.any(p < 0) or p.sum() <= 0:
                raise InvalidSpec("prior", "needs 7 nonnegative weights with a positive sum")
        if int(self.seed) != self.seed or not 0 <= self.seed < 2**64:
            raise InvalidSpec("seed", "must be an integer in [0, 2**64)")
        return self

    def to_dict(self):
        d = asdict(self)
        d["accuracy"] = self.accuracies()
        d["prior"] = self.class_prior().tolist()
        return d


def gen_bank(spec: SynthSpec) -> tuple[ModelBank, LabeledSet]:
    """Draw gold labels and one score matrix per model from ``spec``.

    Draw order (fixed): gold uniforms; shared noise block (only when
    ``shared_noise > 0``); then per model: hit uniforms, wrong-class uniforms,
    a noise block of ``n_samples * 7`` normals.
    """
    spec.validate()
    rng = SplitMix64(spec.seed)
    m, k = spec.n_samples, N_CLASSES
    gold = _categorical(rng.uniform(m), spec.class_prior())
    shared = rng.normal(m * k).reshape(m, k) if spec.shared_noise > 0 else None
    width = len(str(m - 1))
    ids = tuple(f"s{i:0{width}d}" for i in range(m))
    mwidth = max(2, len(str(spec.n_models)))
    rows = np.arange(m)
    models = []
    for j, acc in enumerate(spec.accuracies()):
        hit = rng.uniform(m) < acc
        offset = 1 + np.floor(rng.uniform(m) * (k - 1)).astype(np.int64)
        target = np.where(hit, gold, (gold + offset) % k)
        noise = rng.normal(m * k).reshape(m, k)
        if shared is not None:
            c = spec.shared_noise
            noise = np.sqrt(c) * shared + np.sqrt(1.0 - c) * noise
        logits = spec.noise * noise
        logits[rows, target] += spec.sharpness
        models.append(ScoreMatrix(f"{spec.model_prefix}{j + 1:0{mwidth}d}", ids, softmax(logits)))
    return ModelBank(tuple(models), ids), LabeledSet(ids, gold, "val")


@dataclass
class SequenceSpec:
    n_per_class: int = 50
    min_len: int = 4
    max_len: int = 12
    dim: int = 8
    delta: float = 4.0
    seed: int = 0
    noise: float = 1.0

    def validate(self):
        if int(self.n_per_class) != self.n_per_class or self.n_per_class < 1:
            raise InvalidSpec("n_per_class", f"must be a positive integer, got {self.n_per_class}")
        if not 1 <= self.min_len <= self.max_len:
            raise InvalidSpec("min_len", f"need 1 <= min_len <= max_len, got {self.min_len}, {self.max_len}")
        if self.dim < 1:
            raise InvalidSpec("dim", f"must be >= 1, got {self.dim}")
        if not np.isfinite(self.delta) or self.delta < 0:
            raise InvalidSpec("delta", f"must be >= 0, got {self.delta}")
        if not np.isfinite(self.noise) or self.noise <= 0:
            raise InvalidSpec("noise", f"must be > 0, got {self.noise}")
        if int(self.seed) != self.seed or not 0 <= self.seed < 2**64:
            raise InvalidSpec("seed", "must be an integer in [0, 2**64)")
        return self


@dataclass
class SequenceDataset:
    ids: list
    sequences: list
    labels: np.ndarray
    spec: SequenceSpec = field(default=None, repr=False)

    def __len__(self):
        return len(self.sequences)


def class_means(dim: int, delta: float) -> np.ndarray:
    """Means ``-/+ delta/2`` along the all-ones direction, ``delta`` apart."""
    direction = np.ones(dim) / np.sqrt(dim)
    return np.stack([-0.5 * delta * direction, 0.5 * delta * direction])


def gen_sequences(spec: SequenceSpec) -> SequenceDataset:
    """Two-class dataset of variable-length descriptor sequences.

    Sequences alternate class 0, class 1, ...; each draws its length
    uniformly in ``[min_len, max_len]`` and then ``length * dim`` normals.
    """
    spec.validate()
    rng = SplitMix64(spec.seed)
    means = class_means(spec.dim, spec.delta)
    n = 2 * spec.n_per_class
    width = len(str(n - 1))
    ids, seqs, labels = [], [], []
    for i in range(n):
        y = i % 2
        length = int(rng.integers(spec.min_len, spec.max_len, 1)[0])
        x = means[y] + spec.noise * rng.normal(length * spec.dim).reshape(length, spec.dim)
        ids.append(f"q{i:0{width}d}")
        seqs.append(x)
        labels.append(y)
    return SequenceDataset(ids, seqs, np.array(labels, dtype=np.int64), spec)


def nearest_mean_accuracy(data: SequenceDataset) -> float:
    """Accuracy of classifying each sequence's mean frame by the nearer true class mean."""
    means = class_means(data.spec.dim, data.spec.delta)
    pred = [int(np.argmin(((means - x.mean(axis=0)) ** 2).sum(axis=1))) for x in data.sequences]
    return float(np.mean(np.array(pred) == data.labels))


__all__ = [
    "EMOTIONS",
    "SplitMix64",
    "SynthSpec",
    "SequenceSpec",
    "SequenceDataset",
    "gen_bank",
    "gen_sequences",
    "nearest_mean_accuracy",
    "softmax",
]
