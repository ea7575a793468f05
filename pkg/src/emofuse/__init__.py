"""Beam-search late fusion, learnable pooling descriptors and feature functionals."""

from .aggregation import (
    KINDS,
    ClusterParams,
    aggregate,
    backward,
    netfv_forward,
    netrvlad_forward,
    netvlad_forward,
    soft_assign,
    softdbow_forward,
)
from .core import (
    EMOTIONS,
    ConfusionMatrix,
    LabeledSet,
    ModelBank,
    ScoreMatrix,
    accuracy,
    align_bank,
    argmax_predict,
    confusion,
)
from .fusion import (
    FusionResult,
    Subset,
    bs_fusion,
    exhaustive_oracle,
    majority_vote,
    mean_fuse,
    subset_score,
    weighted_mean_fuse,
)
from .sequence import pad_or_truncate, pool, window_concat
from .synth import SequenceSpec, SplitMix64, SynthSpec, gen_bank, gen_sequences
from .text import build_vocab, embed_pool, normalize_tokens, tfidf_transform
from .training import train_toy

__version__ = "0.1.0"
