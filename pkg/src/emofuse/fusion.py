"""Late fusion of per-model score matrices.

Baseline combiners (mean, weighted mean, majority vote), subset scoring,
beam-search subset selection and the exhaustive-subset reference search.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .core import N_CLASSES, LabeledSet, ModelBank, ScoreMatrix, accuracy, argmax_predict
from .errors import (
    AllZeroWeights,
    EmptyBank,
    EmptySubset,
    LengthMismatch,
    TooManyModels,
    UnknownModelId,
    WeightMismatch,
)


@dataclass(frozen=True, order=False)
class Subset:
    """A nonempty set of model ids kept in sorted canonical form."""

    member_ids: tuple[str, ...]

    def __init__(self, member_ids: Iterable[str]):
        ids = tuple(sorted(set(member_ids)))
        object.__setattr__(self, "member_ids", ids)

    def __len__(self):
        return len(self.member_ids)

    def __iter__(self):
        return iter(self.member_ids)

    def __contains__(self, model_id):
        return model_id in self.member_ids

    def with_member(self, model_id: str) -> "Subset":
        return Subset(self.member_ids + (model_id,))

    def __str__(self):
        return "{" + ",".join(self.member_ids) + "}"


def rank_key(subset: Subset, score: float):
    """Sort key of the beam order: score desc, size asc, member ids asc."""
    return (-score, len(subset), subset.member_ids)


def _members(bank: ModelBank, subset: Subset):
    if subset is None or len(subset) == 0:
        raise EmptySubset("subset must contain at least one model")
    for mid in subset:
        if mid not in bank:
            raise UnknownModelId(f"model {mid!r} is not in the bank")
    return [bank[mid] for mid in subset.member_ids]


def _fused_id(subset):
    return "+".join(subset.member_ids)


def _mean_array(bank, subset):
    members = _members(bank, subset)
    total = np.zeros_like(members[0].scores)
    for m in members:
        total += m.scores
    return total / len(members)


def mean_fuse(bank: ModelBank, subset: Subset) -> ScoreMatrix:
    """Elementwise average of the member matrices (summed in sorted id order)."""
    return ScoreMatrix(_fused_id(subset), bank.sample_ids, _mean_array(bank, subset))


def weighted_mean_fuse(bank: ModelBank, subset: Subset, weights: Mapping[str, float]) -> ScoreMatrix:
    """Convex combination of the members with ``weights`` normalized to sum to one.

    Weights are first divided by their maximum, so equal weights reduce to
    exactly the same arithmetic as :func:`mean_fuse`.
    """
    members = _members(bank, subset)
    if set(weights) != set(subset.member_ids):
        raise WeightMismatch(
            f"weights given for {sorted(weights)} but subset is {list(subset.member_ids)}"
        )
    w = np.array([float(weights[m.model_id]) for m in members])
    if np.any(~np.isfinite(w)) or np.any(w < 0):
        raise WeightMismatch("weights must be finite and nonnegative")
    if w.max() <= 0:
        raise AllZeroWeights("at least one weight must be positive")
    w = w / w.max()
    total = np.zeros_like(members[0].scores)
    for wi, m in zip(w, members):
        total += wi * m.scores
    return ScoreMatrix(_fused_id(subset), bank.sample_ids, total / w.sum())


def majority_vote(bank: ModelBank, subset: Subset) -> np.ndarray:
    """Plurality of the members' argmax labels; vote ties go to the lowest class index."""
    members = _members(bank, subset)
    votes = np.zeros((len(bank.sample_ids), N_CLASSES), dtype=np.int64)
    rows = np.arange(len(bank.sample_ids))
    for m in members:
        votes[rows, argmax_predict(m)] += 1
    return np.argmax(votes, axis=1)


def _gold_array(bank, gold):
    g = gold.gold if isinstance(gold, LabeledSet) else np.asarray(gold)
    if isinstance(gold, LabeledSet) and gold.sample_ids != bank.sample_ids:
        raise LengthMismatch("bank is not aligned with the gold labels")
    if len(g) != len(bank.sample_ids):
        raise LengthMismatch(f"{len(bank.sample_ids)} bank rows vs {len(g)} gold labels")
    return g


def subset_score(bank: ModelBank, subset: Subset, gold: LabeledSet) -> float:
    """Accuracy of the argmax of the uniform mean over ``subset``."""
    g = _gold_array(bank, gold)
    return accuracy(argmax_predict(_mean_array(bank, subset)), g)


class _CachedScorer:
    # memoizes subset_score; values are identical to the uncached function
    def __init__(self, bank, gold):
        self.bank = bank
        self.gold = _gold_array(bank, gold)
        self.cache = {}
        self.evaluations = 0

    def __call__(self, subset):
        key = subset.member_ids
        if key not in self.cache:
            self.evaluations += 1
            pred = argmax_predict(_mean_array(self.bank, subset))
            self.cache[key] = accuracy(pred, self.gold)
        return self.cache[key]


@dataclass(frozen=True)
class BeamState:
    round: int
    beam: tuple[tuple[Subset, float], ...]
    pre_best_score: float
    now_best_score: float
    global_best: tuple[Subset, float]
    n_candidates: int = 0

    def to_dict(self):
        return {
            "round": self.round,
            "beam": [{"subset": list(s.member_ids), "score": sc} for s, sc in self.beam],
            "pre_best_score": self.pre_best_score,
            "now_best_score": self.now_best_score,
            "global_best": {
                "subset": list(self.global_best[0].member_ids),
                "score": self.global_best[1],
            },
            "n_candidates": self.n_candidates,
        }


@dataclass(frozen=True, eq=False)
class FusionResult:
    selected: Subset
    fused: ScoreMatrix
    val_score: float
    trace: tuple[BeamState, ...] = field(default=())

    def to_dict(self):
        return {
            "selected": list(self.selected.member_ids),
            "val_score": self.val_score,
            "trace": [s.to_dict() for s in self.trace],
        }


def _better(a, b):
    """True if (subset, score) pair ``a`` ranks ahead of ``b`` in beam order."""
    return b is None or rank_key(*a) < rank_key(*b)


def bs_fusion(bank: ModelBank, gold: LabeledSet, K: int = 4) -> FusionResult:
    """Beam-search selection of a model subset for uniform mean fusion.

    Starting from the empty subset, each round extends every beam entry by
    every model it lacks, keeps candidates scoring strictly above the best
    score of the previous beam, and retains the top ``K`` under the order
    (score desc, size asc, member ids asc). The search stops after ``N``
    rounds or as soon as a round admits no candidate. The returned subset is
    the best one evaluated over the whole run.

    If no singleton scores above zero, nothing is ever admitted; the best
    singleton under the same ordering is returned in that case.
    """
    if bank is None or len(bank) == 0:
        raise EmptyBank("bank has no models")
    if K < 1:
        raise ValueError("beam width K must be >= 1")
    score = _CachedScorer(bank, gold)
    model_ids = sorted(bank.model_ids)
    n = len(model_ids)

    beam = [Subset(())]
    pre_best = now_best = 0.0
    best = None
    trace = []
    for rnd in range(1, n + 1):
        pre_best = now_best
        admitted = {}
        n_cand = 0
        for entry in beam:
            for mid in model_ids:
                if mid in entry:
                    continue
                cand = entry.with_member(mid)
                if cand.member_ids in admitted:
                    continue
                s = score(cand)
                n_cand += 1
                if _better((cand, s), best):
                    best = (cand, s)
                if s > pre_best:
                    admitted[cand.member_ids] = (cand, s)
        if not admitted:
            break
        ranked = sorted(admitted.values(), key=lambda p: rank_key(*p))[:K]
        beam = [c for c, _ in ranked]
        now_best = ranked[0][1]
        trace.append(BeamState(rnd, tuple(ranked), pre_best, now_best, best, n_cand))

    selected, val = best
    return FusionResult(selected, mean_fuse(bank, selected), val, tuple(trace))


def exhaustive_oracle(bank: ModelBank, gold: LabeledSet, guard: int = 16) -> tuple[Subset, float]:
    """Best of all 2^N - 1 nonempty subsets under :func:`subset_score`."""
    if bank is None or len(bank) == 0:
        raise EmptyBank("bank has no models")
    n = len(bank)
    if n > guard:
        raise TooManyModels(n, guard)
    ids = sorted(bank.model_ids)
    g = _gold_array(bank, gold)
    best = None
    for size in range(1, n + 1):
        for combo in itertools.combinations(ids, size):
            sub = Subset(combo)
            s = accuracy(argmax_predict(_mean_array(bank, sub)), g)
            if _better((sub, s), best):
                best = (sub, s)
    return best
