"""
Beam-search fusion on a synthetic score bank
============================================

Six models of mixed quality, two of them strongly correlated, are fused by
beam search and compared with plain averaging and the exhaustive search.
"""

from emofuse import SynthSpec, bs_fusion, exhaustive_oracle, gen_bank, subset_score
from emofuse.fusion import Subset

# a seeded bank: per-model target accuracy, noise and a shared noise term
spec = SynthSpec(n_models=6, n_samples=300, accuracy=[0.45, 0.5, 0.55, 0.6, 0.4, 0.5],
                 noise=1.0, sharpness=2.0, shared_noise=0.3, seed=7)
bank, gold = gen_bank(spec)

# single models and the average of all of them
for mid in bank.model_ids:
    print(f"{mid:>5}  {subset_score(bank, Subset([mid]), gold):.3f}")
print(f"  all  {subset_score(bank, Subset(bank.model_ids), gold):.3f}")

# beam search, round by round
result = bs_fusion(bank, gold, K=3)
for state in result.trace:
    top = ", ".join(f"{s} {v:.3f}" for s, v in state.beam)
    print(f"round {state.round}: threshold {state.pre_best_score:.3f} -> {top}")
print("selected", result.selected, f"{result.val_score:.3f}")

# the exhaustive search over all 63 subsets bounds it from above
best, score = exhaustive_oracle(bank, gold)
print("oracle  ", best, f"{score:.3f}")
