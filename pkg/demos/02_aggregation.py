"""
Learnable pooling of descriptor sequences
=========================================

Summarize variable-length sequences with the four aggregation layers, check
their gradients, then train NetVLAD with a linear head on a toy task.
"""

import numpy as np

from emofuse import ClusterParams, SequenceSpec, aggregate, gen_sequences, train_toy
from emofuse.gradcheck import format_table, run_gradcheck

rng = np.random.default_rng(0)
seq = rng.normal(size=(10, 3))
params = ClusterParams.random(rng, n_clusters=2, dim=3)

# output sizes: D*K residuals, D*K weighted sums, K counts, 2*D*K for Fisher
for kind in ("netvlad", "netrvlad", "softdbow", "netfv"):
    out = aggregate(kind, seq, params)
    print(f"{kind:>9}  {out.shape[0]:>3} values, norm {np.linalg.norm(out):.3f}")

# soft-histogram mass equals the number of descriptors
print("softdbow mass", aggregate("softdbow", seq, params).sum())

# central differences against the analytic backward pass
print(format_table(run_gradcheck(n_instances=5)))

# two classes of sequences whose means differ by 4 along a diagonal
data = gen_sequences(SequenceSpec(n_per_class=40, dim=8, delta=4.0, seed=2018))
result = train_toy("netvlad", data.sequences, data.labels, epochs=10, lr=0.01)
for h in result.history:
    print(f"epoch {h['epoch']:>2}  loss {h['loss']:.3f}  accuracy {h['accuracy']:.3f}")
