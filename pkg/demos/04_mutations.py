"""
Schema-derived mutations and weighted sampling
==============================================
"""

# %%
import numpy as np

from skewfuzz.metrics import SkewCategory
from skewfuzz.mutations import MutationConfig, apply_mutation, derive_mutations, probabilities, sample
from skewfuzz.values import Dataset, IntT, StrT, TupleT

schema = TupleT(StrT(), IntT())
muts = derive_mutations(schema, SkewCategory.Data, MutationConfig(disable={"value"}, duplication_factor=0.01))
for m, p in zip(muts, probabilities(muts)):
    print(f"{m.ident:12s} weight={m.weight:<4} p={p:.3f}")

# %%
rng = np.random.default_rng(0)
ds = Dataset(schema, ([("a", 1), ("b", 1)], [("c", 1)]))
for _ in range(4):
    chain = sample(muts, rng)
    ds = apply_mutation(chain, ds, rng)
    print(type(chain).__name__, ds.partitions)
