"""
The four case-study pipelines and their kernels
===============================================
"""

# %%
from skewfuzz import benchmarks as B
from skewfuzz.dataflow import execute

print([B.collatz_length(n) for n in (3, 27, 474680340)])
print(B.max_profit_k3([1, 5, 1, 5, 1, 5, 1, 5]))

# %%
for name in sorted(B.BUILDERS):
    b = B.BUILDERS[name]()
    print(name, [s.name for s in b.pipeline.stages], "tap:", b.pipeline.stage(b.tap.stage_id).name)

# %%
dept = B.build_deptgpas()
out = execute(dept.pipeline, B.gen_deptgpas(n_partitions=4, records_per_partition=50))
print(sorted(out.records()))
