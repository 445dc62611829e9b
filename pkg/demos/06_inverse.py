"""
Lifting a UDF input back to a program input
===========================================
"""

# %%
from skewfuzz import benchmarks as B
from skewfuzz.dataflow import execute_prefix
from skewfuzz.inverse import apply_inverse, default_registry, validate_inverse

dept = B.build_deptgpas()
registry = default_registry()
tap_data = execute_prefix(dept.pipeline, B.gen_deptgpas(n_partitions=2, records_per_partition=6), dept.tap)
print([p for p in tap_data.partitions if p])

# %%
lines = apply_inverse(registry, dept.inverse, tap_data)
print([p for p in lines.partitions if p])

# %%
# Re-running the prefix on the lifted lines should give back the same keys.
rep = validate_inverse(registry, dept.inverse, tap_data, dept.pipeline, dept.tap)
print(rep.schema_ok, rep.key_overlap)
