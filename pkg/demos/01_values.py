"""
Values, schemas and the two on-disk codecs
==========================================
"""

# %%
# Records are plain Python values; a schema says what shape they must have.
from skewfuzz.values import (
    CollectionT, Dataset, FloatT, StrT, TupleT,
    canonical_bytes, conforms, decode_structured, decode_text, encode_structured, encode_text, stable_hash,
)

schema = TupleT(StrT(), CollectionT(FloatT()))
rec = ("AAPL", [101.5, 99.0, 103.25])
print(conforms(rec, schema), conforms(("AAPL", [1]), schema))

# %%
# Keys hash through a canonical byte encoding, so shuffles are stable across runs.
print(canonical_bytes("EE").hex(), hex(stable_hash("EE")))

# %%
# Program inputs are lines of text, one part file per partition.
lines = Dataset(StrT(), (["AAPL,2020-01-02,101.5"], ["MSFT,2020-01-02,20.0"]))
files = encode_text(lines)
print(files)
print(decode_text(files, lines.n_partitions) == lines)

# %%
# The structured codec keeps the schema in its header.
ds = Dataset(schema, ([rec], [("MSFT", [20.0])]))
blob = encode_structured(ds)
print(len(blob), decode_structured(blob) == ds)
