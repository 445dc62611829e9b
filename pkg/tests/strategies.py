"""Hypothesis strategies for schemas, values and datasets."""

from hypothesis import strategies as st

from skewfuzz.values import CollectionT, Dataset, FloatT, IntT, StrT, TupleT

primitive_schemas = st.sampled_from([IntT(), FloatT(), StrT()])

schemas = st.recursive(
    primitive_schemas,
    lambda inner: st.one_of(
        st.builds(CollectionT, inner),
        st.lists(inner, min_size=1, max_size=3).map(lambda items: TupleT(*items)),
    ),
    max_leaves=6,
)

text = st.text(alphabet=st.characters(blacklist_categories=("Cs",), blacklist_characters="\n"), max_size=8)


def values_of(schema):
    if isinstance(schema, IntT):
        return st.integers(-(2**63), 2**63 - 1)
    if isinstance(schema, FloatT):
        return st.floats(allow_nan=False)
    if isinstance(schema, StrT):
        return text
    if isinstance(schema, TupleT):
        return st.tuples(*(values_of(s) for s in schema.items))
    return st.lists(values_of(schema.elem), max_size=4)


@st.composite
def datasets(draw, schema=None, max_partitions=4, max_records=5):
    schema = schema if schema is not None else draw(schemas)
    n = draw(st.integers(1, max_partitions))
    parts = tuple(draw(st.lists(values_of(schema), max_size=max_records)) for _ in range(n))
    return Dataset(schema, parts)


@st.composite
def pair_datasets(draw, max_partitions=4, max_records=6):
    key = draw(primitive_schemas)
    value = draw(st.one_of(primitive_schemas, st.builds(CollectionT, primitive_schemas)))
    return draw(datasets(TupleT(key, value), max_partitions, max_records))
