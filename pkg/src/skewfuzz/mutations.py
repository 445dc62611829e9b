"""Schema-aware mutation operators, their derivation from a schema, and weighting.

Operators are identified as M1..M14. A mutation chain nests record-level
operators inside ``RandomRecord`` (M10), for example ``M10+M7+M5+M1``
mutates one integer element of the collection in slot 1 of one record.
Dataset-level operators (M11 to M14) act on key/value datasets as a whole.
Identifiers M3, M8 and M9 are reserved and never derived.
"""

from __future__ import annotations

import math
import string
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .dataflow import group_key
from .errors import DerivationError, MutationConfigError, SchemaError
from .metrics import SkewCategory
from .values import CollectionT, Dataset, FloatT, IntT, StrT, TupleT, Value, conforms, is_pair, is_primitive

ALNUM = string.ascii_letters + string.digits
INT_RANGE = (0, 2**31)
KNOWN_IDS = {f"M{i}" for i in (1, 2, 4, 5, 6, 7, 10, 11, 12, 13, 14)}
RESERVED_IDS = {"M3", "M8", "M9"}

ALIGNED_WEIGHT = 5.0
MISALIGNED_WEIGHT = 0.5
NEUTRAL_WEIGHT = 1.0


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def _alnum(rng: np.random.Generator, length: int) -> str:
    return "".join(ALNUM[i] for i in rng.integers(0, len(ALNUM), length))


# Record-level operators: mutate(value, rng) -> value


@dataclass(frozen=True)
class RandomInteger:
    lo: int = INT_RANGE[0]
    hi: int = INT_RANGE[1]
    ident = "M1"

    def accepts(self, schema) -> bool:
        return isinstance(schema, IntT)

    def mutate(self, value, rng):
        return int(rng.integers(self.lo, self.hi))

    def ids(self) -> list[str]:
        return [self.ident]


@dataclass(frozen=True)
class RandomDouble:
    lo: float = 0.0
    hi: float = 1.0
    ident = "M2"

    def accepts(self, schema) -> bool:
        return isinstance(schema, FloatT)

    def mutate(self, value, rng):
        return float(self.lo + (self.hi - self.lo) * rng.random())

    def ids(self) -> list[str]:
        return [self.ident]


@dataclass(frozen=True)
class ReplaceSubstring:
    """Replace a random non-empty substring with 1 to 8 random alphanumerics."""

    max_len: int = 8
    ident = "M4"

    def accepts(self, schema) -> bool:
        return isinstance(schema, StrT)

    def mutate(self, value: str, rng):
        if value:
            i = int(rng.integers(0, len(value)))
            j = int(rng.integers(i + 1, len(value) + 1))
        else:
            i = j = 0
        repl = _alnum(rng, int(rng.integers(1, self.max_len + 1)))
        return value[:i] + repl + value[j:]

    def ids(self) -> list[str]:
        return [self.ident]


@dataclass(frozen=True)
class CollectionElementMutation:
    inner: object
    ident = "M5"

    def accepts(self, schema) -> bool:
        return isinstance(schema, CollectionT) and self.inner.accepts(schema.elem)

    def mutate(self, value: list, rng):
        if not value:
            return list(value)
        idx = int(rng.integers(0, len(value)))
        out = list(value)
        out[idx] = self.inner.mutate(value[idx], rng)
        return out

    def ids(self) -> list[str]:
        return [self.ident] + self.inner.ids()


@dataclass(frozen=True)
class CollectionConcatenation:
    """Append ceil(df * len) copies of randomly chosen existing elements."""

    duplication_factor: float = 1.0
    ident = "M6"

    def accepts(self, schema) -> bool:
        return isinstance(schema, CollectionT)

    def mutate(self, value: list, rng):
        if not value:
            return list(value)
        n = math.ceil(self.duplication_factor * len(value))
        picks = rng.integers(0, len(value), n)
        return list(value) + [value[i] for i in picks]

    def ids(self) -> list[str]:
        return [self.ident]


@dataclass(frozen=True)
class TupleElementMutation:
    slot: int
    inner: object
    ident = "M7"

    def accepts(self, schema) -> bool:
        return (
            isinstance(schema, TupleT)
            and 0 <= self.slot < len(schema.items)
            and self.inner.accepts(schema.items[self.slot])
        )

    def mutate(self, value: tuple, rng):
        out = list(value)
        out[self.slot] = self.inner.mutate(value[self.slot], rng)
        return tuple(out)

    def ids(self) -> list[str]:
        return [self.ident] + self.inner.ids()


# Dataset-level operators: apply(dataset, rng) -> dataset


def _locate(ds: Dataset, flat_index: int) -> tuple[int, int]:
    for p, part in enumerate(ds.partitions):
        if flat_index < len(part):
            return p, flat_index
        flat_index -= len(part)
    raise IndexError(flat_index)


@dataclass(frozen=True)
class RandomRecord:
    inner: object
    ident = "M10"

    def accepts(self, schema) -> bool:
        return self.inner.accepts(schema)

    def apply(self, ds: Dataset, rng) -> Dataset:
        total = len(ds)
        if total == 0:
            return ds
        p, r = _locate(ds, int(rng.integers(0, total)))
        part = list(ds.partitions[p])
        part[r] = self.inner.mutate(part[r], rng)
        return ds.replace_partition(p, part)

    def ids(self) -> list[str]:
        return [self.ident] + self.inner.ids()


def _pair_schema(schema) -> bool:
    return is_pair(schema)


def _redistribute(ds: Dataset, rng, slot: int) -> Dataset:
    """Re-draw one slot of every record from a fresh categorical over its distinct values."""
    distinct: dict = {}
    for rec in ds.records():
        distinct.setdefault(group_key(rec[slot]), rec[slot])
    if not distinct:
        return ds
    pool = list(distinct.values())
    weights = rng.dirichlet(np.ones(len(pool)))
    draws = iter(rng.choice(len(pool), size=len(ds), p=weights))
    parts = []
    for part in ds.partitions:
        new = []
        for rec in part:
            out = list(rec)
            out[slot] = pool[next(draws)]
            new.append(tuple(out))
        parts.append(new)
    return Dataset(ds.schema, tuple(parts))


@dataclass(frozen=True)
class KeyEnumeration:
    ident = "M11"

    def accepts(self, schema) -> bool:
        return _pair_schema(schema)

    def apply(self, ds, rng):
        return _redistribute(ds, rng, 0)

    def ids(self) -> list[str]:
        return [self.ident]


@dataclass(frozen=True)
class ValueEnumeration:
    ident = "M12"

    def accepts(self, schema) -> bool:
        return _pair_schema(schema)

    def apply(self, ds, rng):
        return _redistribute(ds, rng, 1)

    def ids(self) -> list[str]:
        return [self.ident]


def _copies(df: float, partition_size: int) -> int:
    return max(1, _round_half_up(df * partition_size))


@dataclass(frozen=True)
class AppendSameKey:
    """Append copies of an existing key, paired with values taken from random records."""

    duplication_factor: float = 1.0
    ident = "M13"

    def accepts(self, schema) -> bool:
        return _pair_schema(schema)

    def apply(self, ds, rng):
        nonempty = [i for i, part in enumerate(ds.partitions) if part]
        if not nonempty:
            return ds
        p = nonempty[int(rng.integers(0, len(nonempty)))]
        part = ds.partitions[p]
        key = part[int(rng.integers(0, len(part)))][0]
        n = _copies(self.duplication_factor, len(part))
        total = len(ds)
        new = list(part)
        for idx in rng.integers(0, total, n):
            q, r = _locate(ds, int(idx))
            new.append((key, ds.partitions[q][r][1]))
        return ds.replace_partition(p, new)

    def ids(self) -> list[str]:
        return [self.ident]


@dataclass(frozen=True)
class DuplicateValueGeneration:
    """Append records that reuse an existing value under freshly generated keys."""

    duplication_factor: float = 1.0
    int_range: tuple = INT_RANGE
    float_range: tuple = (0.0, 1.0)
    ident = "M14"

    def accepts(self, schema) -> bool:
        return _pair_schema(schema) and is_primitive(schema.items[0])

    def fresh_key(self, schema, rng):
        if isinstance(schema, StrT):
            return _alnum(rng, 8)
        if isinstance(schema, IntT):
            return int(rng.integers(*self.int_range))
        lo, hi = self.float_range
        return float(lo + (hi - lo) * rng.random())

    def apply(self, ds, rng):
        total = len(ds)
        if total == 0:
            return ds
        q, r = _locate(ds, int(rng.integers(0, total)))
        value = ds.partitions[q][r][1]
        p = int(rng.integers(0, ds.n_partitions))
        part = ds.partitions[p]
        n = _copies(self.duplication_factor, len(part))
        key_schema = ds.schema.items[0]
        new = list(part) + [(self.fresh_key(key_schema, rng), value) for _ in range(n)]
        return ds.replace_partition(p, new)

    def ids(self) -> list[str]:
        return [self.ident]


DATASET_OPS = (RandomRecord, KeyEnumeration, ValueEnumeration, AppendSameKey, DuplicateValueGeneration)


def chain_id(chain) -> str:
    return "+".join(chain.ids())


def describe(chain) -> str:
    """Chain id with parameters, e.g. ``M10+M7[1]+M6(5.0)``."""
    parts = []
    op = chain
    while op is not None:
        label = op.ident
        if isinstance(op, TupleElementMutation):
            label += f"[{op.slot}]"
        df = getattr(op, "duplication_factor", None)
        if df is not None:
            label += f"({df:g})"
        parts.append(label)
        op = getattr(op, "inner", None)
    return "+".join(parts)


@dataclass(frozen=True)
class WeightedMutation:
    chain: object
    weight: float

    @property
    def ident(self) -> str:
        return chain_id(self.chain)

    def __str__(self) -> str:
        return f"{describe(self.chain)}: {self.weight:g}"


@dataclass(frozen=True)
class MutationConfig:
    """Knobs for deriving mutations.

    ``disable`` may contain ``"key"`` and/or ``"value"`` to freeze that slot of
    key/value records. ``weight_overrides`` maps a chain id (``"M10+M7+M6"``)
    or a top-level operator id (``"M13"``) to a weight.
    """

    disable: frozenset = frozenset()
    duplication_factor: float = 1.0
    weight_overrides: Mapping[str, float] = field(default_factory=dict)
    float_range: tuple = (0.0, 1.0)
    int_range: tuple = INT_RANGE

    def __post_init__(self):
        object.__setattr__(self, "disable", frozenset(self.disable))
        object.__setattr__(self, "weight_overrides", dict(self.weight_overrides))
        object.__setattr__(self, "float_range", tuple(float(x) for x in self.float_range))
        object.__setattr__(self, "int_range", tuple(int(x) for x in self.int_range))
        self.validate()

    def validate(self) -> None:
        if not self.duplication_factor > 0:
            raise MutationConfigError(f"duplication_factor must be > 0, got {self.duplication_factor}")
        bad = self.disable - {"key", "value"}
        if bad:
            raise MutationConfigError(f"can only disable 'key' or 'value', got {sorted(bad)}")
        lo, hi = self.float_range
        if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
            raise MutationConfigError(f"invalid float_range {self.float_range}")
        if not self.int_range[0] < self.int_range[1]:
            raise MutationConfigError(f"invalid int_range {self.int_range}")
        for key, w in self.weight_overrides.items():
            for ident in key.split("+"):
                if ident in RESERVED_IDS:
                    raise MutationConfigError(f"{ident} is a reserved mutation id")
                if ident not in KNOWN_IDS:
                    raise MutationConfigError(f"unknown mutation id {ident!r}")
            if not (isinstance(w, (int, float)) and w > 0 and math.isfinite(w)):
                raise MutationConfigError(f"weight for {key} must be a positive number, got {w!r}")


def _value_chains(schema, cfg: MutationConfig) -> list:
    if isinstance(schema, IntT):
        return [RandomInteger(*cfg.int_range)]
    if isinstance(schema, FloatT):
        return [RandomDouble(*cfg.float_range)]
    if isinstance(schema, StrT):
        return [ReplaceSubstring()]
    if isinstance(schema, CollectionT):
        inner = [CollectionElementMutation(c) for c in _value_chains(schema.elem, cfg)]
        return inner + [CollectionConcatenation(cfg.duplication_factor)]
    if isinstance(schema, TupleT):
        return [
            TupleElementMutation(i, c)
            for i, s in enumerate(schema.items)
            for c in _value_chains(s, cfg)
        ]
    raise SchemaError(f"unknown schema {schema!r}")


def _alignment(chain) -> tuple[frozenset, frozenset]:
    """(aligned, misaligned) skew categories of a chain."""
    if isinstance(chain, (KeyEnumeration, ValueEnumeration)):
        # Pure redistribution only targets data skew.
        return frozenset(), frozenset({SkewCategory.Computation, SkewCategory.Memory})
    if isinstance(chain, (AppendSameKey, DuplicateValueGeneration)):
        return frozenset({SkewCategory.Data}), frozenset()
    ops = []
    op = chain
    while op is not None:
        ops.append(op)
        op = getattr(op, "inner", None)
    if isinstance(ops[-1], CollectionConcatenation):
        return frozenset({SkewCategory.Memory}), frozenset()
    if any(isinstance(o, CollectionElementMutation) for o in ops):
        return frozenset({SkewCategory.Computation}), frozenset()
    return frozenset(), frozenset()


def default_weight(chain, category: SkewCategory | None) -> float:
    if category is None:
        return NEUTRAL_WEIGHT
    aligned, misaligned = _alignment(chain)
    if category in aligned:
        return ALIGNED_WEIGHT
    if category in misaligned:
        return MISALIGNED_WEIGHT
    return NEUTRAL_WEIGHT


def derive_mutations(
    schema,
    category: SkewCategory | None,
    config: MutationConfig | None = None,
    keys_unique: bool = False,
) -> list[WeightedMutation]:
    """All applicable mutation chains for ``schema`` with weights biased toward ``category``.

    For key/value schemas, freezing the value slot drops chains that write
    values plus M11 and M13, which pair keys with other records' values.
    Freezing the key slot drops chains that write keys plus M11, M12 and M14.
    A keys-unique tap drops M13, which always duplicates a key.
    """
    cfg = config or MutationConfig()
    chains: list = []
    if is_pair(schema):
        for slot, name in ((0, "key"), (1, "value")):
            if name in cfg.disable:
                continue
            for inner in _value_chains(schema.items[slot], cfg):
                chains.append(RandomRecord(TupleElementMutation(slot, inner)))
        key_on = "key" not in cfg.disable
        value_on = "value" not in cfg.disable
        if key_on and value_on:
            chains.append(KeyEnumeration())
        if key_on:
            chains.append(ValueEnumeration())
        df = cfg.duplication_factor
        if value_on and not keys_unique:
            chains.append(AppendSameKey(df))
        if key_on and is_primitive(schema.items[0]):
            chains.append(DuplicateValueGeneration(df, cfg.int_range, cfg.float_range))
    else:
        chains = [RandomRecord(c) for c in _value_chains(schema, cfg)]
    if not chains:
        raise DerivationError(f"no mutation applies to schema {schema} with disabled slots {sorted(cfg.disable)}")
    out = []
    for chain in chains:
        cid = chain_id(chain)
        top = chain.ident
        if cid in cfg.weight_overrides:
            w = float(cfg.weight_overrides[cid])
        elif top in cfg.weight_overrides:
            w = float(cfg.weight_overrides[top])
        else:
            w = default_weight(chain, category)
        out.append(WeightedMutation(chain, w))
    return out


def probabilities(mutations: Sequence[WeightedMutation]) -> list[float]:
    total = sum(m.weight for m in mutations)
    return [m.weight / total for m in mutations]


def sample(mutations: Sequence[WeightedMutation], rng: np.random.Generator):
    """Draw a chain with probability proportional to its weight."""
    if not mutations:
        raise DerivationError("cannot sample from an empty mutation list")
    cum = np.cumsum([m.weight for m in mutations])
    idx = int(np.searchsorted(cum, rng.random() * cum[-1], side="right"))
    return mutations[min(idx, len(mutations) - 1)].chain


def apply_mutation(chain, ds: Dataset, rng: np.random.Generator) -> Dataset:
    if not chain.accepts(ds.schema):
        raise SchemaError(f"{describe(chain)} cannot mutate a dataset of {ds.schema}")
    return chain.apply(ds, rng)
