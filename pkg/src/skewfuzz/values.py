"""Dynamic value model, schemas, and dataset codecs.

Values are plain Python objects: ``int``, ``float``, ``str``, ``tuple`` for
fixed-arity tuples and ``list`` for collections. Schemas describe their shape
and drive conformance checks and the binary encoding. Values are treated as
immutable; every mutation builds new containers.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Iterator, Sequence, Union

from .errors import EncodingError, FormatError, IoError, SchemaError

Value = Union[int, float, str, tuple, list]

INT64_MIN = -(2**63)
INT64_MAX = 2**63 - 1


@dataclass(frozen=True)
class IntT:
    def __str__(self) -> str:
        return "Int"


@dataclass(frozen=True)
class FloatT:
    def __str__(self) -> str:
        return "Float"


@dataclass(frozen=True)
class StrT:
    def __str__(self) -> str:
        return "Str"


@dataclass(frozen=True)
class TupleT:
    items: tuple

    def __init__(self, *items):
        # Accept both TupleT(a, b) and TupleT((a, b)).
        if len(items) == 1 and isinstance(items[0], (tuple, list)):
            items = tuple(items[0])
        object.__setattr__(self, "items", tuple(items))

    def __str__(self) -> str:
        return "(" + ", ".join(str(s) for s in self.items) + ")"


@dataclass(frozen=True)
class CollectionT:
    elem: object

    def __str__(self) -> str:
        return f"Collection[{self.elem}]"


Schema = Union[IntT, FloatT, StrT, TupleT, CollectionT]
PRIMITIVES = (IntT, FloatT, StrT)


def is_primitive(schema: Schema) -> bool:
    return isinstance(schema, PRIMITIVES)


def is_pair(schema: Schema) -> bool:
    """True for key/value record schemas, i.e. arity-2 tuples."""
    return isinstance(schema, TupleT) and len(schema.items) == 2


def conforms(value: Value, schema: Schema) -> bool:
    t = type(value)
    if isinstance(schema, IntT):
        return t is int and INT64_MIN <= value <= INT64_MAX
    if isinstance(schema, FloatT):
        return t is float
    if isinstance(schema, StrT):
        return t is str
    if isinstance(schema, TupleT):
        return (
            t is tuple
            and len(value) == len(schema.items)
            and all(conforms(v, s) for v, s in zip(value, schema.items))
        )
    if isinstance(schema, CollectionT):
        return t is list and all(conforms(v, schema.elem) for v in value)
    raise SchemaError(f"unknown schema {schema!r}")


def estimate_bytes(value: Value) -> int:
    """Size estimate: 8 per number, UTF-8 length per string, 8 per container plus contents."""
    t = type(value)
    if t is str:
        return len(value) if value.isascii() else len(value.encode("utf-8"))
    if t is int or t is float:
        return 8
    return 8 + sum(map(estimate_bytes, value))


# Canonical encoding: one tag byte per value, big-endian fixed-width numbers,
# u32 length prefixes. Used for hashing, ordering and the structured format.
_TAG_INT, _TAG_FLOAT, _TAG_STR, _TAG_TUPLE, _TAG_COLL = b"i", b"f", b"s", b"t", b"c"
_Q = struct.Struct(">q")
_D = struct.Struct(">d")
_U32 = struct.Struct(">I")


def _encode_into(value: Value, out: bytearray) -> None:
    t = type(value)
    if t is int:
        out += _TAG_INT
        out += _Q.pack(value)
    elif t is float:
        out += _TAG_FLOAT
        out += _D.pack(value)
    elif t is str:
        raw = value.encode("utf-8")
        out += _TAG_STR
        out += _U32.pack(len(raw))
        out += raw
    elif t is tuple or t is list:
        out += _TAG_TUPLE if t is tuple else _TAG_COLL
        out += _U32.pack(len(value))
        for v in value:
            _encode_into(v, out)
    else:
        raise SchemaError(f"cannot encode value of type {t.__name__}")


def canonical_bytes(value: Value) -> bytes:
    out = bytearray()
    _encode_into(value, out)
    return bytes(out)


FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
_MASK64 = 0xFFFFFFFFFFFFFFFF


def fnv1a_64(data: bytes) -> int:
    h = FNV_OFFSET
    for b in data:
        h = ((h ^ b) * FNV_PRIME) & _MASK64
    return h


@lru_cache(maxsize=1 << 16)
def _cached_hash(tagged) -> int:
    return fnv1a_64(canonical_bytes(tagged[1]))


def stable_hash(key: Value) -> int:
    """64-bit FNV-1a of the canonical encoding; identical on every platform."""
    try:
        return _cached_hash((type(key), key))
    except TypeError:  # unhashable (collection) keys skip the cache
        return fnv1a_64(canonical_bytes(key))


@dataclass(frozen=True)
class Dataset:
    """A schema plus an ordered list of partitions of records."""

    schema: Schema
    partitions: tuple = field(default=((),))

    def __post_init__(self):
        parts = tuple(p if type(p) is list else list(p) for p in self.partitions)
        if not parts:
            raise SchemaError("a dataset needs at least one partition")
        object.__setattr__(self, "partitions", parts)

    @property
    def n_partitions(self) -> int:
        return len(self.partitions)

    def __len__(self) -> int:
        return sum(len(p) for p in self.partitions)

    def records(self) -> Iterator[Value]:
        for p in self.partitions:
            yield from p

    def validate(self) -> None:
        for i, part in enumerate(self.partitions):
            for j, rec in enumerate(part):
                if not conforms(rec, self.schema):
                    raise SchemaError(
                        f"record {j} of partition {i} does not conform to {self.schema}: {rec!r}"
                    )

    def replace_partition(self, index: int, records: list) -> "Dataset":
        parts = list(self.partitions)
        parts[index] = records
        return Dataset(self.schema, tuple(parts))


def dataset(schema: Schema, partitions: Iterable[Sequence[Value]], validate: bool = True) -> Dataset:
    ds = Dataset(schema, tuple(partitions))
    if validate:
        ds.validate()
    return ds


# Text codec: one record per line, one part-NNNNN file per partition.


def encode_text(ds: Dataset) -> list[str]:
    if not isinstance(ds.schema, StrT):
        raise SchemaError(f"text encoding needs a Str dataset, got {ds.schema}")
    files = []
    for i, part in enumerate(ds.partitions):
        for rec in part:
            if "\n" in rec:
                raise EncodingError(f"record in partition {i} contains a newline")
        files.append("".join(rec + "\n" for rec in part))
    return files


def decode_text(files: Sequence[str], n_partitions: int | None = None) -> Dataset:
    """Decode file contents; with ``n_partitions`` the records are re-split into contiguous chunks."""
    parts = []
    for content in files:
        lines = content.split("\n")
        if lines and lines[-1] == "":
            lines.pop()
        parts.append(lines)
    if n_partitions is not None and n_partitions != len(parts):
        if n_partitions < 1:
            raise SchemaError("n_partitions must be positive")
        flat = [r for p in parts for r in p]
        size, extra = divmod(len(flat), n_partitions)
        parts, start = [], 0
        for i in range(n_partitions):
            end = start + size + (1 if i < extra else 0)
            parts.append(flat[start:end])
            start = end
    if not parts:
        parts = [[]]
    return Dataset(StrT(), tuple(parts))


def part_name(i: int) -> str:
    return f"part-{i:05d}"


def write_text_dir(ds: Dataset, directory: str | Path) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for i, content in enumerate(encode_text(ds)):
        with open(directory / part_name(i), "w", encoding="utf-8", newline="") as fh:
            fh.write(content)
    return directory


def read_text_dir(directory: str | Path, n_partitions: int | None = None) -> Dataset:
    directory = Path(directory)
    if not directory.is_dir():
        raise IoError(f"input directory not found: {directory}")
    files = sorted(p for p in directory.iterdir() if p.is_file() and not p.name.startswith((".", "_")))
    if not files:
        raise IoError(f"no input files in {directory}")
    contents = []
    for p in files:
        try:
            with open(p, encoding="utf-8", newline="") as fh:
                contents.append(fh.read())
        except (OSError, UnicodeDecodeError) as exc:
            raise IoError(f"cannot read {p}: {exc}") from exc
    return decode_text(contents, n_partitions)


# Structured codec: magic, version, schema, then tagged records per partition.

MAGIC = b"SKDS"
FORMAT_VERSION = 1
_SCHEMA_TAGS = {IntT: b"I", FloatT: b"F", StrT: b"S"}


def _encode_schema(schema: Schema, out: bytearray) -> None:
    if isinstance(schema, PRIMITIVES):
        out += _SCHEMA_TAGS[type(schema)]
    elif isinstance(schema, TupleT):
        out += b"T"
        out += _U32.pack(len(schema.items))
        for s in schema.items:
            _encode_schema(s, out)
    elif isinstance(schema, CollectionT):
        out += b"C"
        _encode_schema(schema.elem, out)
    else:
        raise SchemaError(f"unknown schema {schema!r}")


def encode_structured(ds: Dataset) -> bytes:
    ds.validate()
    out = bytearray(MAGIC)
    out += _U32.pack(FORMAT_VERSION)
    _encode_schema(ds.schema, out)
    out += _U32.pack(ds.n_partitions)
    for part in ds.partitions:
        out += _U32.pack(len(part))
        for rec in part:
            _encode_into(rec, out)
    return bytes(out)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int, what: str) -> bytes:
        if self.pos + n > len(self.data):
            raise FormatError(f"truncated input while reading {what}", self.pos)
        chunk = self.data[self.pos : self.pos + n]
        self.pos += n
        return chunk

    def u32(self, what: str) -> int:
        return _U32.unpack(self.take(4, what))[0]

    def schema(self, depth: int = 0) -> Schema:
        if depth > 64:
            raise FormatError("schema nesting too deep", self.pos)
        at = self.pos
        tag = self.take(1, "schema tag")
        if tag == b"I":
            return IntT()
        if tag == b"F":
            return FloatT()
        if tag == b"S":
            return StrT()
        if tag == b"T":
            n = self.u32("tuple arity")
            return TupleT(tuple(self.schema(depth + 1) for _ in range(n)))
        if tag == b"C":
            return CollectionT(self.schema(depth + 1))
        raise FormatError(f"unknown schema tag {tag!r}", at)

    def value(self, schema: Schema) -> Value:
        at = self.pos
        tag = self.take(1, "value tag")
        if isinstance(schema, IntT) and tag == _TAG_INT:
            return _Q.unpack(self.take(8, "int"))[0]
        if isinstance(schema, FloatT) and tag == _TAG_FLOAT:
            return _D.unpack(self.take(8, "float"))[0]
        if isinstance(schema, StrT) and tag == _TAG_STR:
            n = self.u32("string length")
            raw = self.take(n, "string bytes")
            try:
                return raw.decode("utf-8")
            except UnicodeDecodeError:
                raise FormatError("invalid UTF-8 in string", at) from None
        if isinstance(schema, TupleT) and tag == _TAG_TUPLE:
            n = self.u32("tuple arity")
            if n != len(schema.items):
                raise FormatError(f"tuple arity {n} does not match schema {schema}", at)
            return tuple(self.value(s) for s in schema.items)
        if isinstance(schema, CollectionT) and tag == _TAG_COLL:
            n = self.u32("collection length")
            return [self.value(schema.elem) for _ in range(n)]
        raise FormatError(f"value tag {tag!r} does not match schema {schema}", at)


def decode_structured(data: bytes) -> Dataset:
    r = _Reader(data)
    if r.take(4, "magic") != MAGIC:
        raise FormatError("bad magic number", 0)
    version = r.u32("format version")
    if version != FORMAT_VERSION:
        raise FormatError(f"unsupported format version {version}", 4)
    schema = r.schema()
    n_parts = r.u32("partition count")
    if n_parts < 1:
        raise FormatError("dataset has no partitions", r.pos - 4)
    parts = []
    for _ in range(n_parts):
        count = r.u32("record count")
        parts.append([r.value(schema) for _ in range(count)])
    if r.pos != len(data):
        raise FormatError("trailing bytes after dataset", r.pos)
    return Dataset(schema, tuple(parts))
