"""Pseudo-inverse functions that lift UDF-level inputs back to program inputs.

A pseudo-inverse maps a dataset at a tap point to a program input which,
when run through the stages before the tap, approximately reproduces it.
Inverses are registered under a string id together with the pipeline and
tap stage they serve.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Callable

from .dataflow import Pipeline, TapPoint, execute_prefix, group_key
from .errors import InverseError, RegistryError, SchemaError
from .values import Dataset, Schema, is_pair


@dataclass(frozen=True)
class PseudoInverse:
    ident: str
    pipeline: str
    stage_id: int
    input_schema: Schema
    output_schema: Schema
    fn: Callable[[Dataset], Dataset]
    description: str = ""


class InverseRegistry:
    def __init__(self):
        self._by_id: dict[str, PseudoInverse] = {}

    def register(self, inverse: PseudoInverse) -> None:
        if inverse.ident in self._by_id:
            raise RegistryError(f"inverse {inverse.ident!r} is already registered")
        self._by_id[inverse.ident] = inverse

    def get(self, ident: str) -> PseudoInverse:
        try:
            return self._by_id[ident]
        except KeyError:
            raise RegistryError(f"no inverse registered as {ident!r}") from None

    def for_tap(self, pipeline: str, stage_id: int) -> list[PseudoInverse]:
        return [inv for inv in self._by_id.values() if inv.pipeline == pipeline and inv.stage_id == stage_id]

    def ids(self) -> list[str]:
        return sorted(self._by_id)

    def __contains__(self, ident: str) -> bool:
        return ident in self._by_id


def apply_inverse(registry: InverseRegistry, ident: str, data: Dataset) -> Dataset:
    inv = registry.get(ident)
    if data.schema != inv.input_schema:
        raise SchemaError(f"inverse {ident!r} expects {inv.input_schema}, got {data.schema}")
    try:
        lifted = inv.fn(data)
    except Exception as exc:
        raise InverseError(f"inverse {ident!r} failed: {exc!r}") from exc
    if lifted.schema != inv.output_schema:
        raise SchemaError(f"inverse {ident!r} produced {lifted.schema}, expected {inv.output_schema}")
    lifted.validate()
    return lifted


@dataclass(frozen=True)
class ValidationReport:
    schema_ok: bool
    key_overlap: float
    rederived: Dataset


def _keys(ds: Dataset) -> Counter:
    if is_pair(ds.schema):
        return Counter(group_key(rec[0]) for rec in ds.records())
    return Counter(group_key(rec) for rec in ds.records())


def multiset_jaccard(a: Counter, b: Counter) -> float:
    if not a and not b:
        return 1.0
    inter = sum((a & b).values())
    union = sum((a | b).values())
    return inter / union


def validate_inverse(
    registry: InverseRegistry, ident: str, sample: Dataset, pipeline: Pipeline, tap: TapPoint | None = None
) -> ValidationReport:
    """Lift ``sample``, replay the prefix, and compare with the original tap data."""
    inv = registry.get(ident)
    tap = tap or TapPoint(inv.stage_id)
    lifted = apply_inverse(registry, ident, sample)
    rederived = execute_prefix(pipeline, lifted, tap)
    schema_ok = rederived.schema == sample.schema
    if schema_ok:
        try:
            rederived.validate()
        except SchemaError:
            schema_ok = False
    return ValidationReport(schema_ok, multiset_jaccard(_keys(sample), _keys(rederived)), rederived)


_default: InverseRegistry | None = None


def default_registry() -> InverseRegistry:
    """Registry holding the inverses shipped with the benchmark programs."""
    global _default
    if _default is None:
        from .benchmarks import register_inverses

        reg = InverseRegistry()
        register_inverses(reg)
        _default = reg
    return _default
