"""Exception types shared across the package."""


class SkewFuzzError(Exception):
    """Base class for all package errors."""


class SchemaError(SkewFuzzError):
    pass


class EncodingError(SkewFuzzError):
    pass


class FormatError(SkewFuzzError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte offset {offset})")
        self.offset = offset


class ConstraintError(SkewFuzzError):
    pass


class UdfError(SkewFuzzError):
    def __init__(self, stage_id: int, partition: int, cause: BaseException):
        super().__init__(f"UDF failed in stage {stage_id}, partition {partition}: {cause!r}")
        self.stage_id = stage_id
        self.partition = partition
        self.cause = cause


class MetricError(SkewFuzzError):
    pass


class MonitorError(SkewFuzzError):
    pass


class DerivationError(SkewFuzzError):
    pass


class MutationConfigError(SkewFuzzError):
    pass


class RegistryError(SkewFuzzError):
    pass


class InverseError(SkewFuzzError):
    pass


class DomainError(SkewFuzzError):
    pass


class ConfigError(SkewFuzzError):
    pass


class IoError(SkewFuzzError):
    """Raised when an input file or directory cannot be read."""
