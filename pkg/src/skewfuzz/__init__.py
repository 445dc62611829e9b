"""Performance-workload fuzzing for small dataflow programs."""

from .dataflow import Pipeline, PipelineBuilder, TapPoint, execute, execute_from, execute_prefix
from .fuzzer import Budget, Campaign, FuzzResult, PhasedResult, run_baseline, run_phased
from .metrics import Custom, MetricKind, MetricsReport
from .monitors import IQROutlier, MaximumThreshold, MonitorBinding, NextComparison, Skewness, Verdict
from .mutations import MutationConfig, apply_mutation, derive_mutations, sample
from .values import CollectionT, Dataset, FloatT, IntT, StrT, TupleT

__version__ = "0.1.0"
