"""Python bindings for the faultlab soft-error injection engine."""

from ._faultlab import (
    EVENT_NAMES,
    BENCHMARK_NAMES,
    FaultlabError,
    assemble,
    run_program,
    benchmark_source,
    golden_run,
    run_campaign,
    write_campaign,
    analyze,
    classify,
    required_repetitions,
    z_normalize,
    gaussianize,
    inverse_normal_cdf,
    pca,
    histogram,
    summarize,
    __version__,
)

__all__ = [
    "EVENT_NAMES",
    "BENCHMARK_NAMES",
    "FaultlabError",
    "assemble",
    "run_program",
    "benchmark_source",
    "golden_run",
    "run_campaign",
    "write_campaign",
    "analyze",
    "classify",
    "required_repetitions",
    "z_normalize",
    "gaussianize",
    "inverse_normal_cdf",
    "pca",
    "histogram",
    "summarize",
    "__version__",
]
