"""Functional distance-weighted discrimination (fDWD / PLfDWD)."""

import json

from ._core import (
    FdwdError,
    IoError,
    Model,
    SolverError,
    ValidationError,
    bayes_error,
    cross_validate,
    fit,
    gram,
    hinge,
    kernel,
    run_cli,
    simulate,
    vq,
    vq_grad,
)
from ._core import benchmark_json as _benchmark_json

__version__ = "0.1.0"


def benchmark(scenario, with_scalars, seed, **kwargs):
    """Run the repeated train/test study and return the parsed JSON report."""
    return json.loads(_benchmark_json(scenario, with_scalars, seed, **kwargs))


__all__ = [
    "FdwdError",
    "IoError",
    "Model",
    "SolverError",
    "ValidationError",
    "bayes_error",
    "benchmark",
    "cross_validate",
    "fit",
    "gram",
    "hinge",
    "kernel",
    "run_cli",
    "simulate",
    "vq",
    "vq_grad",
]
