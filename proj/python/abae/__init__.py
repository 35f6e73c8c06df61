"""Two-stage stratified sampling for aggregates over expensive predicates."""

import json

from ._core import (
    AbaeError,
    BudgetExhausted,
    Dataset,
    DuplicateId,
    InvalidK,
    NoPositiveSamples,
    OracleProtocolError,
    ParseError,
    generate,
    loss,
    mse_upper_bound,
    optimal_allocation,
    population_truth,
    run_json,
)


def run(dataset, **kwargs):
    """Runs one query and returns the report as a dict.

    Keyword arguments: k, n1, n2, reuse, seed, resamples, alpha, compute_ci and
    oracle, a callable taking a list of ids and returning (predicate, value)
    pairs in the same order.
    """
    return json.loads(run_json(dataset, **kwargs))


__all__ = [
    "AbaeError",
    "BudgetExhausted",
    "Dataset",
    "DuplicateId",
    "InvalidK",
    "NoPositiveSamples",
    "OracleProtocolError",
    "ParseError",
    "generate",
    "loss",
    "mse_upper_bound",
    "optimal_allocation",
    "population_truth",
    "run",
    "run_json",
]
