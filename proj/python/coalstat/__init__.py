"""Site-frequency-spectrum recursions, coalescent simulation and LR tests."""

from ._core import (
    ArgumentError,
    DegenerateDataError,
    DomainError,
    ParseError,
    UnsupportedModelError,
    canonical_model,
    expected_sfs,
    expected_total_length,
    lambda_rate,
    loglik,
    lr_test,
    phi,
    simulate_sfs,
    summarize,
    watterson,
    xi_fourfold_rate,
)

__all__ = [
    "ArgumentError",
    "DegenerateDataError",
    "DomainError",
    "ParseError",
    "UnsupportedModelError",
    "canonical_model",
    "expected_sfs",
    "expected_total_length",
    "lambda_rate",
    "loglik",
    "lr_test",
    "phi",
    "simulate_sfs",
    "summarize",
    "watterson",
    "xi_fourfold_rate",
]
