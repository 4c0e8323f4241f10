"""Compressive spread-spectrum receiver: Gold dictionaries, sub-Nyquist
operators, subspace pursuit and the BER / phase-transition experiments."""

import json

from ._core import (
    DomainError,
    Error,
    MeasurementOperator,
    gold_dictionary,
    gold_t,
    m_sequence,
    measurement_count,
    mfsk_ber,
    periodic_correlation,
    predicted_cost,
    run_config_text,
    subspace_pursuit,
)


def run_config(text, threads=1, seed=None):
    """Run a YAML experiment config; returns the result table as a dict."""
    return json.loads(run_config_text(text, threads, seed))


__all__ = [
    "DomainError",
    "Error",
    "MeasurementOperator",
    "gold_dictionary",
    "gold_t",
    "m_sequence",
    "measurement_count",
    "mfsk_ber",
    "periodic_correlation",
    "predicted_cost",
    "run_config",
    "run_config_text",
    "subspace_pursuit",
]
