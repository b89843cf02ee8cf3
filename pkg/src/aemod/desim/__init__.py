"""Discrete-event simulation of the zone's queuing network."""
from .abstract import lindley_departures, run_abstract
from .physical import run_physical
from .report import (
    CSV_FIELDS,
    ClassStats,
    ClassValidation,
    SimConfig,
    SimReport,
    validate_against_formula,
)


def run(cfg: SimConfig) -> SimReport:
    if cfg.mode == "abstract":
        return run_abstract(cfg)
    return run_physical(cfg)


__all__ = [
    "CSV_FIELDS",
    "ClassStats",
    "ClassValidation",
    "SimConfig",
    "SimReport",
    "lindley_departures",
    "run",
    "run_abstract",
    "run_physical",
    "validate_against_formula",
]
