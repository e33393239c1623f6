"""Process discovery on partially ordered event logs."""

from .model import (
    END,
    START,
    CandidatePlace,
    CycleError,
    EventLog,
    ExtendedLpo,
    Lpo,
    PoMinerError,
    ReservedLabelError,
    WorkflowNet,
    normalize_order,
    validate_lpo,
)

__version__ = "0.1.0"

__all__ = [
    "END",
    "START",
    "CandidatePlace",
    "CycleError",
    "EventLog",
    "ExtendedLpo",
    "Lpo",
    "PoMinerError",
    "ReservedLabelError",
    "WorkflowNet",
    "normalize_order",
    "validate_lpo",
]
