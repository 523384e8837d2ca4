"""File and report models."""

from tvgroups.models.automaton import AutomatonFile, StepTableFile
from tvgroups.models.classification import (
    ClassificationRow,
    GroupKind,
    GroupType,
    VerdictSummary,
)

__all__ = [
    "AutomatonFile",
    "ClassificationRow",
    "GroupKind",
    "GroupType",
    "StepTableFile",
    "VerdictSummary",
]
