"""Automata, group elements, constructions and classification."""

from tvgroups.services.automaton import Automaton, AutomatonError, load_automaton, validate
from tvgroups.services.batch import BatchClassifier
from tvgroups.services.classify import (
    ClassificationError,
    EnumerationCapError,
    classify_abelian_mealy,
    enumerate_invertible_mealy,
    relation_lattice,
)
from tvgroups.services.errors import InputError, LimitExceededError, TVGroupsError
from tvgroups.services.group_engine import Element, is_identity, order_pow2

__all__ = [
    "Automaton",
    "AutomatonError",
    "BatchClassifier",
    "ClassificationError",
    "Element",
    "EnumerationCapError",
    "InputError",
    "LimitExceededError",
    "TVGroupsError",
    "classify_abelian_mealy",
    "enumerate_invertible_mealy",
    "is_identity",
    "load_automaton",
    "order_pow2",
    "relation_lattice",
    "validate",
]
