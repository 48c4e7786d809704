from .state import SiteGraph, NetworkState, Edit, EditKind, apply_edit, format_state, parse_state, make_state
from .variants import Variant, VariantTag, ParticleKind, Boundary
from .spec import (
    RateFamilies, Truncation, Tolerances, ModelSpec,
    state_dimension, enumerate_states, occupancies, task_vectors, check_admissible, in_box,
)

__all__ = [
    "SiteGraph", "NetworkState", "Edit", "EditKind", "apply_edit", "format_state", "parse_state", "make_state",
    "Variant", "VariantTag", "ParticleKind", "Boundary",
    "RateFamilies", "Truncation", "Tolerances", "ModelSpec",
    "state_dimension", "enumerate_states", "occupancies", "task_vectors", "check_admissible", "in_box",
]
