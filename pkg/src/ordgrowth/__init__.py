"""Generalized entropy of dynamical systems: growth curves, order classes, cascades."""
from .growth_order import (DEFAULT_CATALOG, UNRESOLVED, Family, GrowthSequence, OrderRelation,
                           SymbolicOrder, classify_sequence, compare_sequences, compare_symbolic,
                           project_onto_family)
from .systems import DynamicalSystemSpec, construct
from .estimators import growth_curve
from .entropy_report import EntropyProfile, entropy_numbers, entropy_profile
from .cascade import CascadeParams, build_cascade, verify_bounds
from .homology import block_profile, power_norm_growth, shub_exponent, spectral_radius

__version__ = "0.1.0"
