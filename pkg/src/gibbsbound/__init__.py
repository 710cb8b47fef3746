"""Certified entropy and pressure brackets for nearest-neighbour lattice Gibbs measures.

The package computes two-sided, always-valid bounds on the entropy rate and
pressure of translation-invariant nearest-neighbour Gibbs measures on the
d-dimensional integer lattice, together with certified bounds on local
marginal and conditional probabilities.  Bounds are obtained by extremising
finite-volume conditional distributions over all admissible boundary
configurations of a padded box; under strong spatial mixing the resulting
intervals shrink exponentially in the padding width.
"""

from .model import Alphabet, Configuration, InteractionModel
from .bounds import BoundPair, marginal_bounds, conditional_bounds
from .estimator import (
    BracketReport,
    EntropyContext,
    adaptive_entropy_bracket,
    entropy_rate_bracket,
    f_bracket,
    pressure_bracket,
)
from .ssm import SsmCertificate, q_of_spec

__all__ = [
    "Alphabet",
    "Configuration",
    "InteractionModel",
    "BoundPair",
    "marginal_bounds",
    "conditional_bounds",
    "BracketReport",
    "EntropyContext",
    "adaptive_entropy_bracket",
    "entropy_rate_bracket",
    "f_bracket",
    "pressure_bracket",
    "SsmCertificate",
    "q_of_spec",
]

__version__ = "0.1.0"
