"""Quantization dimension of the self-similar measure of the IFS x/3 + i, i in {0, 1, 3}.

The maps S_0 S_3 and S_1 S_0 coincide, so distinct digit words can induce the
same map. Canonical words (no factor (0, 3)) index the distinct maps; the
class potential ``psi`` of a canonical word is the total mass of its class.
The quantization dimension of order r is ``chi_r = t0 r / (1 - t0)``, where
``t0`` solves ``p(t) = r t log 3`` for the pressure ``p`` of ``psi**t``.

Modules
-------
symbolic    words, canonicalization, blocks, cylinder intervals
potential   psi, psi-hat and the block masses a_w
pressure    partition sums, pressure, t0 and chi_r
antichain   first-passage antichains of the hat potential
measure     finite-depth discretizations and samplers
quantizer   exact 1-d optimal quantizers and dimension fits
estimators  scikit-learn style wrappers
cli         the ``qdim`` command
"""

from .exceptions import (
    ConsistencyError,
    DomainError,
    QdimError,
    SizeLimitError,
    StandingAssumptionError,
)
from .measure import DiscreteMeasure, discretize, sample, self_similarity_check
from .potential import Potential, ProbabilityVector
from .pressure import DimensionResult, hausdorff_dim, partition_sum, pressure, solve_t0
from .quantizer import Codebook, DimensionFit, cost, estimate_dimension, optimal_quantizer

__version__ = "0.1.0"

__all__ = [
    "Codebook",
    "ConsistencyError",
    "DimensionFit",
    "DimensionResult",
    "DiscreteMeasure",
    "DomainError",
    "Potential",
    "ProbabilityVector",
    "QdimError",
    "SizeLimitError",
    "StandingAssumptionError",
    "cost",
    "discretize",
    "estimate_dimension",
    "hausdorff_dim",
    "optimal_quantizer",
    "partition_sum",
    "pressure",
    "sample",
    "self_similarity_check",
    "solve_t0",
]
