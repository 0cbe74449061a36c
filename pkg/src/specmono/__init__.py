"""Spectral bounds of dispersal networks and the patch models built on them."""

from ._accel import backend_name
from .errors import (CapacityError, DegenerateCaseError, DomainError, NoThresholdError,
                     NumericError, SpecmonoError, StructureError, ValidationError)
from .models import (SIS, Competition, PredatorPrey, SingleSpecies, classify_regime,
                     competition_outcome, disease_free_equilibrium, model_jacobian, model_rhs,
                     predprey_threshold, r0_sweep, single_equilibrium, sis_r0)
from .netmat import (BlockDecomposition, DispersalNetwork, MatrixClass, build_network,
                     classify_matrix, scc_blocks, strongly_connected)
from .odeint import IntegratorConfig, Trajectory, integrate, integrate_to_equilibrium
from .spectral import (EigenTriple, LimitPair, SpectralCurve, asymptotic_limits,
                       bound_curve, bound_derivative, collatz_wielandt, karlin_map,
                       principal_eigen, spectral_bound, threshold_mu)
from .treecycle import (InTree, KVector, UnicyclicSubgraph, construct_k_vector,
                        enumerate_in_trees, enumerate_unicyclic, principal_cofactors,
                        tree_cycle_residual, verify_k_vector)

__version__ = "0.1.0"

__all__ = [
    "backend_name",
    "CapacityError", "DegenerateCaseError", "DomainError", "NoThresholdError", "NumericError",
    "SpecmonoError", "StructureError", "ValidationError",
    "SIS", "Competition", "PredatorPrey", "SingleSpecies", "classify_regime",
    "competition_outcome", "disease_free_equilibrium", "model_jacobian", "model_rhs",
    "predprey_threshold", "r0_sweep", "single_equilibrium", "sis_r0",
    "BlockDecomposition", "DispersalNetwork", "MatrixClass", "build_network",
    "classify_matrix", "scc_blocks", "strongly_connected",
    "IntegratorConfig", "Trajectory", "integrate", "integrate_to_equilibrium",
    "EigenTriple", "LimitPair", "SpectralCurve", "asymptotic_limits", "bound_curve",
    "bound_derivative", "collatz_wielandt", "karlin_map", "principal_eigen", "spectral_bound",
    "threshold_mu",
    "InTree", "KVector", "UnicyclicSubgraph", "construct_k_vector", "enumerate_in_trees",
    "enumerate_unicyclic", "principal_cofactors", "tree_cycle_residual", "verify_k_vector",
]
