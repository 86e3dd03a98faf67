"""Gradient-flow analysis of complex Hadamard matrices."""
from .center_manifold import CMExpansion, FlowVerdict, detect_flow, evaluate_embedding, expand, tangency_residual
from .exact import ExactAffineMatrix, ExactPhase, Verdict, to_phase_vector, verify_affine_family
from .families import (FamilyCandidate, IntegerKernelBasis, VerifiedSubset, integer_kernel_basis,
                       lift_to_family, search_subsets)
from .flow import FlowSnapshot, SimConfig, integrate, pca_project, sample_neighborhood
from .phase_core import PhaseVector, build_matrix, gradient, jacobian, potential
from .precision import Precision
from .spectral import (DefectMismatch, DefectReport, SpectralData, cross_check_defect, defect_flow,
                       defect_linear_system, spectrum)

__all__ = [
    "CMExpansion", "FlowVerdict", "detect_flow", "evaluate_embedding", "expand", "tangency_residual",
    "ExactAffineMatrix", "ExactPhase", "Verdict", "to_phase_vector", "verify_affine_family",
    "FamilyCandidate", "IntegerKernelBasis", "VerifiedSubset", "integer_kernel_basis",
    "lift_to_family", "search_subsets",
    "FlowSnapshot", "SimConfig", "integrate", "pca_project", "sample_neighborhood",
    "PhaseVector", "build_matrix", "gradient", "jacobian", "potential",
    "Precision",
    "DefectMismatch", "DefectReport", "SpectralData", "cross_check_defect", "defect_flow",
    "defect_linear_system", "spectrum",
]
