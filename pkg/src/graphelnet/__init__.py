"""Penalized precision-matrix estimation with L1/L2 penalties and
diagonal shrinkage targets."""

from .core import (FitResult, KktReport, ProblemSpec, SolverConfig,
                   fold_indices, kkt_residuals, objective, read_matrix,
                   sample_covariance, validate, write_matrix)
from .cv import CvResult, cross_validate, cv_score
from .dpgelnet import dpgelnet_fit, schur_check
from .evaluation import (ConfusionCounts, GroundTruth, ModelSpec, f1,
                         gen_model, graph_confusion, kl_loss, l2_loss, mcc,
                         sample_gaussian, sp_loss)
from .gelnet import (DiagCase, gelnet_fit, gelnet_fit_target, scalar_fit,
                     solve_diag_quadratic, target_case_select)
from .rope import eigen_decomp, rope_fit, rope_solve
from .screening import (ComponentPartition, connected_components, estimate,
                        solve_blockwise, threshold_graph)
from .subsolvers import (BoxQpSubproblem, EnetSubproblem, NumericalError,
                         boxqp_cd_solve, boxqp_weights, enet_cd_solve,
                         soft_threshold)
from .targets import (DiagonalTarget, TargetKind, make_target,
                      target_eigenvalue, target_identity,
                      target_max_single_correlation, target_nodewise,
                      target_true_diagonal, target_v_identity)

__version__ = "0.1.0"

__all__ = [
    "BoxQpSubproblem", "ComponentPartition", "ConfusionCounts", "CvResult",
    "DiagCase", "DiagonalTarget", "EnetSubproblem", "FitResult",
    "GroundTruth", "KktReport", "ModelSpec", "NumericalError", "ProblemSpec",
    "SolverConfig", "TargetKind", "boxqp_cd_solve", "boxqp_weights",
    "connected_components", "cross_validate", "cv_score", "dpgelnet_fit",
    "eigen_decomp", "enet_cd_solve", "estimate", "f1", "fold_indices",
    "gelnet_fit", "gelnet_fit_target", "gen_model", "graph_confusion",
    "kkt_residuals", "kl_loss", "l2_loss", "make_target", "mcc", "objective",
    "read_matrix", "rope_fit", "rope_solve", "sample_covariance",
    "sample_gaussian", "scalar_fit", "schur_check", "soft_threshold",
    "solve_blockwise", "solve_diag_quadratic", "sp_loss",
    "target_case_select", "target_eigenvalue", "target_identity",
    "target_max_single_correlation", "target_nodewise",
    "target_true_diagonal", "target_v_identity", "threshold_graph",
    "validate", "write_matrix",
]
