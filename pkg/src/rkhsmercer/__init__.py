"""Reproducing kernel Hilbert spaces, integral operators and Mercer decompositions
on discrete measures."""
from ._backend import BACKEND
from .errors import RkhsError
from .kernels import (ContinuityReport, GramMatrix, KernelSpec, PositivityReport, block_pair,
                      check_positive_type, continuity_probe, cross_gram, evaluate_kernel,
                      feature_distance, gram, quadratic_form)
from .measure import DiscreteMeasure, build_block_measure, build_uniform_grid, lp_norm
from .mercer import (MercerDecomposition, cluster_projectors, decompose, eigenvalue_clusters,
                     membership_test, pointwise_mass, reconstruct_kernel, rkhs_norm_spectral,
                     spectral_projector)
from .operator import (CarrierMap, OperatorMatrix, adjoint_apply, apply_integral_operator,
                       carleman_report, forward_apply, frame_operator, hs_diagnostic,
                       integral_operator, opnorm_estimate, verify_factorization)
from .rkhs import (RkhsElement, evaluate_at, evaluate_element, interpolate, reproducing_check,
                   rkhs_inner)

__version__ = "0.1.0"
