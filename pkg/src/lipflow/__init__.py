"""lipflow: a desk-scale laboratory for Lipschitz-constrained critics.

Exact Wasserstein-1 solvers, closed-form optimal critics, a from-scratch MLP
with double-backprop for gradient penalties, particle gradient flows, and an
executable suite of structural checks — all deterministic given a seed.
"""

from .closed_form import (ClosedFormSpec, GaussianMixture, OffSupportError,
                          UniformBox, fstar_grad, fstar_value, grad_field)
from .config import ConfigError, RunManifest, parse_config, parse_config_file
from .dynamics import FlowState, MetricsRow, TrainConfig, init_state, run
from .estimator import LipschitzParticleFlow
from .geometry import (DimensionMismatchError, PointCloud, blend_sample,
                       euclidean, l1_distance)
from .io import VERSION, read_cloud_csv, write_cloud_csv
from .lipschitz import PenaltyConfig, SmaxList, estimate_k
from .net import MlpDiscriminator, affine_net, init, load_checkpoint, save_checkpoint
from .objectives import (MembershipReport, NotAFamilyMemberError,
                         ObjectiveSpec, builtin_objective, check_membership,
                         combine, is_family_member, optimal_k_two_delta,
                         two_delta_optimum)
from .rng import Rng
from .scenarios import Scenario, build_preset
from .transport import DualPotential, TransportPlan, w1_dual, w1_primal
from .verify import (TheoremReport, check_bounding,
                     check_interpolation_gradient, check_nash_convergence,
                     l1_counterexample)

__version__ = VERSION

__all__ = [
    "ClosedFormSpec", "GaussianMixture", "OffSupportError", "UniformBox",
    "fstar_grad", "fstar_value", "grad_field",
    "ConfigError", "RunManifest", "parse_config", "parse_config_file",
    "FlowState", "MetricsRow", "TrainConfig", "init_state", "run",
    "LipschitzParticleFlow",
    "DimensionMismatchError", "PointCloud", "blend_sample", "euclidean",
    "l1_distance",
    "VERSION", "read_cloud_csv", "write_cloud_csv",
    "PenaltyConfig", "SmaxList", "estimate_k",
    "MlpDiscriminator", "affine_net", "init", "load_checkpoint",
    "save_checkpoint",
    "MembershipReport", "NotAFamilyMemberError", "ObjectiveSpec",
    "builtin_objective", "check_membership", "combine", "is_family_member",
    "optimal_k_two_delta", "two_delta_optimum",
    "Rng", "Scenario", "build_preset",
    "DualPotential", "TransportPlan", "w1_dual", "w1_primal",
    "TheoremReport", "check_bounding", "check_interpolation_gradient",
    "check_nash_convergence", "l1_counterexample",
]
