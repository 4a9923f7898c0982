"""Human keypoint motion to robot joint trajectories, with evaluation metrics."""

from . import errors
from .assets import (
    asset_path,
    load_example_correspondence,
    load_example_skeleton,
)
from .features import build_pose_features, feature_dimension
from .io import (
    Motion,
    keypoint_motion,
    load_codebook,
    load_correspondence,
    load_dof_config,
    load_feature_matrix,
    load_motion,
    load_skeleton,
    load_tokens,
    save_codebook,
    save_correspondence,
    save_dof_config,
    save_feature_matrix,
    save_motion,
    save_report,
    save_skeleton,
    save_tokens,
    trajectory_motion,
)
from .ik import KeypointFrame, reconstruct_frame, reconstruct_sequence
from .metrics import (
    FeatureMatrix,
    TrajectoryPair,
    accel_err,
    diversity,
    fid,
    mm_dist,
    mpjpe,
    multimodality,
    r_precision,
    success_rate,
    vel_err,
)
from .retarget import (
    CorrespondencePair,
    CorrespondenceSet,
    FingertipPair,
    RetargetOptions,
    RetargetReport,
    retarget_frame,
    retarget_hand,
    retarget_sequence,
)
from .rotations import Rotation, geodesic_distance, procrustes, rodrigues_align
from .skeleton import (
    DofChannel,
    DofConfig,
    Joint,
    JointTrajectory,
    Marker,
    Pose,
    Skeleton,
    check_limits,
    fk,
    remap_dofs,
)
from .vq import Codebook, TokenSequence, assign, ema_update, reset_dead_codes

__version__ = "0.1.0"

__all__ = [
    "errors",
    "Rotation",
    "rodrigues_align",
    "procrustes",
    "geodesic_distance",
    "Joint",
    "Marker",
    "Skeleton",
    "Pose",
    "JointTrajectory",
    "DofChannel",
    "DofConfig",
    "fk",
    "check_limits",
    "remap_dofs",
    "KeypointFrame",
    "reconstruct_frame",
    "reconstruct_sequence",
    "CorrespondencePair",
    "FingertipPair",
    "CorrespondenceSet",
    "RetargetOptions",
    "RetargetReport",
    "retarget_frame",
    "retarget_sequence",
    "retarget_hand",
    "Codebook",
    "TokenSequence",
    "assign",
    "ema_update",
    "reset_dead_codes",
    "FeatureMatrix",
    "TrajectoryPair",
    "mpjpe",
    "vel_err",
    "accel_err",
    "success_rate",
    "fid",
    "diversity",
    "multimodality",
    "mm_dist",
    "r_precision",
    "build_pose_features",
    "feature_dimension",
    "Motion",
    "keypoint_motion",
    "trajectory_motion",
    "load_skeleton",
    "save_skeleton",
    "load_motion",
    "save_motion",
    "load_correspondence",
    "save_correspondence",
    "load_dof_config",
    "save_dof_config",
    "load_codebook",
    "save_codebook",
    "load_tokens",
    "save_tokens",
    "load_feature_matrix",
    "save_feature_matrix",
    "save_report",
    "asset_path",
    "load_example_skeleton",
    "load_example_correspondence",
]
