"""Hierarchical pose reconstruction from 3D keypoints.

Works root-outward: each joint's local rotation is solved in its parent's
accumulated frame, from its child bone directions. Single-child joints use
the minimal (swing-only) bone alignment; multi-child joints solve a small
orthogonal Procrustes problem over all child bones. Bone lengths are never
rescaled; only directions are matched.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import PoseMismatch, ValidationError
from .rotations import Rotation, procrustes, rodrigues_align
from .skeleton import Pose


@dataclass(frozen=True)
class KeypointFrame:
    """N x 3 world-frame joint positions with joint-name labels."""

    positions: np.ndarray
    labels: tuple

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float)
        if pos.ndim != 2 or pos.shape[1] != 3:
            raise ValidationError(f"keypoint positions must be Nx3, got {pos.shape}")
        if not np.all(np.isfinite(pos)):
            raise ValidationError("keypoint positions contain non-finite entries")
        if pos.shape[0] != len(self.labels):
            raise ValidationError(
                f"{pos.shape[0]} keypoints but {len(self.labels)} labels"
            )
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "labels", tuple(self.labels))


def _keypoints_in_joint_order(skeleton, frame):
    row = {label: i for i, label in enumerate(frame.labels)}
    if len(frame.labels) != len(skeleton.joints):
        raise PoseMismatch(
            f"{len(frame.labels)} keypoints for {len(skeleton.joints)} joints"
        )
    try:
        order = [row[j.name] for j in skeleton.joints]
    except KeyError as e:
        raise PoseMismatch(f"keypoint frame missing joint {e}") from None
    return frame.positions[order]


def reconstruct_frame(skeleton, frame):
    """Recover a pose whose FK reproduces every observed bone direction."""
    kp = _keypoints_in_joint_order(skeleton, frame)
    nj = len(skeleton.joints)
    children = [[] for _ in range(nj)]
    for i, p in enumerate(skeleton.parent_index):
        if p >= 0:
            children[p].append(i)

    world = np.tile(np.eye(3), (nj, 1, 1))
    values = np.zeros(skeleton.total_dof)
    root_orientation = Rotation.identity()
    for i, joint in enumerate(skeleton.joints):
        ch = children[i]
        p = skeleton.parent_index[i]
        parent_world = world[p] if p >= 0 else np.eye(3)
        if not ch:
            world[i] = parent_world  # leaf: rotation unobservable, keep identity
            continue
        templates = np.column_stack([skeleton.joints[c].offset for c in ch])
        observed = np.column_stack([parent_world.T @ (kp[c] - kp[i]) for c in ch])
        if len(ch) == 1:
            local = rodrigues_align(templates[:, 0], observed[:, 0])
        else:
            local = procrustes(templates, observed)
        world[i] = parent_world @ local.matrix
        if p < 0:
            root_orientation = local
        else:
            if joint.dof != "spherical":
                raise ValidationError(
                    f"joint '{joint.name}' has dof '{joint.dof}'; "
                    "keypoint reconstruction needs spherical joints"
                )
            values[skeleton.dof_slices[i]] = local.as_rotvec()
    return Pose(kp[0], root_orientation, values)


def _rotvec_quat(v):
    """Quaternion of a raw axis-angle vector, without hemisphere folding."""
    angle = np.linalg.norm(v)
    if angle < 1e-12:
        return np.array([1.0, 0.0, 0.0, 0.0])
    half = angle / 2.0
    return np.concatenate([[np.cos(half)], np.sin(half) / angle * v])


def _flip_rotvec(v):
    """Same rotation, opposite quaternion hemisphere: angle 2pi - |v| about -v."""
    angle = np.linalg.norm(v)
    if angle < 1e-12:
        return v
    return (angle - 2.0 * np.pi) / angle * v


def reconstruct_sequence(skeleton, frames, *, hemisphere_continuity=True):
    """Per-frame reconstruction plus an optional quaternion-continuity pass.

    The continuity pass re-expresses spherical joint axis-angle vectors so
    consecutive frames stay on the same quaternion hemisphere
    (dot(q_t, q_{t+1}) >= 0), which may push angles above pi.
    """
    if not frames:
        raise ValidationError("empty keypoint sequence")
    poses = [reconstruct_frame(skeleton, f) for f in frames]
    if not hemisphere_continuity or len(poses) < 2:
        return poses
    for i, joint in enumerate(skeleton.joints):
        if joint.dof != "spherical" or skeleton.parent_index[i] < 0:
            continue
        sl = skeleton.dof_slices[i]
        prev = _rotvec_quat(poses[0].joint_values[sl])
        for pose in poses[1:]:
            v = pose.joint_values[sl]
            q = _rotvec_quat(v)
            if np.dot(prev, q) < 0:
                v[...] = _flip_rotvec(v)
                q = -q
            prev = q
    return poses
