"""Per-frame retargeting of human poses onto a robot skeleton.

Each frame minimizes a weighted least-squares objective over the robot
joint values: position terms pull corresponding markers toward the scaled
human targets, orientation terms penalize the geodesic frame error, and
regularizers cover joint limits, frame-to-frame smoothness, and a
reference posture. The solver is damped Gauss-Newton with central
finite-difference Jacobians and backtracking on the damping parameter;
accepted steps never increase the objective. The root transform is taken
from the scaled human root and is not optimized.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    NonFiniteObjective,
    UnresolvableCorrespondence,
    ValidationError,
)
from .rotations import Rotation
from .skeleton import (
    JointTrajectory,
    Pose,
    _intrinsic_xyz_euler,
    _local_matrix,
    _rodrigues_matrix,
    check_limits,
    fk,
)


@dataclass(frozen=True)
class CorrespondencePair:
    human: str
    robot: str
    position_weight: float = 1.0
    orientation_weight: float = 0.0


@dataclass(frozen=True)
class FingertipPair:
    human: str
    robot: str
    weight: float = 1.0


@dataclass(frozen=True)
class CorrespondenceSet:
    """Marker pairing plus the uniform human-to-robot length scale."""

    pairs: tuple
    fingertips: tuple = ()
    scale: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "pairs", tuple(self.pairs))
        object.__setattr__(self, "fingertips", tuple(self.fingertips))
        if not np.isfinite(self.scale) or self.scale <= 0:
            raise ValidationError(f"scale must be finite and positive, got {self.scale}")
        for p in self.pairs:
            if not (
                np.isfinite(p.position_weight)
                and np.isfinite(p.orientation_weight)
                and p.position_weight >= 0
                and p.orientation_weight >= 0
            ):
                raise ValidationError(f"bad weights on pair {p.human}->{p.robot}")
        if not any(p.position_weight > 0 for p in self.pairs):
            raise ValidationError("need at least one pair with position weight > 0")


@dataclass(frozen=True)
class RetargetOptions:
    limit_weight: float = 10.0
    limit_margin: float = 0.05  # barrier starts this far inside each limit, radians
    smoothness_weight: float = 0.1
    reference_weight: float = 1e-3
    max_iterations: int = 100
    gradient_tol: float = 1e-6
    fd_step: float = 1e-6
    warm_start: bool = True
    damping_init: float = 1e-3
    damping_increase: float = 10.0
    damping_decrease: float = 3.0
    damping_max: float = 1e12

    def __post_init__(self):
        for name in ("limit_weight", "smoothness_weight", "reference_weight"):
            if getattr(self, name) < 0:
                raise ValidationError(f"{name} must be >= 0")
        if self.max_iterations < 1:
            raise ValidationError("max_iterations must be >= 1")


@dataclass
class RetargetReport:
    objective: float
    iterations: int
    converged: bool
    position_residuals: dict
    orientation_residuals: dict
    limit_violation_count: int
    objective_trace: list
    carried_forward: bool = False


def resolve_marker(skeleton, name):
    """Marker name, falling back to a joint name with zero offset."""
    m = skeleton.markers.get(name)
    if m is not None:
        return skeleton.index[m.joint], m.offset
    i = skeleton.index.get(name)
    if i is None:
        raise UnresolvableCorrespondence(
            f"'{name}' is neither a marker nor a joint of skeleton '{skeleton.name}'"
        )
    return i, np.zeros(3)


def leg_scale(human_skeleton, robot_skeleton, human_chain, robot_chain):
    """Uniform scale: robot chain length over human chain length."""

    def chain_length(skel, names):
        total = 0.0
        for name in names[1:]:
            total += float(np.linalg.norm(skel.joint(name).offset))
        return total

    h = chain_length(human_skeleton, human_chain)
    r = chain_length(robot_skeleton, robot_chain)
    if h <= 0 or r <= 0:
        raise ValidationError("scale chains have zero length")
    return r / h


def _log_map(m):
    """Axis-angle 3-vector of a rotation matrix (via the quaternion view)."""
    return Rotation(m).as_rotvec()


def _gauss_newton(residual_fn, x0, opts):
    """Damped Gauss-Newton with central-difference Jacobians.

    Returns (x, objective_trace, iterations, converged). Accepted steps are
    monotone nonincreasing in the objective; `converged` means the gradient
    infinity-norm dropped below tolerance.
    """
    x = np.asarray(x0, dtype=float).copy()
    r = residual_fn(x)
    f = float(r @ r)
    if not np.isfinite(f):
        raise NonFiniteObjective(f"objective at start point is {f}")
    trace = [f]
    mu = opts.damping_init
    converged = False
    n = len(x)
    iterations = 0
    eye = np.eye(n)
    for _ in range(opts.max_iterations):
        iterations += 1
        jac = np.empty((len(r), n))
        h = opts.fd_step
        for i in range(n):
            xp = x.copy()
            xp[i] += h
            xm = x.copy()
            xm[i] -= h
            jac[:, i] = (residual_fn(xp) - residual_fn(xm)) / (2.0 * h)
        g = 2.0 * (jac.T @ r)
        if np.max(np.abs(g)) < opts.gradient_tol:
            converged = True
            break
        jtj = jac.T @ jac
        jtr = jac.T @ r
        accepted = False
        while mu <= opts.damping_max:
            try:
                step = np.linalg.solve(jtj + mu * eye, jtr)
            except np.linalg.LinAlgError:
                mu *= opts.damping_increase
                continue
            x_new = x - step
            r_new = residual_fn(x_new)
            f_new = float(r_new @ r_new)
            if np.isfinite(f_new) and f_new <= f:
                x, r, f = x_new, r_new, f_new
                trace.append(f)
                mu = max(mu / opts.damping_decrease, 1e-12)
                accepted = True
                break
            mu *= opts.damping_increase
        if not accepted:
            break  # no descent direction at any damping: local minimum
    return x, trace, iterations, converged


def _limit_residuals(skeleton, values, opts):
    """One-sided quadratic barrier starting `limit_margin` inside each limit."""
    if opts.limit_weight == 0:
        return np.zeros(0)
    w = np.sqrt(opts.limit_weight)
    out = []
    for i, joint in enumerate(skeleton.joints):
        if not joint.limits:
            continue
        vals = values[skeleton.dof_slices[i]]
        if joint.dof == "spherical":
            vals = _intrinsic_xyz_euler(_local_matrix(joint, vals))
        for k, (lo, hi) in enumerate(joint.limits):
            margin = min(opts.limit_margin, 0.25 * (hi - lo))
            out.append(w * max(0.0, vals[k] - (hi - margin)))
            out.append(w * max(0.0, (lo + margin) - vals[k]))
    return np.array(out)


def _project_to_limits(skeleton, values):
    out = values.copy()
    for i, joint in enumerate(skeleton.joints):
        sl = skeleton.dof_slices[i]
        # Fold spherical rotation vectors onto the principal branch
        # (norm <= pi); the solver may wander off it by multiples of 2*pi.
        if joint.dof == "spherical" and np.linalg.norm(out[sl]) > np.pi:
            out[sl] = Rotation.from_rotvec(out[sl]).as_rotvec()
        if not joint.limits:
            continue
        if joint.dof == "revolute":
            lo, hi = joint.limits[0]
            out[sl] = np.clip(out[sl], lo, hi)
        elif joint.dof == "spherical":
            euler = _intrinsic_xyz_euler(_local_matrix(joint, out[sl]))
            clipped = np.array(
                [np.clip(euler[k], lo, hi) for k, (lo, hi) in enumerate(joint.limits)]
            )
            if not np.allclose(clipped, euler):
                m = (
                    _rodrigues_matrix(np.array([1.0, 0, 0]), clipped[0])
                    @ _rodrigues_matrix(np.array([0, 1.0, 0]), clipped[1])
                    @ _rodrigues_matrix(np.array([0, 0, 1.0]), clipped[2])
                )
                out[sl] = _log_map(m)
    return out


def _targets(human_skeleton, human_pose, corr):
    res = fk(human_skeleton, human_pose)
    pos_targets = {}
    rot_targets = {}
    for pair in corr.pairs:
        j, offset = resolve_marker(human_skeleton, pair.human)
        world = res.positions[j] + res.rotations[j] @ offset
        pos_targets[pair.human] = corr.scale * world
        rot_targets[pair.human] = res.rotations[j]
    root_position = corr.scale * res.positions[0]
    root_orientation = Rotation(res.rotations[0])
    return pos_targets, rot_targets, root_position, root_orientation


def retarget_frame(
    human_skeleton,
    human_pose,
    robot_skeleton,
    corr,
    opts=RetargetOptions(),
    warm_start=None,
    smooth_to=None,
):
    """Solve one frame; returns (robot Pose, RetargetReport).

    The returned pose is hard-projected into the joint limits after the
    solve, so its limit-violation count is always zero.
    """
    pos_targets, rot_targets, root_position, root_orientation = _targets(
        human_skeleton, human_pose, corr
    )
    robot_refs = {
        pair.robot: resolve_marker(robot_skeleton, pair.robot) for pair in corr.pairs
    }
    x0 = (
        warm_start.joint_values
        if warm_start is not None
        else np.zeros(robot_skeleton.total_dof)
    )

    w_ref = np.sqrt(opts.reference_weight) if opts.reference_weight > 0 else 0.0
    w_smooth = (
        np.sqrt(opts.smoothness_weight)
        if (opts.smoothness_weight > 0 and smooth_to is not None)
        else 0.0
    )

    def residual(values):
        res = fk(robot_skeleton, Pose(root_position, root_orientation, values))
        parts = []
        for pair in corr.pairs:
            j, offset = robot_refs[pair.robot]
            if pair.position_weight > 0:
                world = res.positions[j] + res.rotations[j] @ offset
                parts.append(
                    np.sqrt(pair.position_weight) * (world - pos_targets[pair.human])
                )
            if pair.orientation_weight > 0:
                err = res.rotations[j].T @ rot_targets[pair.human]
                parts.append(np.sqrt(pair.orientation_weight) * _log_map(err))
        parts.append(_limit_residuals(robot_skeleton, values, opts))
        if w_smooth:
            parts.append(w_smooth * (values - smooth_to))
        if w_ref:
            parts.append(w_ref * values)
        return np.concatenate(parts)

    x, trace, iterations, converged = _gauss_newton(residual, x0, opts)
    x = _project_to_limits(robot_skeleton, x)
    pose = Pose(root_position, root_orientation, x)

    res = fk(robot_skeleton, pose)
    pos_residuals = {}
    rot_residuals = {}
    for pair in corr.pairs:
        j, offset = robot_refs[pair.robot]
        world = res.positions[j] + res.rotations[j] @ offset
        pos_residuals[pair.robot] = float(
            np.linalg.norm(world - pos_targets[pair.human])
        )
        if pair.orientation_weight > 0:
            rot_residuals[pair.robot] = float(
                np.linalg.norm(_log_map(res.rotations[j].T @ rot_targets[pair.human]))
            )
    r = residual(x)
    report = RetargetReport(
        objective=float(r @ r),
        iterations=iterations,
        converged=converged,
        position_residuals=pos_residuals,
        orientation_residuals=rot_residuals,
        limit_violation_count=len(check_limits(robot_skeleton, pose)),
        objective_trace=trace,
    )
    return pose, report


def retarget_sequence(
    human_skeleton,
    human_poses,
    robot_skeleton,
    corr,
    opts=RetargetOptions(),
    fps=30.0,
):
    """Retarget a pose sequence; frame t warm-starts from frame t-1.

    A frame whose solve fails numerically is replaced by the previous
    solution and flagged `carried_forward` in its report.
    """
    if not human_poses:
        raise ValidationError("empty human pose sequence")
    poses = []
    reports = []
    prev = None
    for human_pose in human_poses:
        try:
            pose, report = retarget_frame(
                human_skeleton,
                human_pose,
                robot_skeleton,
                corr,
                opts,
                warm_start=prev if opts.warm_start else None,
                smooth_to=None if prev is None else prev.joint_values,
            )
        except NonFiniteObjective:
            if prev is None:
                raise
            pose = prev
            report = RetargetReport(
                objective=float("nan"),
                iterations=0,
                converged=False,
                position_residuals={},
                orientation_residuals={},
                limit_violation_count=0,
                objective_trace=[],
                carried_forward=True,
            )
        poses.append(pose)
        reports.append(report)
        prev = pose
    return JointTrajectory(fps=fps, poses=poses, skeleton=robot_skeleton.name), reports


def retarget_hand(
    fingertip_targets,
    hand_skeleton,
    fingertip_pairs,
    opts=RetargetOptions(),
    wrist_position=None,
    wrist_orientation=None,
):
    """Solve hand joint angles so fingertip markers reach the given points.

    The wrist (hand-skeleton root) transform is held fixed; only fingertip
    position terms and the joint-limit regularizer enter the objective.
    """
    fingertip_pairs = tuple(fingertip_pairs)
    if not fingertip_pairs:
        raise ValidationError("need at least one fingertip pair")
    targets = [np.asarray(t, dtype=float).reshape(3) for t in fingertip_targets]
    if len(targets) != len(fingertip_pairs):
        raise ValidationError(
            f"{len(targets)} fingertip targets for {len(fingertip_pairs)} pairs"
        )
    root_position = (
        np.zeros(3) if wrist_position is None else np.asarray(wrist_position, float)
    )
    root_orientation = wrist_orientation or Rotation.identity()
    refs = [resolve_marker(hand_skeleton, p.robot) for p in fingertip_pairs]

    def residual(values):
        res = fk(hand_skeleton, Pose(root_position, root_orientation, values))
        parts = []
        for (j, offset), pair, target in zip(refs, fingertip_pairs, targets):
            world = res.positions[j] + res.rotations[j] @ offset
            parts.append(np.sqrt(pair.weight) * (world - target))
        parts.append(_limit_residuals(hand_skeleton, values, opts))
        return np.concatenate(parts)

    x, _, _, _ = _gauss_newton(residual, np.zeros(hand_skeleton.total_dof), opts)
    x = _project_to_limits(hand_skeleton, x)
    return Pose(root_position, root_orientation, x)
