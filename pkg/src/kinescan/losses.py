"""Training losses over 6D pose sequences, with an analytic gradient for the
weighted total.

A pose sequence is an (L, J, 6) array of per-joint 6D rotations. The total
objective is

    alpha * loss_rot + beta * loss_ori + delta * loss_angvel_geo

with defaults (1, 0.02, 1). The positional terms loss_pos / loss_vel need a
skeleton and are reported separately. Everything here computes in float64.
"""

from dataclasses import dataclass

import numpy as np

from .kinematics import KinematicTree, forward_kinematics
from .rotations import (
    geodesic_angle,
    matrix_to_log,
    relative_rotation,
    sixd_to_matrix,
)

__all__ = [
    "LossWeights",
    "loss_rot",
    "loss_ori",
    "angular_velocity",
    "loss_angvel_geo",
    "loss_angvel_diff",
    "loss_pos",
    "loss_vel",
    "total_loss",
    "grad_total_loss",
]

# gradient precondition: velocity rotation angles this far from {0, pi}
_THETA_MARGIN = 1e-5


@dataclass(frozen=True)
class LossWeights:
    alpha: float = 1.0
    beta: float = 0.02
    delta: float = 1.0

    def __post_init__(self):
        for name in ("alpha", "beta", "delta"):
            v = float(getattr(self, name))
            if not np.isfinite(v) or v < 0.0:
                raise ValueError(f"{name} must be a nonnegative real")


def _check_pair(y, z):
    y = np.asarray(y, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    if y.shape != z.shape:
        raise ValueError(f"shape mismatch: {y.shape} vs {z.shape}")
    if y.ndim != 3 or y.shape[-1] != 6:
        raise ValueError(f"expected (L, J, 6) pose sequences, got {y.shape}")
    return y, z


def loss_rot(y: np.ndarray, z: np.ndarray) -> float:
    """Mean absolute difference over all raw 6D components."""
    y, z = _check_pair(y, z)
    return float(np.mean(np.abs(y - z)))


def loss_ori(y: np.ndarray, z: np.ndarray) -> float:
    """Mean absolute difference over the root joint's 6D components only."""
    y, z = _check_pair(y, z)
    return float(np.mean(np.abs(y[:, 0] - z[:, 0])))


def angular_velocity(p: np.ndarray) -> np.ndarray:
    """Per-joint axis-angle of V_t = R_{t-1}^T R_t, shape (L-1, J, 3)."""
    p = np.asarray(p, dtype=np.float64)
    if p.ndim != 3 or p.shape[-1] != 6 or p.shape[0] < 2:
        raise ValueError(f"expected (L >= 2, J, 6) pose sequence, got {p.shape}")
    r = sixd_to_matrix(p)
    v = relative_rotation(r[:-1], r[1:])
    # products of Gram-Schmidt outputs are orthonormal already
    return matrix_to_log(v, validate=False)


def loss_angvel_geo(y: np.ndarray, z: np.ndarray) -> float:
    """Sum over steps of the joint-mean L1 distance between axis-angle
    velocities of prediction and ground truth."""
    y, z = _check_pair(y, z)
    wy = angular_velocity(y)
    wz = angular_velocity(z)
    return float(np.abs(wz - wy).sum(axis=-1).mean(axis=-1).sum())


def loss_angvel_diff(y: np.ndarray, z: np.ndarray) -> float:
    """First-order baseline: sum over steps of the L1 norm between raw 6D
    frame differences (all J*6 components)."""
    y, z = _check_pair(y, z)
    if y.shape[0] < 2:
        raise ValueError("need at least two frames")
    dy = np.diff(y, axis=0)
    dz = np.diff(z, axis=0)
    return float(np.abs(dz - dy).reshape(dy.shape[0], -1).sum(axis=-1).sum())


def _fk_positions(p, tree, root):
    if root is not None:
        root = np.asarray(root, dtype=np.float64)
    return forward_kinematics(p, tree, root_position=root)


def loss_pos(y: np.ndarray, z: np.ndarray, tree: KinematicTree,
             root_y: np.ndarray = None, root_z: np.ndarray = None) -> float:
    """Mean squared L2 distance between forward-kinematics joint positions."""
    y, z = _check_pair(y, z)
    py = _fk_positions(y, tree, root_y)
    pz = _fk_positions(z, tree, root_z)
    return float((np.linalg.norm(py - pz, axis=-1) ** 2).mean())


def loss_vel(y: np.ndarray, z: np.ndarray, tree: KinematicTree,
             root_y: np.ndarray = None, root_z: np.ndarray = None) -> float:
    """Mean squared L2 distance between consecutive-frame position deltas."""
    y, z = _check_pair(y, z)
    if y.shape[0] < 2:
        raise ValueError("need at least two frames")
    vy = np.diff(_fk_positions(y, tree, root_y), axis=0)
    vz = np.diff(_fk_positions(z, tree, root_z), axis=0)
    return float((np.linalg.norm(vy - vz, axis=-1) ** 2).mean())


def total_loss(y: np.ndarray, z: np.ndarray,
               weights: LossWeights = LossWeights()) -> float:
    """alpha * loss_rot + beta * loss_ori + delta * loss_angvel_geo.

    Single-frame sequences have no velocity steps; that term is then an
    empty sum (zero).
    """
    y, z = _check_pair(y, z)
    geo = loss_angvel_geo(y, z) if y.shape[0] >= 2 else 0.0
    return (weights.alpha * loss_rot(y, z)
            + weights.beta * loss_ori(y, z)
            + weights.delta * geo)


# ---------------------------------------------------------------------------
# analytic gradient


def _hat(v):
    """Batched cross-product matrices [v]x for (..., 3) input."""
    o = np.zeros_like(v[..., 0])
    return np.stack(
        [
            np.stack([o, -v[..., 2], v[..., 1]], axis=-1),
            np.stack([v[..., 2], o, -v[..., 0]], axis=-1),
            np.stack([-v[..., 1], v[..., 0], o], axis=-1),
        ],
        axis=-2,
    )


def _log_map_adjoint(v, grad_w):
    """Map d loss/d omega (..., 3) to d loss/d V (..., 3, 3) for omega = log V.

    omega = k(theta) * s with s the skew vector of V and k = theta/(2 sin
    theta), so dL/dV = k [u]x - (u.s) k'(theta) / (2 sin theta) * I with
    u = grad_w. Valid only away from theta in {0, pi}.
    """
    theta = geodesic_angle(v)
    if np.any(theta < _THETA_MARGIN) or np.any(theta > np.pi - _THETA_MARGIN):
        raise ValueError(
            "gradient undefined: a frame-to-frame rotation angle is within "
            f"{_THETA_MARGIN} of 0 or pi"
        )
    s = np.stack(
        [
            v[..., 2, 1] - v[..., 1, 2],
            v[..., 0, 2] - v[..., 2, 0],
            v[..., 1, 0] - v[..., 0, 1],
        ],
        axis=-1,
    )
    sin_t = np.sin(theta)
    k = theta / (2.0 * sin_t)
    dk = (sin_t - theta * np.cos(theta)) / (2.0 * sin_t ** 2)
    u_dot_s = np.sum(grad_w * s, axis=-1)
    coef = u_dot_s * dk / (-2.0 * sin_t)
    return k[..., None, None] * _hat(grad_w) + coef[..., None, None] * np.eye(3)


def _gram_schmidt_with_jacobian(r):
    """Rotations R(r) plus the (..., 3, 3, 6) Jacobian dR/dr for 6D input."""
    a1 = r[..., 0:3]
    a2 = r[..., 3:6]
    n1 = np.linalg.norm(a1, axis=-1, keepdims=True)
    b1 = a1 / n1
    u = a2 - np.sum(b1 * a2, axis=-1, keepdims=True) * b1
    nu = np.linalg.norm(u, axis=-1, keepdims=True)
    b2 = u / nu
    b3 = np.cross(b1, b2)

    eye = np.broadcast_to(np.eye(3), b1.shape + (3,))
    outer = lambda x, y: x[..., :, None] * y[..., None, :]
    j_b1_a1 = (eye - outer(b1, b1)) / n1[..., None]
    du_db1 = -(outer(b1, a2) + np.sum(b1 * a2, axis=-1)[..., None, None] * eye)
    j_u_a1 = du_db1 @ j_b1_a1
    j_u_a2 = eye - outer(b1, b1)
    j_b2_u = (eye - outer(b2, b2)) / nu[..., None]
    j_b2_a1 = j_b2_u @ j_u_a1
    j_b2_a2 = j_b2_u @ j_u_a2
    hat_b1 = _hat(b1)
    hat_b2 = _hat(b2)
    j_b3_a1 = -hat_b2 @ j_b1_a1 + hat_b1 @ j_b2_a1
    j_b3_a2 = hat_b1 @ j_b2_a2

    rot = np.stack([b1, b2, b3], axis=-1)
    jac = np.empty(r.shape[:-1] + (3, 3, 6))
    jac[..., :, 0, 0:3] = j_b1_a1
    jac[..., :, 0, 3:6] = 0.0
    jac[..., :, 1, 0:3] = j_b2_a1
    jac[..., :, 1, 3:6] = j_b2_a2
    jac[..., :, 2, 0:3] = j_b3_a1
    jac[..., :, 2, 3:6] = j_b3_a2
    return rot, jac


def grad_total_loss(y: np.ndarray, z: np.ndarray,
                    weights: LossWeights = LossWeights()) -> np.ndarray:
    """Analytic d total_loss / d y, shape (L, J, 6).

    Chains through Gram-Schmidt, the relative rotation V_t = R_{t-1}^T R_t,
    and the SO(3) log map. L1 kinks contribute subgradient 0 at exact zeros.
    Requires every predicted velocity angle in (1e-5, pi - 1e-5).
    """
    y, z = _check_pair(y, z)
    length, joints, _ = y.shape
    grad = weights.alpha * np.sign(y - z) / y.size
    grad[:, 0] += weights.beta * np.sign(y[:, 0] - z[:, 0]) / (length * 6)
    if length < 2 or weights.delta == 0.0:
        return grad

    rot, jac = _gram_schmidt_with_jacobian(y)
    v = relative_rotation(rot[:-1], rot[1:])
    wy = matrix_to_log(v, validate=False)
    wz = angular_velocity(z)
    # term |wy - wz| enters as sum_t mean_j; subgradient sign(wy - wz)
    grad_w = weights.delta * np.sign(wy - wz) / joints
    grad_v = _log_map_adjoint(v, grad_w)

    # V = A^T B with A = R_{t-1}, B = R_t: dL/dA = B G^T, dL/dB = A G
    grad_rot = np.zeros_like(rot)
    grad_rot[:-1] += rot[1:] @ np.swapaxes(grad_v, -1, -2)
    grad_rot[1:] += rot[:-1] @ grad_v
    grad += np.einsum("ljab,ljabk->ljk", grad_rot, jac)
    return grad
