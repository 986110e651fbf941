"""SMPL-22 skeleton topology, kinematic-tree scan orders, forward kinematics.

The three scan orders linearize the 22-joint tree for sequence kernels:

* index order: joints 0..21 as stored;
* forward kinematic scan (FKS): five root-to-leaf branches concatenated,
  each restarting at the pelvis, 32 entries;
* unidirectional kinematic scan (UKS): a single 22-entry permutation that
  walks extremity-to-extremity with the root placed centrally.
"""

import importlib.resources
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "NUM_JOINTS",
    "SMPL_PARENTS",
    "SMPL_JOINT_NAMES",
    "KinematicTree",
    "ScanOrder",
    "index_order",
    "fks_order",
    "uks_order",
    "fks_branch_starts",
    "reorder_joint_features",
    "inverse_reorder_joint_features",
    "forward_kinematics",
    "parse_skeleton_text",
    "format_skeleton_text",
    "default_tree",
]

NUM_JOINTS = 22

SMPL_PARENTS = (
    -1, 0, 0, 0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 9, 9, 12, 13, 14, 16, 17, 18, 19,
)

SMPL_JOINT_NAMES = (
    "pelvis", "left_hip", "right_hip", "spine1", "left_knee", "right_knee",
    "spine2", "left_ankle", "right_ankle", "spine3", "left_foot",
    "right_foot", "neck", "left_collar", "right_collar", "head",
    "left_shoulder", "right_shoulder", "left_elbow", "right_elbow",
    "left_wrist", "right_wrist",
)

# FKS: pelvis restarts mark branch boundaries (left leg, right leg,
# spine->left arm, spine->head, spine->right arm)
_FKS_FORWARD = (
    0, 1, 4, 7, 10,
    0, 2, 5, 8, 11,
    0, 3, 6, 9, 13, 16, 18, 20,
    0, 3, 6, 9, 12, 15,
    0, 3, 6, 9, 14, 17, 19, 21,
)

# UKS: left leg and arm chains meet at the centrally placed root
_UKS_FORWARD = (
    21, 19, 17, 14, 15, 12, 20, 18, 16, 13, 9, 6, 3, 0,
    1, 4, 7, 10, 2, 5, 8, 11,
)


@dataclass(frozen=True)
class KinematicTree:
    """Parent pointers plus rest-pose bone offsets (meters) for 22 joints.

    Joints may be listed in any order; a topological ordering is derived
    at construction. Exactly one joint must have parent -1.
    """

    parent: tuple
    offset: np.ndarray
    topo_order: tuple = field(init=False)

    def __post_init__(self):
        parent = tuple(int(p) for p in self.parent)
        offset = np.asarray(self.offset, dtype=np.float64)
        n = len(parent)
        if offset.shape != (n, 3):
            raise ValueError(f"offset shape {offset.shape} does not match {n} joints")
        if not np.all(np.isfinite(offset)):
            raise ValueError("offsets must be finite")
        roots = [j for j, p in enumerate(parent) if p == -1]
        if len(roots) != 1:
            raise ValueError(f"expected exactly one root, found {len(roots)}")
        for j, p in enumerate(parent):
            if p != -1 and not 0 <= p < n:
                raise ValueError(f"joint {j} has out-of-range parent {p}")
        # walk each joint to the root; more than n hops means a cycle
        for j in range(n):
            seen = 0
            k = j
            while parent[k] != -1:
                k = parent[k]
                seen += 1
                if seen > n:
                    raise ValueError(f"cycle in parent pointers at joint {j}")
        children = [[] for _ in range(n)]
        for j, p in enumerate(parent):
            if p != -1:
                children[p].append(j)
        topo = [roots[0]]
        for j in topo:
            topo.extend(children[j])
        object.__setattr__(self, "parent", parent)
        object.__setattr__(self, "offset", offset)
        object.__setattr__(self, "topo_order", tuple(topo))

    @property
    def num_joints(self) -> int:
        return len(self.parent)

    @property
    def root(self) -> int:
        return self.parent.index(-1)


@dataclass(frozen=True)
class ScanOrder:
    """A joint visitation order; backward is the exact reverse of forward."""

    forward: tuple
    num_joints: int = NUM_JOINTS

    def __post_init__(self):
        forward = tuple(int(j) for j in self.forward)
        missing = set(range(self.num_joints)) - set(forward)
        if missing:
            raise ValueError(f"scan order misses joints {sorted(missing)}")
        if any(not 0 <= j < self.num_joints for j in forward):
            raise ValueError("scan order contains out-of-range joint indices")
        object.__setattr__(self, "forward", forward)

    @property
    def backward(self) -> tuple:
        return self.forward[::-1]

    def __len__(self) -> int:
        return len(self.forward)


def index_order() -> ScanOrder:
    """Joints visited as stored: 0, 1, ..., 21."""
    return ScanOrder(tuple(range(NUM_JOINTS)))


def fks_order() -> ScanOrder:
    """Five-branch root-to-leaf traversal, 32 entries (root appears 5x)."""
    return ScanOrder(_FKS_FORWARD)


def uks_order() -> ScanOrder:
    """Single extremity-to-extremity permutation, root at position 13."""
    return ScanOrder(_UKS_FORWARD)


def fks_branch_starts(order: ScanOrder = None) -> tuple:
    """Positions where an FKS branch begins (each reappearance of joint 0)."""
    forward = (order or fks_order()).forward
    root = forward[0]
    return tuple(k for k, j in enumerate(forward) if j == root)


def reorder_joint_features(features: np.ndarray, order: ScanOrder,
                           direction: str = "forward") -> np.ndarray:
    """Gather (..., J, D) joint features into scan order along the joint axis.

    Pure gather: output[..., k, :] = features[..., seq[k], :] where seq is
    order.forward or order.backward.
    """
    features = np.asarray(features)
    if features.ndim < 2 or features.shape[-2] != order.num_joints:
        raise ValueError(
            f"expected joint axis of length {order.num_joints}, got shape {features.shape}"
        )
    seq = _direction_sequence(order, direction)
    return features[..., seq, :]


def inverse_reorder_joint_features(features: np.ndarray, order: ScanOrder,
                                   direction: str = "forward") -> np.ndarray:
    """Scatter (..., len(order), D) scan-ordered features back to (..., J, D).

    Joints visited multiple times (FKS) have their contributions summed;
    for permutation orders this is the exact inverse of the gather.
    """
    features = np.asarray(features)
    if features.ndim < 2 or features.shape[-2] != len(order):
        raise ValueError(
            f"expected scan axis of length {len(order)}, got shape {features.shape}"
        )
    seq = _direction_sequence(order, direction)
    out_shape = features.shape[:-2] + (order.num_joints, features.shape[-1])
    out = np.zeros(out_shape, dtype=features.dtype)
    np.add.at(out, (..., seq, slice(None)), features)
    return out


def _direction_sequence(order: ScanOrder, direction: str) -> np.ndarray:
    if direction == "forward":
        return np.asarray(order.forward)
    if direction == "backward":
        return np.asarray(order.backward)
    raise ValueError(f"direction must be 'forward' or 'backward', got {direction!r}")


def forward_kinematics(pose: np.ndarray, tree: KinematicTree,
                       root_position: np.ndarray = None,
                       return_rotations: bool = False):
    """Joint positions (meters) from per-joint local rotations.

    Parameters
    ----------
    pose : (..., J, 6) or (..., J, 3, 3)
        Local rotations, 6D or matrix form. Leading axes are batched.
    tree : KinematicTree
    root_position : (..., 3), optional
        Defaults to the origin.
    return_rotations : bool
        Also return the (..., J, 3, 3) global rotations.

    Global quantities follow the chain
    global_rot[j] = global_rot[parent[j]] @ local_rot[j] and
    position[j] = position[parent[j]] + global_rot[parent[j]] @ offset[j].
    """
    from .rotations import sixd_to_matrix

    pose = np.asarray(pose, dtype=np.float64)
    n = tree.num_joints
    if pose.shape[-2:] == (n, 6):
        local = sixd_to_matrix(pose)
    elif pose.shape[-3:] == (n, 3, 3):
        local = pose
    else:
        raise ValueError(
            f"pose must be (..., {n}, 6) or (..., {n}, 3, 3), got shape {pose.shape}"
        )
    batch = local.shape[:-3]
    if root_position is None:
        root_position = np.zeros(batch + (3,))
    else:
        root_position = np.broadcast_to(
            np.asarray(root_position, dtype=np.float64), batch + (3,)
        )

    global_rot = np.empty_like(local)
    position = np.empty(batch + (n, 3))
    for j in tree.topo_order:
        p = tree.parent[j]
        if p == -1:
            global_rot[..., j, :, :] = local[..., j, :, :]
            position[..., j, :] = root_position
        else:
            global_rot[..., j, :, :] = global_rot[..., p, :, :] @ local[..., j, :, :]
            position[..., j, :] = position[..., p, :] + (
                global_rot[..., p, :, :] @ tree.offset[j]
            )
    if return_rotations:
        return position, global_rot
    return position


def parse_skeleton_text(text: str) -> KinematicTree:
    """Build a KinematicTree from skeleton-file text.

    One joint per line: ``joint_index parent_index ox oy oz``. Lines may
    appear in any order; '#' comments and blank lines are skipped.
    """
    entries = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 5:
            raise ValueError(f"skeleton line {lineno}: expected 5 fields, got {len(parts)}")
        try:
            j = int(parts[0])
            p = int(parts[1])
            off = [float(v) for v in parts[2:5]]
        except ValueError as exc:
            raise ValueError(f"skeleton line {lineno}: {exc}") from None
        if j in entries:
            raise ValueError(f"skeleton line {lineno}: duplicate joint {j}")
        entries[j] = (p, off)
    n = len(entries)
    if sorted(entries) != list(range(n)):
        raise ValueError("skeleton joint indices must be exactly 0..n-1")
    parent = tuple(entries[j][0] for j in range(n))
    offset = np.array([entries[j][1] for j in range(n)])
    return KinematicTree(parent=parent, offset=offset)


def format_skeleton_text(tree: KinematicTree) -> str:
    """Inverse of parse_skeleton_text (modulo comments), %.9g offsets."""
    lines = []
    for j in range(tree.num_joints):
        ox, oy, oz = tree.offset[j]
        lines.append(f"{j} {tree.parent[j]} {ox:.9g} {oy:.9g} {oz:.9g}")
    return "\n".join(lines) + "\n"


def default_tree() -> KinematicTree:
    """The bundled neutral-body SMPL-22 skeleton."""
    text = (
        importlib.resources.files("kinescan")
        .joinpath("data/skeleton_smpl22.txt")
        .read_text(encoding="utf-8")
    )
    return parse_skeleton_text(text)
