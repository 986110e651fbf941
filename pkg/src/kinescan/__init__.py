"""Kinematic-tree-guided state-space sequence kernels for sparse-input
full-body pose estimation: SSD scan realizations, SO(3)/6D rotation tools,
the SMPL-22 skeleton with its scan orders, the full network forward pass,
training losses with analytic gradients, and motion metrics."""

from .bench import run_benchmark
from .io import (
    RunConfig,
    Sequence,
    load_checkpoint,
    load_run_config,
    load_sequence,
    load_skeleton,
    save_checkpoint,
    save_run_config,
    save_sequence,
    save_skeleton,
)
from .kinematics import (
    KinematicTree,
    ScanOrder,
    default_tree,
    fks_order,
    forward_kinematics,
    index_order,
    reorder_joint_features,
    uks_order,
)
from .losses import (
    LossWeights,
    angular_velocity,
    grad_total_loss,
    loss_angvel_diff,
    loss_angvel_geo,
    loss_ori,
    loss_pos,
    loss_rot,
    loss_vel,
    total_loss,
)
from .metrics import MetricReport, jitter, metrics
from .model import (
    ModelConfig,
    bi_ssd,
    embed,
    gma,
    infer_windowed,
    init_weights,
    kinest_forward,
    lma,
    parameter_count,
    ssd_block,
    stmm_forward,
    tfm_forward,
)
from .rotations import (
    DegenerateRotationError,
    exp_map,
    geodesic_angle,
    matrix_to_log,
    matrix_to_sixd,
    relative_rotation,
    sixd_to_matrix,
)
from .ssd import (
    SsdParams,
    build_decay_matrix,
    chunked_scan,
    discretize_zoh,
    ssd_matrix_form,
    ssm_recurrence,
)
from .synthetic import gen_synthetic, sparse_from_pose, synthetic_pose
from .training import train_micro
from .verify import run_all

__version__ = "0.1.0"
