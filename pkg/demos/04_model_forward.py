"""
From 36 tracked channels to 22 joint rotations
==============================================

The network lifts the head-and-wrists signal into an embedding, runs
temporal flow modules (bidirectional scans fused by local and global
aggregation), then spatiotemporal mixing modules that scan a flattened
(frame, joint) axis, and finally regresses 6D rotations per joint.
"""

import numpy as np

from kinescan.kinematics import default_tree
from kinescan.model import (
    MICRO_CONFIG_KWARGS,
    ModelConfig,
    infer_windowed,
    init_weights,
    kinest_forward,
    parameter_count,
)
from kinescan.synthetic import sparse_from_pose, synthetic_pose

micro = ModelConfig(seed=0, **MICRO_CONFIG_KWARGS)
full = ModelConfig()
print("micro configuration:", parameter_count(init_weights(micro)), "parameters")
print("full configuration :", parameter_count(init_weights(full)), "parameters")

# a synthetic actor provides the tracking signal a headset rig would see
tree = default_tree()
pose = synthetic_pose(seed=7, frames=micro.seq_len)
x = sparse_from_pose(pose, tree)
print("\ninput signal:", x.shape, x.dtype)

weights = init_weights(micro)
y = kinest_forward(x, micro, weights)
print("predicted rotations:", y.shape, y.dtype)

# same input, same weights, same bits
again = kinest_forward(x, micro, weights)
print("forward pass is bit-reproducible:", np.array_equal(y, again))

# longer recordings run window by window; a trailing partial window is
# padded on the left and only its own frames are kept
long_pose = synthetic_pose(seed=8, frames=100)
long_x = sparse_from_pose(long_pose, tree)
long_y = infer_windowed(long_x, micro, weights)
print("windowed inference over", long_x.shape[0], "frames ->", long_y.shape)
