"""
Rotations: 6D representation and the log/exp maps
=================================================

The network predicts rotations as the first two matrix columns (6 numbers);
Gram-Schmidt turns any non-degenerate pair back into a proper rotation.
The SO(3) log and exp maps convert between matrices and axis-angle vectors,
with care taken near the 0 and pi singularities.
"""

import numpy as np

from kinescan.rotations import (
    exp_map,
    geodesic_angle,
    matrix_to_log,
    matrix_to_sixd,
    relative_rotation,
    sixd_to_matrix,
)

# any scaling of the two 3-vectors maps to the same rotation
v = np.array([2.0, 0.0, 0.0, 0.3, 5.0, 0.0])
r = sixd_to_matrix(v)
print("rotation from a scaled, non-orthogonal 6D vector:")
print(np.round(r, 6))
print("columns recovered:", matrix_to_sixd(r))

# quarter turn about z: the log map returns exactly (0, 0, pi/2)
quarter = exp_map(np.array([0.0, 0.0, np.pi / 2]))
print("\nlog of a quarter turn:", matrix_to_log(quarter))

# round trips across the tricky angles
for theta in (1e-9, 1e-6, 0.5, np.pi - 1e-6, np.pi):
    axis = np.array([1.0, 2.0, -1.0]) / np.sqrt(6.0)
    m = exp_map(axis * theta)
    err = np.abs(exp_map(matrix_to_log(m)) - m).max()
    print(f"theta = {theta:<12.3g} round-trip error = {err:.2e}")

# geodesic distance between two orientations is the angle of their
# relative rotation
a = exp_map(np.array([0.4, 0.0, 0.0]))
b = exp_map(np.array([0.4, 0.0, 0.3]))
print("\ngeodesic angle a->b:", geodesic_angle(relative_rotation(a, b)))
