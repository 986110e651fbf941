"""Scalar-decay state-space scan kernels.

Three equivalent realizations of the same sequence transform

    h_t = a_t * h_{t-1} + b_t x_t^T,    y_t = c_t^T h_t

with per-step scalar decay a_t, state dimension N and channel width P:

* ``ssm_recurrence``   -- the literal left-to-right recurrence, O(T*N*P);
* ``ssd_matrix_form``  -- multiplication by the lower-triangular
  semiseparable matrix M = F * (C B^T), O(T^2);
* ``chunked_scan``     -- blockwise evaluation (intra-chunk quadratic form
  plus inter-chunk state carry), O(T*chunk) per channel.

All arithmetic is done in float64 regardless of input dtype so the three
forms agree to tight tolerances.
"""

from dataclasses import dataclass

import numpy as np

__all__ = [
    "SsdParams",
    "ssm_recurrence",
    "build_decay_matrix",
    "ssd_matrix_form",
    "chunked_scan",
    "discretize_zoh",
]


@dataclass
class SsdParams:
    """Parameters of one scan call: decays ``a`` (T,), input projections
    ``b`` (T, N), output projections ``c`` (T, N) and inputs ``x`` (T, P).

    Decays must lie in [0, 1]; a_t = 0 resets the state, a_t = 1 carries
    it unchanged.
    """

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    x: np.ndarray

    def __post_init__(self):
        self.a = np.asarray(self.a, dtype=np.float64)
        self.b = np.atleast_2d(np.asarray(self.b, dtype=np.float64))
        self.c = np.atleast_2d(np.asarray(self.c, dtype=np.float64))
        self.x = np.atleast_2d(np.asarray(self.x, dtype=np.float64))
        if self.a.ndim != 1 or self.a.size == 0:
            raise ValueError("a must be a non-empty 1-D array of decays")
        t = self.a.shape[0]
        if self.b.shape[0] != t or self.c.shape[0] != t or self.x.shape[0] != t:
            raise ValueError(
                f"inconsistent scan lengths: a={t}, b={self.b.shape[0]}, "
                f"c={self.c.shape[0]}, x={self.x.shape[0]}"
            )
        if self.b.shape[1] != self.c.shape[1]:
            raise ValueError(
                f"b and c disagree on state dimension: {self.b.shape[1]} vs {self.c.shape[1]}"
            )
        if not np.all(np.isfinite(self.a)) or np.any(self.a < 0.0) or np.any(self.a > 1.0):
            raise ValueError("decays a must be finite and lie in [0, 1]")

    @property
    def seq_len(self) -> int:
        return self.a.shape[0]

    @property
    def state_dim(self) -> int:
        return self.b.shape[1]

    @property
    def channels(self) -> int:
        return self.x.shape[1]


def ssm_recurrence(params: SsdParams, h0: np.ndarray | None = None) -> np.ndarray:
    """Run the recurrence left to right. Returns the (T, P) output sequence.

    ``h0`` is the initial (N,) or (N, P) state; defaults to zero. An (N,)
    state is broadcast across the P channels.
    """
    t, n, p = params.seq_len, params.state_dim, params.channels
    if h0 is None:
        h = np.zeros((n, p))
    else:
        h0 = np.asarray(h0, dtype=np.float64)
        if h0.shape not in ((n,), (n, p)):
            raise ValueError(f"h0 has shape {h0.shape}, expected ({n},) or ({n}, {p})")
        h = np.broadcast_to(h0.reshape(n, -1), (n, p)).copy()
    y = np.empty((t, p))
    for i in range(t):
        h = params.a[i] * h + np.outer(params.b[i], params.x[i])
        y[i] = params.c[i] @ h
    return y


def build_decay_matrix(a: np.ndarray) -> np.ndarray:
    """Lower-triangular (T, T) matrix of cumulative decay products.

    F[j, i] = a_j * a_{j-1} * ... * a_{i+1} for i < j, 1 on the diagonal,
    0 above it. Row j is a_j times the previous row, which stays exact
    when some decays are zero (no division by cumulative products).
    """
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 1 or a.size == 0:
        raise ValueError("a must be a non-empty 1-D array")
    t = a.shape[0]
    f = np.zeros((t, t))
    f[0, 0] = 1.0
    for j in range(1, t):
        f[j, :j] = a[j] * f[j - 1, :j]
        f[j, j] = 1.0
    return f


def ssd_matrix_form(params: SsdParams) -> np.ndarray:
    """Evaluate the scan as y = (F * (C B^T)) x with zero initial state."""
    f = build_decay_matrix(params.a)
    g = params.c @ params.b.T  # g[j, i] = c_j . b_i
    return (f * g) @ params.x


def chunked_scan(params: SsdParams, chunk: int = 16) -> np.ndarray:
    """Blockwise scan: quadratic form inside each chunk of (up to) ``chunk``
    steps, with the state carried across chunk boundaries.

    Exactly matches ``ssm_recurrence`` with zero initial state; a trailing
    chunk shorter than ``chunk`` is simply evaluated at its own length, and
    a chunk size beyond the sequence length degrades to the matrix form.
    """
    t, n, p = params.seq_len, params.state_dim, params.channels
    if not isinstance(chunk, (int, np.integer)) or chunk < 1:
        raise ValueError(f"chunk must be a positive integer, got {chunk!r}")
    y = np.empty((t, p))
    h = np.zeros((n, p))
    for start in range(0, t, chunk):
        end = min(start + chunk, t)
        a = params.a[start:end]
        b = params.b[start:end]
        c = params.c[start:end]
        x = params.x[start:end]
        f = build_decay_matrix(a)
        # Intra-chunk quadratic form plus the carried state decayed to each step.
        prefix = np.cumprod(a)  # prefix[k] = a_start * ... * a_{start+k}
        y[start:end] = (f * (c @ b.T)) @ x + (c * prefix[:, None]) @ h
        # decay from step i to the chunk end is the last row of F
        h = prefix[-1] * h + (f[-1][:, None] * b).T @ x
    return y


def discretize_zoh(a_cont: float, b_cont: np.ndarray, dt: float) -> tuple[float, np.ndarray]:
    """Zero-order-hold discretization of scalar-decay SSM parameters.

    Returns (a_disc, b_disc) with a_disc = exp(a_cont * dt) and
    b_disc = (a_disc - 1) / a_cont * b_cont, taking the dt * b_cont limit
    at a_cont = 0.
    """
    b_cont = np.asarray(b_cont, dtype=np.float64)
    if not np.isfinite(a_cont) or not np.isfinite(dt) or not np.all(np.isfinite(b_cont)):
        raise ValueError("discretize_zoh requires finite inputs")
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    a_disc = float(np.exp(a_cont * dt))
    if a_cont == 0.0:
        b_disc = dt * b_cont
    else:
        b_disc = (a_disc - 1.0) / a_cont * b_cont
    return a_disc, b_disc
