"""File formats: sequence files, skeleton files, run configs, checkpoints.

All text formats write floats with 9 significant digits, which round-trips
32-bit values exactly, so parse(serialize(x)) == x bitwise for valid x.
"""

import struct
from dataclasses import dataclass, fields

import numpy as np

from .kinematics import KinematicTree, format_skeleton_text, parse_skeleton_text
from .losses import LossWeights
from .metrics import MetricReport
from .model import ModelConfig

__all__ = [
    "Sequence",
    "load_sequence",
    "save_sequence",
    "sequence_from_pose",
    "pose_from_sequence",
    "load_skeleton",
    "save_skeleton",
    "RunConfig",
    "load_run_config",
    "save_run_config",
    "micro_run_config",
    "save_checkpoint",
    "load_checkpoint",
    "format_metric_report",
    "metric_report_tsv",
]

_SEQ_MAGIC = "#kinescan-sequence v1"
_SEQ_KINDS = {"sparse_input": (36,), "pose": (132, 135)}

_CKPT_MAGIC = b"KINESCAN-CKPT\x00"
_CKPT_VERSION = 1


def _fmt(x: float) -> str:
    return f"{x:.9g}"


@dataclass(frozen=True)
class Sequence:
    """A framed float32 signal: sparse_input (36 cols) or pose (132 cols,
    plus an optional 3 root-translation cols)."""

    kind: str
    data: np.ndarray
    fps: float = 60.0

    def __post_init__(self):
        if self.kind not in _SEQ_KINDS:
            raise ValueError(f"unknown sequence kind {self.kind!r}")
        data = np.asarray(self.data, dtype=np.float32)
        if data.ndim != 2 or data.shape[0] < 1:
            raise ValueError(f"sequence data must be (L, columns), got {data.shape}")
        if data.shape[1] not in _SEQ_KINDS[self.kind]:
            raise ValueError(
                f"kind {self.kind!r} expects columns in {_SEQ_KINDS[self.kind]}, "
                f"got {data.shape[1]}"
            )
        if not np.all(np.isfinite(data)):
            raise ValueError("sequence values must be finite")
        if not self.fps > 0:
            raise ValueError("fps must be positive")
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "fps", float(self.fps))

    @property
    def frames(self) -> int:
        return self.data.shape[0]


def save_sequence(path, seq: Sequence) -> None:
    lines = [
        _SEQ_MAGIC,
        f"#kind {seq.kind}",
        f"#frames {seq.frames}",
        f"#columns {seq.data.shape[1]}",
        f"#fps {_fmt(seq.fps)}",
    ]
    for row in seq.data:
        lines.append(" ".join(_fmt(v) for v in row))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_sequence(path) -> Sequence:
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != _SEQ_MAGIC:
        raise ValueError(f"{path}: not a sequence file (bad magic line)")
    header = {}
    body_start = 1
    for line in lines[1:]:
        if not line.startswith("#"):
            break
        key, _, value = line[1:].partition(" ")
        header[key] = value
        body_start += 1
    for key in ("kind", "frames", "columns", "fps"):
        if key not in header:
            raise ValueError(f"{path}: missing header field {key!r}")
    kind = header["kind"]
    frames = int(header["frames"])
    columns = int(header["columns"])
    fps = float(header["fps"])
    body = [line for line in lines[body_start:] if line.strip()]
    if len(body) != frames:
        raise ValueError(f"{path}: header says {frames} frames, found {len(body)}")
    data = np.empty((frames, columns), dtype=np.float32)
    for i, line in enumerate(body):
        parts = line.split()
        if len(parts) != columns:
            raise ValueError(
                f"{path}: frame {i} has {len(parts)} columns, expected {columns}"
            )
        data[i] = [float(p) for p in parts]
    return Sequence(kind=kind, data=data, fps=fps)


def sequence_from_pose(pose: np.ndarray, root: np.ndarray = None,
                       fps: float = 60.0) -> Sequence:
    """Pack (L, 22, 6) rotations (and optional (L, 3) root translation)
    into a pose-kind sequence."""
    pose = np.asarray(pose, dtype=np.float32)
    if pose.ndim != 3 or pose.shape[1:] != (22, 6):
        raise ValueError(f"expected (L, 22, 6) pose, got {pose.shape}")
    flat = pose.reshape(pose.shape[0], 132)
    if root is not None:
        root = np.asarray(root, dtype=np.float32)
        if root.shape != (pose.shape[0], 3):
            raise ValueError(f"root translation must be (L, 3), got {root.shape}")
        flat = np.concatenate([flat, root], axis=1)
    return Sequence(kind="pose", data=flat, fps=fps)


def pose_from_sequence(seq: Sequence):
    """Unpack a pose-kind sequence into ((L, 22, 6), root or None)."""
    if seq.kind != "pose":
        raise ValueError(f"expected a pose sequence, got kind {seq.kind!r}")
    pose = seq.data[:, :132].reshape(seq.frames, 22, 6)
    root = seq.data[:, 132:135] if seq.data.shape[1] == 135 else None
    return pose, root


def load_skeleton(path) -> KinematicTree:
    with open(path, "r", encoding="utf-8") as fh:
        tree = parse_skeleton_text(fh.read())
    if tree.num_joints != 22:
        raise ValueError(f"{path}: expected 22 joints, got {tree.num_joints}")
    return tree


def save_skeleton(path, tree: KinematicTree) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_skeleton_text(tree))


# ---------------------------------------------------------------------------
# run config


@dataclass(frozen=True)
class RunConfig:
    model: ModelConfig = ModelConfig()
    loss: LossWeights = LossWeights()
    fps: float = 60.0
    chunk: int = 16

    def __post_init__(self):
        if not self.fps > 0:
            raise ValueError("fps must be positive")
        if int(self.chunk) < 1:
            raise ValueError("chunk must be a positive integer")


_BOOL_WORDS = {"true": True, "false": False, "1": True, "0": False}


def _parse_bool(s: str) -> bool:
    try:
        return _BOOL_WORDS[s.lower()]
    except KeyError:
        raise ValueError(f"expected true/false, got {s!r}") from None


# key -> (target, converter); targets: model / loss / top-level
_CONFIG_KEYS = {}
for _f in fields(ModelConfig):
    _tname = _f.type if isinstance(_f.type, str) else _f.type.__name__
    _CONFIG_KEYS[_f.name] = ("model", {"int": int, "str": str, "bool": _parse_bool}[_tname])
for _f in fields(LossWeights):
    _CONFIG_KEYS[_f.name] = ("loss", float)
_CONFIG_KEYS["fps"] = ("top", float)
_CONFIG_KEYS["chunk"] = ("top", int)


def save_run_config(path, rc: RunConfig) -> None:
    lines = []
    for f in fields(ModelConfig):
        v = getattr(rc.model, f.name)
        if isinstance(v, bool):
            v = "true" if v else "false"
        lines.append(f"{f.name}={v}")
    for f in fields(LossWeights):
        lines.append(f"{f.name}={_fmt(getattr(rc.loss, f.name))}")
    lines.append(f"fps={_fmt(rc.fps)}")
    lines.append(f"chunk={rc.chunk}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_run_config(path) -> RunConfig:
    model_kw, loss_kw, top_kw = {}, {}, {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if not sep:
                raise ValueError(f"{path}:{lineno}: expected key=value")
            if key not in _CONFIG_KEYS:
                raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
            target, conv = _CONFIG_KEYS[key]
            try:
                parsed = conv(value)
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: bad value for {key}: {exc}") from None
            {"model": model_kw, "loss": loss_kw, "top": top_kw}[target][key] = parsed
    return RunConfig(model=ModelConfig(**model_kw), loss=LossWeights(**loss_kw), **top_kw)


def micro_run_config(seed: int = 0, **overrides) -> RunConfig:
    """A RunConfig at the derivative-free training scale."""
    from .model import MICRO_CONFIG_KWARGS

    kwargs = dict(MICRO_CONFIG_KWARGS)
    kwargs.update(overrides)
    return RunConfig(model=ModelConfig(seed=seed, **kwargs))


# ---------------------------------------------------------------------------
# checkpoints


def save_checkpoint(path, weights: dict) -> None:
    """Flat named-tensor container; tensors written in sorted name order as
    (name_len, name, rank, dims, little-endian float32 data)."""
    with open(path, "wb") as fh:
        fh.write(_CKPT_MAGIC)
        fh.write(struct.pack("<II", _CKPT_VERSION, len(weights)))
        for name in sorted(weights):
            tensor = np.ascontiguousarray(weights[name], dtype="<f4")
            encoded = name.encode("utf-8")
            fh.write(struct.pack("<I", len(encoded)))
            fh.write(encoded)
            fh.write(struct.pack("<I", tensor.ndim))
            fh.write(struct.pack(f"<{tensor.ndim}I", *tensor.shape))
            fh.write(tensor.tobytes())


def load_checkpoint(path) -> dict:
    with open(path, "rb") as fh:
        blob = fh.read()
    if not blob.startswith(_CKPT_MAGIC):
        raise ValueError(f"{path}: not a checkpoint (bad magic)")
    off = len(_CKPT_MAGIC)

    def take(fmt):
        nonlocal off
        size = struct.calcsize(fmt)
        if off + size > len(blob):
            raise ValueError(f"{path}: truncated checkpoint")
        vals = struct.unpack_from(fmt, blob, off)
        off += size
        return vals

    version, count = take("<II")
    if version != _CKPT_VERSION:
        raise ValueError(f"{path}: unsupported checkpoint version {version}")
    weights = {}
    for _ in range(count):
        (name_len,) = take("<I")
        name = blob[off : off + name_len].decode("utf-8")
        off += name_len
        (rank,) = take("<I")
        dims = take(f"<{rank}I") if rank else ()
        n = int(np.prod(dims, dtype=np.int64)) if rank else 1
        nbytes = 4 * n
        if off + nbytes > len(blob):
            raise ValueError(f"{path}: truncated tensor {name!r}")
        data = np.frombuffer(blob, dtype="<f4", count=n, offset=off)
        off += nbytes
        weights[name] = data.reshape(dims).astype(np.float32)
    if off != len(blob):
        raise ValueError(f"{path}: trailing bytes after last tensor")
    return weights


# ---------------------------------------------------------------------------
# metric report text


def format_metric_report(report: MetricReport) -> str:
    lines = []
    for key, value in report.items():
        if value is None:
            lines.append(f"{key}: n/a")
        elif isinstance(value, float):
            lines.append(f"{key}: {_fmt(value)}")
        else:
            lines.append(f"{key}: {value}")
    return "\n".join(lines) + "\n"


def metric_report_tsv(report: MetricReport) -> str:
    keys = [k for k, _ in report.items()]
    vals = [
        "n/a" if v is None else (_fmt(v) if isinstance(v, float) else str(v))
        for _, v in report.items()
    ]
    return "\t".join(keys) + "\n" + "\t".join(vals) + "\n"
