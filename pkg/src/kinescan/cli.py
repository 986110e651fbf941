"""Command-line surface.

Commands: orders | gen-synthetic | infer | eval | verify | train-micro |
bench. Exit codes: 0 success, 1 validation failure, 2 property-suite
failure.
"""

import argparse
import sys

import numpy as np

from . import io as kio
from .bench import format_bench_table, run_benchmark
from .kinematics import default_tree, fks_order, index_order, uks_order
from .model import infer_windowed, init_weights
from .synthetic import gen_synthetic, sparse_from_pose
from .training import smoothed_trace, train_micro
from .verify import run_all

__all__ = ["main"]


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 by default; 2 is reserved for property failures
    def error(self, message):
        self.exit(1, f"{self.prog}: error: {message}\n")


def _fmt_order(order):
    return ",".join(str(j) for j in order.forward)


def cmd_orders(args) -> int:
    print(f"index (0..21): {_fmt_order(index_order())}")
    print(f"fks (32 entries, 5 branches): {_fmt_order(fks_order())}")
    print(f"uks (22 entries, root central): {_fmt_order(uks_order())}")
    return 0


def cmd_gen_synthetic(args) -> int:
    seq = gen_synthetic(args.seed, args.frames, args.kind, fps=args.fps)
    kio.save_sequence(args.out, seq)
    print(f"wrote {args.kind} sequence: {seq.frames} frames -> {args.out}")
    return 0


def _load_run_config(path):
    return kio.load_run_config(path) if path else kio.RunConfig()


def _weights_for(rc, weights_path):
    reference = init_weights(rc.model)
    if weights_path is None:
        return reference
    loaded = kio.load_checkpoint(weights_path)
    if set(loaded) != set(reference):
        raise ValueError(f"{weights_path}: tensor names do not match the config")
    for name, tensor in loaded.items():
        if tensor.shape != reference[name].shape:
            raise ValueError(
                f"{weights_path}: tensor {name!r} has shape {tensor.shape}, "
                f"config expects {reference[name].shape}"
            )
    return loaded


def cmd_infer(args) -> int:
    rc = _load_run_config(args.config)
    seq = kio.load_sequence(args.input)
    if seq.kind != "sparse_input":
        raise ValueError(f"{args.input}: infer expects a sparse_input sequence")
    weights = _weights_for(rc, args.weights)
    chunk = args.chunk if args.chunk else rc.chunk
    pose = infer_windowed(seq.data, rc.model, weights, chunk=chunk)
    kio.save_sequence(args.out, kio.sequence_from_pose(pose, fps=seq.fps))
    print(f"inferred {pose.shape[0]} frames -> {args.out}")
    return 0


def cmd_eval(args) -> int:
    from .metrics import metrics

    pred_seq = kio.load_sequence(args.pred)
    gt_seq = kio.load_sequence(args.gt)
    if pred_seq.frames != gt_seq.frames:
        raise ValueError(
            f"length mismatch: {pred_seq.frames} predicted vs {gt_seq.frames} ground-truth frames"
        )
    tree = kio.load_skeleton(args.skeleton) if args.skeleton else default_tree()
    pose_y, root_y = kio.pose_from_sequence(pred_seq)
    pose_z, root_z = kio.pose_from_sequence(gt_seq)
    fps = args.fps if args.fps else gt_seq.fps
    report = metrics(pose_y, pose_z, tree, fps=fps, root_y=root_y, root_z=root_z)
    text = kio.format_metric_report(report)
    print(text, end="")
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    return 0


def cmd_verify(args) -> int:
    results = run_all(seed=args.seed)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.name}: {r.detail}")
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} properties passed")
    return 0 if failed == 0 else 2


def cmd_train_micro(args) -> int:
    rc = kio.micro_run_config(seed=args.seed) if args.config is None \
        else kio.load_run_config(args.config)
    tree = kio.load_skeleton(args.skeleton) if args.skeleton else default_tree()
    if args.data:
        seq = kio.load_sequence(args.data)
        if seq.kind != "pose":
            raise ValueError(f"{args.data}: train-micro expects a pose sequence")
        if seq.frames != rc.model.seq_len:
            raise ValueError(
                f"{args.data}: {seq.frames} frames, config expects {rc.model.seq_len}"
            )
        z, _ = kio.pose_from_sequence(seq)
        fps = seq.fps
    else:
        z_seq = gen_synthetic(args.seed, rc.model.seq_len, "pose", fps=rc.fps)
        z, _ = kio.pose_from_sequence(z_seq)
        fps = rc.fps
    x = sparse_from_pose(np.asarray(z, dtype=np.float64), tree, fps=fps)

    result = train_micro(rc.model, x, np.asarray(z, dtype=np.float64),
                         iters=args.iters, seed=args.seed,
                         loss_weights=rc.loss, chunk=rc.chunk)
    if args.out:
        kio.save_checkpoint(args.out, result.weights)
    if args.trace:
        with open(args.trace, "w", encoding="utf-8") as fh:
            fh.writelines(f"{v:.9g}\n" for v in result.trace)
    if len(result.trace):
        smoothed = smoothed_trace(result.trace)
        reduction = 1.0 - smoothed[-1] / result.initial_loss
        print(
            f"initial loss {result.initial_loss:.6f}, smoothed final "
            f"{smoothed[-1]:.6f} ({reduction:.1%} reduction over {args.iters} iters)"
        )
    else:
        print(f"initial loss {result.initial_loss:.6f}, no iterations run")
    return 0


def cmd_bench(args) -> int:
    t_list = tuple(int(t) for t in args.t_list.split(","))
    result = run_benchmark(t_list=t_list, chunk=args.chunk, trials=args.trials,
                           seed=args.seed)
    print(format_bench_table(result), end="")
    return 0


def _build_parser():
    parser = _Parser(prog="kinescan", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("orders", help="print the three joint scan orders")
    p.set_defaults(fn=cmd_orders)

    p = sub.add_parser("gen-synthetic", help="write a smooth synthetic sequence")
    p.add_argument("--kind", choices=("sparse_input", "pose"), default="sparse_input")
    p.add_argument("--frames", type=int, default=96)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--fps", type=float, default=60.0)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_gen_synthetic)

    p = sub.add_parser("infer", help="run the network over a sparse-input file")
    p.add_argument("input")
    p.add_argument("--config", default=None)
    p.add_argument("--weights", default=None)
    p.add_argument("--chunk", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_infer)

    p = sub.add_parser("eval", help="evaluate predicted poses against ground truth")
    p.add_argument("pred")
    p.add_argument("gt")
    p.add_argument("--skeleton", default=None)
    p.add_argument("--fps", type=float, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("verify", help="run the cross-module property suite")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("train-micro", help="derivative-free training at micro scale")
    p.add_argument("--config", default=None)
    p.add_argument("--data", default=None)
    p.add_argument("--skeleton", default=None)
    p.add_argument("--iters", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.add_argument("--trace", default=None)
    p.set_defaults(fn=cmd_train_micro)

    p = sub.add_parser("bench", help="time the quadratic vs chunked realizations")
    p.add_argument("--t-list", default="256,512,1024,2048,4096")
    p.add_argument("--chunk", type=int, default=16)
    p.add_argument("--trials", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ValueError, OSError, RuntimeError, AssertionError) as exc:
        print(f"kinescan: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
