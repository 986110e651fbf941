"""Timing comparison of the quadratic matrix realization against the
chunked scan, with a correctness gate before every timing run."""

import time
from dataclasses import dataclass

import numpy as np

from .ssd import SsdParams, chunked_scan, ssd_matrix_form

__all__ = ["BenchRow", "BenchResult", "run_benchmark", "format_bench_table"]

_AGREE_RTOL = 1e-5


@dataclass(frozen=True)
class BenchRow:
    seq_len: int
    matrix_s: float
    chunked_s: float

    @property
    def speedup(self) -> float:
        return self.matrix_s / self.chunked_s


@dataclass(frozen=True)
class BenchResult:
    rows: list
    chunk: int

    def loglog_slope(self, which: str) -> float:
        """Least-squares slope of log(time) vs log(T); ~2 for the matrix
        form, ~1 for the chunked scan."""
        t = np.log([r.seq_len for r in self.rows])
        y = np.log([getattr(r, which) for r in self.rows])
        return float(np.polyfit(t, y, 1)[0])


def _random_instance(rng, seq_len, state, channels):
    return SsdParams(
        a=rng.uniform(0.7, 1.0, size=seq_len),
        b=rng.standard_normal((seq_len, state)),
        c=rng.standard_normal((seq_len, state)),
        x=rng.standard_normal((seq_len, channels)),
    )


def _median_time(fn, trials):
    samples = []
    for _ in range(trials):
        t0 = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - t0)
    return float(np.median(samples))


def run_benchmark(t_list=(256, 512, 1024, 2048, 4096), chunk: int = 16,
                  trials: int = 3, state: int = 8, channels: int = 4,
                  seed: int = 0) -> BenchResult:
    """Time both realizations per sequence length.

    Outputs are compared within 1e-5 relative before any timing; a
    disagreement raises instead of producing a table.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    rows = []
    for seq_len in t_list:
        params = _random_instance(rng, int(seq_len), state, channels)
        y_mat = ssd_matrix_form(params)
        y_chunk = chunked_scan(params, chunk=chunk)
        err = np.abs(y_mat - y_chunk).max() / max(np.abs(y_mat).max(), 1e-30)
        if err > _AGREE_RTOL:
            raise AssertionError(
                f"realizations disagree at T={seq_len}: relative error {err:.3g}"
            )
        rows.append(
            BenchRow(
                seq_len=int(seq_len),
                matrix_s=_median_time(lambda: ssd_matrix_form(params), trials),
                chunked_s=_median_time(lambda: chunked_scan(params, chunk=chunk), trials),
            )
        )
    return BenchResult(rows=rows, chunk=chunk)


def format_bench_table(result: BenchResult) -> str:
    lines = [f"{'T':>6}  {'matrix [ms]':>12}  {'chunked [ms]':>12}  {'speedup':>8}"]
    for r in result.rows:
        lines.append(
            f"{r.seq_len:>6}  {r.matrix_s * 1e3:>12.3f}  "
            f"{r.chunked_s * 1e3:>12.3f}  {r.speedup:>8.1f}"
        )
    lines.append(
        f"log-log slopes: matrix {result.loglog_slope('matrix_s'):.2f}, "
        f"chunked {result.loglog_slope('chunked_s'):.2f} (chunk={result.chunk})"
    )
    return "\n".join(lines) + "\n"
