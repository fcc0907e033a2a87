"""Reference x test difference matrices and windowed local contrast enhancement."""

from __future__ import annotations

import enum
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from seqlcd import _kernels
from seqlcd.descriptor import DescriptorSet
from seqlcd.errors import SeqLcdError
from seqlcd.parallel import run_chunked

_BIN_HEADER = struct.Struct("<II")  # rows, cols


class Metric(enum.Enum):
    SAD = "sad"
    EUCLID_SQ = "euclid_sq"


@dataclass(frozen=True)
class EnhanceConfig:
    window_radius: int = 10
    epsilon: float = 1e-6

    def __post_init__(self) -> None:
        if self.window_radius < 1:
            raise SeqLcdError(f"window_radius must be >= 1, got {self.window_radius}")


@dataclass(eq=False)
class DifferenceMatrix:
    values: np.ndarray  # (M reference frames, N test frames) float64
    enhanced: bool = False

    def __post_init__(self) -> None:
        if self.values.ndim != 2 or self.values.size == 0:
            raise SeqLcdError(f"difference matrix must be non-empty 2-D, got {self.values.shape}")
        if not np.isfinite(self.values).all():
            raise SeqLcdError("difference matrix contains non-finite values")
        if not self.enhanced and (self.values < 0).any():
            raise SeqLcdError("raw difference matrix contains negative values")

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def cols(self) -> int:
        return self.values.shape[1]


def compute_difference_matrix(
    ref: DescriptorSet,
    test: DescriptorSet,
    metric: Metric = Metric.SAD,
    threads: int = 1,
) -> DifferenceMatrix:
    """Pairwise frame differences: values[i][j] = metric(ref_i, test_j)."""
    if ref.dim != test.dim:
        raise SeqLcdError(f"descriptor dim mismatch: ref {ref.dim} vs test {test.dim}")
    ref_values = np.ascontiguousarray(ref.values, dtype=np.float64)
    test_values = np.ascontiguousarray(test.values, dtype=np.float64)
    out = np.empty((ref.count, test.count), dtype=np.float64)
    kernel = _kernels.pairwise_sad if metric is Metric.SAD else _kernels.pairwise_euclid_sq
    run_chunked(lambda r0, r1: kernel(ref_values, test_values, out, r0, r1),
                ref.count, threads)
    return DifferenceMatrix(out, enhanced=False)


def enhance_local(
    d: DifferenceMatrix,
    cfg: EnhanceConfig = EnhanceConfig(),
    threads: int = 1,
) -> DifferenceMatrix:
    """Windowed z-score along the reference axis within each test column.

    For each entry, the window covers rows [i - R, i + R] truncated to the
    matrix; the entry is centered on the window mean and divided by
    max(population sigma, epsilon).
    """
    if d.enhanced:
        raise SeqLcdError("difference matrix is already enhanced")
    values = np.ascontiguousarray(d.values, dtype=np.float64)
    out = np.empty_like(values)
    run_chunked(
        lambda c0, c1: _kernels.enhance_columns(
            values, cfg.window_radius, cfg.epsilon, out, c0, c1
        ),
        d.cols,
        threads,
    )
    return DifferenceMatrix(out, enhanced=True)


def write_matrix_csv(d: DifferenceMatrix, path: str | Path) -> None:
    """Debug dump: one CSV row per reference frame."""
    with open(path, "w", encoding="utf-8") as fh:
        for row in d.values:
            fh.write(",".join(repr(float(v)) for v in row))
            fh.write("\n")


def write_matrix_binary(d: DifferenceMatrix, path: str | Path) -> None:
    """Raw float32 dump with an 8-byte little-endian (rows, cols) header."""
    header = _BIN_HEADER.pack(d.rows, d.cols)
    payload = np.ascontiguousarray(d.values, dtype="<f4").tobytes(order="C")
    Path(path).write_bytes(header + payload)


def read_matrix_binary(path: str | Path, enhanced: bool = False) -> DifferenceMatrix:
    data = Path(path).read_bytes()
    if len(data) < _BIN_HEADER.size:
        raise SeqLcdError(f"matrix file too short: {len(data)} bytes")
    rows, cols = _BIN_HEADER.unpack_from(data)
    expected = _BIN_HEADER.size + rows * cols * 4
    if rows == 0 or cols == 0 or len(data) != expected:
        raise SeqLcdError(f"matrix file size mismatch: {len(data)} vs expected {expected}")
    values = np.frombuffer(data, dtype="<f4", offset=_BIN_HEADER.size)
    return DifferenceMatrix(values.reshape(rows, cols).astype(np.float64), enhanced=enhanced)
