"""Velocity-swept sequence route search over the enhanced difference matrix."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from seqlcd import _kernels
from seqlcd.diffmatrix import DifferenceMatrix
from seqlcd.errors import SeqLcdError
from seqlcd.parallel import run_chunked


@dataclass(frozen=True)
class MatcherParams:
    d_s: int = 10
    v_min: float = 0.8
    v_max: float = 1.1
    v_step: float = 0.1
    score_threshold: float | None = None

    def __post_init__(self) -> None:
        if self.d_s < 1:
            raise SeqLcdError(f"d_s must be >= 1, got {self.d_s}")
        if self.v_min > self.v_max:
            raise SeqLcdError(f"v_min {self.v_min} > v_max {self.v_max}")
        if self.v_step <= 0:
            raise SeqLcdError(f"v_step must be positive, got {self.v_step}")
        if self.v_min <= 0:
            raise SeqLcdError(f"v_min must be positive, got {self.v_min}")


@dataclass(frozen=True)
class MatchCandidate:
    test_index: int
    ref_index: int
    velocity: float
    score: float


def enumerate_velocities(params: MatcherParams) -> list[float]:
    """v_min, v_min + v_step, ... up to and including v_max (within 1e-9)."""
    count = int(math.floor((params.v_max - params.v_min) / params.v_step + 1e-9)) + 1
    return [params.v_min + i * params.v_step for i in range(count)]


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def _velocity_offsets(velocities: list[float], d_s: int) -> np.ndarray:
    """Row offsets round(V * t') for t' = 0..d_s, one row per velocity."""
    offsets = np.empty((len(velocities), d_s + 1), dtype=np.int64)
    for v, vel in enumerate(velocities):
        for tp in range(d_s + 1):
            offsets[v, tp] = _round_half_up(vel * tp)
    return offsets


def score_route(
    dhat: DifferenceMatrix, test_index: int, s: int, velocity: float, d_s: int
) -> float | None:
    """Sum the route ending at ``test_index`` that starts at reference row ``s``.

    Returns None (REJECT) when any step leaves the matrix.
    """
    if not dhat.enhanced:
        raise SeqLcdError("score_route requires an enhanced difference matrix")
    if not (d_s <= test_index < dhat.cols):
        raise SeqLcdError(
            f"test index {test_index} out of range [{d_s}, {dhat.cols - 1}]"
        )
    total = 0.0
    for t in range(test_index - d_s, test_index + 1):
        k = _round_half_up(s + velocity * (t - test_index + d_s))
        if not (0 <= k < dhat.rows):
            return None
        total += float(dhat.values[k, t])
    return total


def search_matches(
    dhat: DifferenceMatrix, params: MatcherParams = MatcherParams(), threads: int = 1
) -> list[MatchCandidate]:
    """Best (s, V) route per test frame T in [d_s, N-1].

    Minimizes the route score over all start rows and enumerated velocities;
    ties break to the lower start row, then the lower velocity. Frames whose
    every route leaves the matrix yield no candidate. N <= d_s gives an empty
    result.
    """
    if not dhat.enhanced:
        raise SeqLcdError("search_matches requires an enhanced difference matrix")
    n = dhat.cols
    d_s = params.d_s
    if n <= d_s:
        return []
    velocities = enumerate_velocities(params)
    offsets = _velocity_offsets(velocities, d_s)
    values = np.ascontiguousarray(dhat.values, dtype=np.float64)

    out_score = np.full(n, np.inf)
    out_s = np.full(n, -1, dtype=np.int64)
    out_v = np.full(n, -1, dtype=np.int64)
    run_chunked(
        lambda t0, t1: _kernels.best_routes(
            values, offsets, d_s, t0 + d_s, t1 + d_s, out_score, out_s, out_v
        ),
        n - d_s,
        threads,
    )

    candidates = []
    for t in range(d_s, n):
        if not np.isfinite(out_score[t]):
            continue
        s = int(out_s[t])
        v = int(out_v[t])
        candidates.append(
            MatchCandidate(
                test_index=t,
                ref_index=s + int(offsets[v, d_s]),
                velocity=velocities[v],
                score=float(out_score[t]),
            )
        )
    return candidates


def apply_threshold(
    candidates: list[MatchCandidate], threshold: float
) -> dict[int, int]:
    """Accepted matches: candidates whose score is strictly below the threshold."""
    return {c.test_index: c.ref_index for c in candidates if c.score < threshold}


def write_candidates_csv(candidates: list[MatchCandidate], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("T,ref_index,V,S\n")
        for c in candidates:
            fh.write(f"{c.test_index},{c.ref_index},{c.velocity!r},{c.score!r}\n")


def read_candidates_csv(path: str | Path) -> list[MatchCandidate]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0].strip() != "T,ref_index,V,S":
        raise SeqLcdError(f"candidates CSV {path} missing 'T,ref_index,V,S' header")
    candidates = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 4:
            raise SeqLcdError(f"{path}:{lineno}: expected 4 columns, got {len(parts)}")
        try:
            candidates.append(
                MatchCandidate(
                    test_index=int(parts[0]),
                    ref_index=int(parts[1]),
                    velocity=float(parts[2]),
                    score=float(parts[3]),
                )
            )
        except ValueError as exc:
            raise SeqLcdError(f"{path}:{lineno}: {exc}") from exc
    return candidates
