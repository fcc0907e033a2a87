"""Per-frame descriptors, inter-frame distances, and the latent interchange format."""

from __future__ import annotations

import enum
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from seqlcd.errors import LatentFileError, SeqLcdError
from seqlcd.imaging import ImageBuffer, downsample, patch_normalize, to_grayscale
from seqlcd.model import SequenceManifest

LATENT_MAGIC = b"CMALLAT1"
LATENT_VERSION = 1
_HEADER = struct.Struct("<8sIII")  # magic, version, count, dim


class DescriptorKind(enum.Enum):
    SAD = "sad"
    LATENT = "latent"


@dataclass(frozen=True)
class SadConfig:
    out_w: int = 64
    out_h: int = 32
    patch: int = 8
    epsilon: float = 1e-6

    def __post_init__(self) -> None:
        if self.out_w <= 0 or self.out_h <= 0 or self.patch <= 0:
            raise SeqLcdError(f"SadConfig dimensions must be positive: {self}")

    @property
    def dim(self) -> int:
        return self.out_w * self.out_h


@dataclass(frozen=True, eq=False)
class DescriptorSet:
    """Immutable N x d matrix of per-frame feature vectors."""

    values: np.ndarray
    kind: DescriptorKind

    def __post_init__(self) -> None:
        v = self.values
        if v.ndim != 2 or v.shape[0] == 0 or v.shape[1] == 0:
            raise SeqLcdError(f"descriptor set must be a non-empty 2-D matrix, got {v.shape}")
        if not np.isfinite(v).all():
            raise SeqLcdError("descriptor set contains non-finite values")

    @property
    def count(self) -> int:
        return self.values.shape[0]

    @property
    def dim(self) -> int:
        return self.values.shape[1]


def sad_descriptor(img: ImageBuffer, cfg: SadConfig = SadConfig()) -> np.ndarray:
    """Grayscale -> box downsample -> patch normalize -> row-major flatten."""
    gray = to_grayscale(img)
    small = downsample(gray, cfg.out_w, cfg.out_h)
    normalized = patch_normalize(small, cfg.patch, cfg.epsilon)
    return normalized.reshape(-1)


def sad_descriptor_set(
    manifest: SequenceManifest, cfg: SadConfig = SadConfig()
) -> DescriptorSet:
    """Compute SAD descriptors for every frame of a manifest."""
    from seqlcd.imaging import decode_image

    rows = np.empty((len(manifest.frames), cfg.dim), dtype=np.float64)
    for i, frame in enumerate(manifest.frames):
        img = decode_image(manifest.resolve_image_path(frame))
        rows[i] = sad_descriptor(img, cfg)
    return DescriptorSet(rows, DescriptorKind.SAD)


def _check_dims(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape or a.ndim != 1:
        raise SeqLcdError(f"descriptor dim mismatch: {a.shape} vs {b.shape}")


def sad_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Sum of absolute differences."""
    _check_dims(a, b)
    return float(np.abs(np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64)).sum())


def euclidean_sq_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Squared Euclidean distance.

    The squared form is cheaper and ranking-equivalent to the true Euclidean
    distance, so matcher argmins are unchanged.
    """
    _check_dims(a, b)
    diff = np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64)
    return float((diff * diff).sum())


def write_latents(descriptors: DescriptorSet, path: str | Path) -> None:
    """Write the little-endian latent interchange file (float32 payload)."""
    values = np.ascontiguousarray(descriptors.values, dtype="<f4")
    if not np.isfinite(values).all():
        raise LatentFileError("latent values must be finite after float32 conversion")
    header = _HEADER.pack(LATENT_MAGIC, LATENT_VERSION, descriptors.count, descriptors.dim)
    Path(path).write_bytes(header + values.tobytes(order="C"))


def read_latents(path: str | Path) -> DescriptorSet:
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise LatentFileError(f"latent file too short: {len(data)} bytes")
    magic, version, count, dim = _HEADER.unpack_from(data)
    if magic != LATENT_MAGIC:
        raise LatentFileError(f"bad magic {magic!r} (want {LATENT_MAGIC!r})")
    if version != LATENT_VERSION:
        raise LatentFileError(f"unsupported version {version} (want {LATENT_VERSION})")
    if count == 0 or dim == 0:
        raise LatentFileError(f"count and dim must be positive, got {count}x{dim}")
    expected = _HEADER.size + count * dim * 4
    if len(data) != expected:
        raise LatentFileError(
            f"payload size mismatch: expected {expected} bytes total, got {len(data)}"
        )
    values = np.frombuffer(data, dtype="<f4", offset=_HEADER.size).reshape(count, dim)
    return DescriptorSet(values.copy(), DescriptorKind.LATENT)
