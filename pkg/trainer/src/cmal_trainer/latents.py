"""Latent export through the binary interchange format.

Layout (little-endian): magic ``CMALLAT1`` | u32 version=1 | u32 count |
u32 dim | count x dim float32 values, row-major. This mirrors the format the
matching engine reads; the writer is reimplemented here so the two components
share only the bytes.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np
import torch

from cmal_trainer import DataError, TrainerError
from cmal_trainer.data import ManifestInfo, read_manifest, read_pgm
from cmal_trainer.models import ModelBundle, one_hot

MAGIC = b"CMALLAT1"
VERSION = 1
_HEADER = struct.Struct("<8sIII")


def write_latent_file(values: np.ndarray, path: str | Path) -> None:
    values = np.ascontiguousarray(values, dtype="<f4")
    if values.ndim != 2 or values.shape[0] == 0 or values.shape[1] == 0:
        raise TrainerError(f"latents must be a non-empty 2-D matrix, got {values.shape}")
    if not np.isfinite(values).all():
        raise TrainerError("latents contain non-finite values")
    header = _HEADER.pack(MAGIC, VERSION, values.shape[0], values.shape[1])
    Path(path).write_bytes(header + values.tobytes(order="C"))


def read_latent_file(path: str | Path) -> np.ndarray:
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise DataError(f"latent file too short: {len(data)} bytes")
    magic, version, count, dim = _HEADER.unpack_from(data)
    if magic != MAGIC or version != VERSION:
        raise DataError(f"bad latent header: magic={magic!r} version={version}")
    expected = _HEADER.size + count * dim * 4
    if count == 0 or dim == 0 or len(data) != expected:
        raise DataError(f"latent file size mismatch: {len(data)} vs {expected}")
    return np.frombuffer(data, dtype="<f4", offset=_HEADER.size).reshape(count, dim).copy()


def encode_frames(bundle: ModelBundle, images: np.ndarray, batch_size: int = 64) -> np.ndarray:
    """Encode (N, 1, H, W) float images; the condition fed to the encoder is
    the classifier's argmax prediction per frame."""
    config = bundle.config
    bundle.eval()
    rows = []
    with torch.no_grad():
        for start in range(0, images.shape[0], batch_size):
            x = torch.from_numpy(images[start : start + batch_size])
            predicted = bundle.classifier(x).argmax(dim=1)
            c = one_hot(predicted, config.n_conditions)
            rows.append(bundle.encoder(x, c).numpy())
    return np.concatenate(rows, axis=0)


def export_latents(bundle: ModelBundle, manifest_path: str | Path, out_path: str | Path) -> int:
    """One latent row per manifest frame, readable by the matching engine."""
    info: ManifestInfo = read_manifest(manifest_path)
    size = bundle.config.image_size
    images = []
    for ipath in info.image_paths:
        img = read_pgm(ipath)
        if img.shape != (size, size):
            raise DataError(
                f"{ipath}: expected {size}x{size} input, got {img.shape[1]}x{img.shape[0]}"
            )
        images.append(img)
    stack = (np.stack(images).astype(np.float32) / 255.0)[:, None, :, :]
    values = encode_frames(bundle, stack)
    if values.shape[1] != bundle.config.latent_dim:
        raise TrainerError(
            f"encoder produced dim {values.shape[1]}, config says {bundle.config.latent_dim}"
        )
    write_latent_file(values, out_path)
    return values.shape[0]
