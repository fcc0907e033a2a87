"""Route manifest and image loading.

The trainer talks to the matching engine only through its published file
formats, so the manifest JSON and binary PGM readers live here rather than
being imported from it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from cmal_trainer import DataError
from cmal_trainer.config import TrainConfig


def read_pgm(path: str | Path) -> np.ndarray:
    """Binary PGM (P5), 8-bit; returns (h, w) uint8."""
    data = Path(path).read_bytes()
    if data[:2] != b"P5":
        raise DataError(f"{path}: expected binary PGM (P5)")
    pos = 2
    tokens: list[int] = []
    while len(tokens) < 3:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos : pos + 1] != b"\n":
                pos += 1
            continue
        end = pos
        while end < len(data) and not data[end : end + 1].isspace():
            end += 1
        if end == pos:
            raise DataError(f"{path}: truncated header")
        tokens.append(int(data[pos:end]))
        pos = end
    width, height, maxval = tokens
    if maxval != 255:
        raise DataError(f"{path}: unsupported maxval {maxval}")
    pos += 1
    payload = data[pos : pos + width * height]
    if len(payload) != width * height:
        raise DataError(f"{path}: truncated payload")
    return np.frombuffer(payload, dtype=np.uint8).reshape(height, width).copy()


@dataclass(frozen=True)
class ManifestInfo:
    route_id: str
    condition: str
    frame_ids: tuple[int, ...]
    image_paths: tuple[Path, ...]


def read_manifest(path: str | Path) -> ManifestInfo:
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"cannot read manifest {path}: {exc}") from exc
    try:
        frames = raw["frames"]
        return ManifestInfo(
            route_id=str(raw["route_id"]),
            condition=str(raw["condition"]),
            frame_ids=tuple(int(f["id"]) for f in frames),
            image_paths=tuple(path.parent / f["file"] for f in frames),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"malformed manifest {path}: {exc}") from exc


@dataclass
class RouteDataset:
    """Images grouped by condition with geometry pairing by frame id.

    images: float32 (N, 1, H, W) in [0, 1]; labels: int64 condition indices;
    frame_ids aligns entries of the same geometry across conditions.
    """

    images: np.ndarray
    labels: np.ndarray
    frame_ids: np.ndarray
    condition_names: tuple[str, ...]

    def __len__(self) -> int:
        return len(self.labels)

    def by_condition(self, index: int) -> np.ndarray:
        return np.flatnonzero(self.labels == index)

    def is_paired(self) -> bool:
        """True when every condition covers the same frame-id set."""
        wanted = None
        for c in range(len(self.condition_names)):
            ids = frozenset(self.frame_ids[self.by_condition(c)])
            if not ids:
                return False
            if wanted is None:
                wanted = ids
            elif ids != wanted:
                return False
        return True


def load_dataset(manifest_paths: list[str | Path], config: TrainConfig) -> RouteDataset:
    """Load one manifest per condition into a training dataset."""
    images = []
    labels = []
    frame_ids = []
    for mpath in manifest_paths:
        info = read_manifest(mpath)
        label = config.condition_index(info.condition)
        for frame_id, ipath in zip(info.frame_ids, info.image_paths):
            img = read_pgm(ipath)
            if img.shape != (config.image_size, config.image_size):
                raise DataError(
                    f"{ipath}: expected {config.image_size}x{config.image_size}, "
                    f"got {img.shape[1]}x{img.shape[0]}"
                )
            images.append(img)
            labels.append(label)
            frame_ids.append(frame_id)
    if not images:
        raise DataError("no frames loaded")
    stack = (np.stack(images).astype(np.float32) / 255.0)[:, None, :, :]
    return RouteDataset(
        images=stack,
        labels=np.asarray(labels, dtype=np.int64),
        frame_ids=np.asarray(frame_ids, dtype=np.int64),
        condition_names=config.condition_names,
    )
