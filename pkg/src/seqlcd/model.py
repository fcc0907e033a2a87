"""Route manifests, condition labels, and position-based ground-truth alignment."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from seqlcd.errors import ManifestError

DEFAULT_CONDITION_NAMES = ("sunny", "foggy", "rainy")
DEFAULT_D_THRESH = 20


@dataclass(frozen=True)
class ConditionLabel:
    name: str
    index: int


def condition_set(names: tuple[str, ...] = DEFAULT_CONDITION_NAMES) -> tuple[ConditionLabel, ...]:
    """Build the finite label set for a run; names must be unique."""
    if not names:
        raise ManifestError("condition set must not be empty")
    if len(set(names)) != len(names):
        raise ManifestError(f"duplicate condition names: {names!r}")
    return tuple(ConditionLabel(name, i) for i, name in enumerate(names))


def lookup_condition(name: str, labels: tuple[ConditionLabel, ...]) -> ConditionLabel:
    for label in labels:
        if label.name == name:
            return label
    known = ", ".join(l.name for l in labels)
    raise ManifestError(f"unknown condition name {name!r} (known: {known})")


@dataclass(frozen=True)
class Frame:
    id: int
    image_path: str  # relative to the manifest directory
    position: float
    condition: ConditionLabel


@dataclass
class SequenceManifest:
    route_id: str
    condition: ConditionLabel
    frames: list[Frame]
    descriptor_ref: str | None = None
    # Directory the frame paths are relative to; set on load, not serialized.
    base_dir: Path | None = field(default=None, compare=False)

    def __len__(self) -> int:
        return len(self.frames)

    def positions(self) -> np.ndarray:
        return np.array([f.position for f in self.frames], dtype=np.float64)

    def resolve_image_path(self, frame: Frame) -> Path:
        base = self.base_dir if self.base_dir is not None else Path(".")
        return base / frame.image_path


def _validate_frames(frames: list[Frame]) -> None:
    if not frames:
        raise ManifestError("manifest must contain at least one frame")
    for i, frame in enumerate(frames):
        if frame.id != i:
            raise ManifestError(
                f"frame ids must be consecutive 0..N-1, got id {frame.id} at index {i}"
            )
    positions = [f.position for f in frames]
    for i in range(1, len(positions)):
        if positions[i] < positions[i - 1]:
            raise ManifestError(
                f"non-monotone position at frame {i}: {positions[i]} < {positions[i - 1]}"
            )


def load_manifest(
    path: str | Path,
    condition_names: tuple[str, ...] = DEFAULT_CONDITION_NAMES,
) -> SequenceManifest:
    """Load and validate a manifest JSON file.

    Frame image paths stay relative; ``base_dir`` is set to the manifest's
    directory so they can be resolved later.
    """
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ManifestError(f"cannot parse manifest {path}: {exc}") from exc
    return manifest_from_dict(raw, condition_names, base_dir=path.parent)


def manifest_from_dict(
    raw: dict,
    condition_names: tuple[str, ...] = DEFAULT_CONDITION_NAMES,
    base_dir: Path | None = None,
) -> SequenceManifest:
    if not isinstance(raw, dict):
        raise ManifestError("manifest root must be a JSON object")
    for key in ("route_id", "condition", "frames"):
        if key not in raw:
            raise ManifestError(f"manifest missing required key {key!r}")
    labels = condition_set(condition_names)
    condition = lookup_condition(raw["condition"], labels)
    frames = []
    for entry in raw["frames"]:
        try:
            frames.append(
                Frame(
                    id=int(entry["id"]),
                    image_path=str(entry["file"]),
                    position=float(entry["position"]),
                    condition=condition,
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ManifestError(f"malformed frame entry {entry!r}: {exc}") from exc
    _validate_frames(frames)
    return SequenceManifest(
        route_id=str(raw["route_id"]),
        condition=condition,
        frames=frames,
        descriptor_ref=raw.get("descriptor_ref"),
        base_dir=base_dir,
    )


def manifest_to_dict(manifest: SequenceManifest) -> dict:
    return {
        "route_id": manifest.route_id,
        "condition": manifest.condition.name,
        "frames": [
            {"id": f.id, "file": f.image_path, "position": f.position}
            for f in manifest.frames
        ],
        "descriptor_ref": manifest.descriptor_ref,
    }


def save_manifest(manifest: SequenceManifest, path: str | Path) -> None:
    """Write the canonical form: sorted keys, compact separators, one trailing newline.

    Canonicalization makes save -> load -> save byte-stable.
    """
    _validate_frames(manifest.frames)
    payload = json.dumps(manifest_to_dict(manifest), sort_keys=True, separators=(",", ":"))
    Path(path).write_text(payload + "\n", encoding="utf-8")


@dataclass
class GroundTruthAlignment:
    pairs: dict[int, int]  # test frame id -> reference frame id
    d_thresh: int = DEFAULT_D_THRESH

    def __post_init__(self) -> None:
        if self.d_thresh <= 0:
            raise ManifestError(f"d_thresh must be positive, got {self.d_thresh}")


def align_ground_truth(
    ref: SequenceManifest,
    test: SequenceManifest,
    d_thresh: int = DEFAULT_D_THRESH,
) -> GroundTruthAlignment:
    """Map each test frame to the reference frame with the nearest position.

    A pair is dropped when the position gap exceeds the route span of
    ``d_thresh`` reference frames (d_thresh times the mean reference frame
    spacing). Ties between two equally near reference frames break toward
    the lower id.
    """
    if not ref.frames:
        raise ManifestError("empty reference manifest")
    ref_pos = ref.positions()
    m = len(ref_pos)
    spacing = float(ref_pos[-1] - ref_pos[0]) / (m - 1) if m > 1 else 0.0
    tolerance = d_thresh * spacing

    pairs: dict[int, int] = {}
    for frame in test.frames:
        idx = int(np.searchsorted(ref_pos, frame.position, side="left"))
        best_id = None
        best_diff = None
        for cand in (idx - 1, idx):
            if 0 <= cand < m:
                diff = abs(float(ref_pos[cand]) - frame.position)
                if best_diff is None or diff < best_diff:
                    best_id, best_diff = cand, diff
        assert best_id is not None and best_diff is not None
        if best_diff <= tolerance:
            pairs[frame.id] = best_id
    return GroundTruthAlignment(pairs=pairs, d_thresh=d_thresh)
