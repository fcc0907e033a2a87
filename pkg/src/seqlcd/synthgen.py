"""Deterministic procedural generator of multi-condition route imagery.

A seeded landmark field along a 1-D route is rendered with simple parallax
layers, then styled per weather condition. Manifests carry exact positions and
every sequence ships a warp table (true test -> reference alignment) for use
as a ground-truth oracle.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from seqlcd.errors import SeqLcdError
from seqlcd.imaging import ImageBuffer, write_image
from seqlcd.model import (
    DEFAULT_CONDITION_NAMES,
    Frame,
    SequenceManifest,
    condition_set,
    lookup_condition,
    save_manifest,
)

# Condition styling constants. Tuned so SAD degrades moderately across
# conditions (an observable gap, not total failure); regression-pinned.
SUNNY_GAIN = 1.2
SUNNY_OFFSET = 20.0
FOG_WEIGHT = 0.55
FOG_GRAY = 200.0
RAIN_GAIN = 0.7
RAIN_STREAK_VALUE = 235
RAIN_STREAK_LEN = 5
RAIN_COVERAGE = 0.02


@dataclass(frozen=True)
class WorldConfig:
    seed: int = 7
    n_landmarks: int = 160
    width: int = 256
    height: int = 128
    route_length: float = 100.0
    condition_names: tuple[str, ...] = DEFAULT_CONDITION_NAMES

    def __post_init__(self) -> None:
        if self.n_landmarks < 1:
            raise SeqLcdError(f"n_landmarks must be >= 1, got {self.n_landmarks}")
        if self.width <= 0 or self.height <= 0:
            raise SeqLcdError(f"image dimensions must be positive: {self.width}x{self.height}")
        if self.route_length <= 0:
            raise SeqLcdError(f"route_length must be positive, got {self.route_length}")


@dataclass(frozen=True)
class Landmark:
    x: float  # route coordinate
    depth: float  # parallax divisor, >= 1
    elev: float  # relative height in [0, 1]
    size: float  # footprint in route units
    shade: int
    shape: int  # 0 rectangle, 1 triangle, 2 ellipse


@dataclass(frozen=True)
class World:
    config: WorldConfig
    landmarks: tuple[Landmark, ...]


@dataclass(frozen=True)
class SequenceSpec:
    n_frames: int  # nominal frame count at unit velocity
    start: float = 0.0
    end: float | None = None  # defaults to the world's route length
    velocity_ratio: float = 1.0
    condition: str = "sunny"
    noise_seed: int = 0

    def __post_init__(self) -> None:
        if self.n_frames < 1:
            raise SeqLcdError(f"n_frames must be >= 1, got {self.n_frames}")
        if self.velocity_ratio <= 0:
            raise SeqLcdError(f"velocity_ratio must be positive, got {self.velocity_ratio}")


def generate_world(cfg: WorldConfig) -> World:
    """Seeded landmark field; identical config gives an identical world."""
    rng = np.random.default_rng(cfg.seed)
    margin = 15.0
    landmarks = []
    depths = (1.0, 1.75, 3.0)
    for _ in range(cfg.n_landmarks):
        landmarks.append(
            Landmark(
                x=float(rng.uniform(-margin, cfg.route_length + margin)),
                depth=float(depths[rng.integers(0, len(depths))]),
                elev=float(rng.uniform(0.1, 0.9)),
                size=float(rng.uniform(0.8, 2.4)),
                shade=int(rng.integers(25, 231)),
                shape=int(rng.integers(0, 3)),
            )
        )
    return World(config=cfg, landmarks=tuple(landmarks))


def _draw_landmark(canvas: np.ndarray, lm: Landmark, position: float,
                   ppu: float, horizon: int) -> None:
    h, w = canvas.shape
    scale = ppu / lm.depth
    cx = w / 2.0 + (lm.x - position) * scale
    half_w = lm.size * scale / 2.0
    if cx + half_w < 0 or cx - half_w > w - 1:
        return
    base_y = horizon + (h - 1 - horizon) * 0.6 / lm.depth
    obj_h = lm.size * scale * (0.5 + lm.elev)
    y0 = max(0, int(math.floor(base_y - obj_h)))
    y1 = min(h - 1, int(math.floor(base_y)))
    x0 = max(0, int(math.floor(cx - half_w)))
    x1 = min(w - 1, int(math.floor(cx + half_w)))
    if y0 > y1 or x0 > x1:
        return
    if lm.shape == 0:  # rectangle
        canvas[y0 : y1 + 1, x0 : x1 + 1] = lm.shade
    elif lm.shape == 1:  # triangle, apex at the top
        span = max(y1 - y0, 1)
        for y in range(y0, y1 + 1):
            frac = (y - y0) / span
            hw = half_w * frac
            xa = max(0, int(math.floor(cx - hw)))
            xb = min(w - 1, int(math.floor(cx + hw)))
            if xa <= xb:
                canvas[y, xa : xb + 1] = lm.shade
    else:  # ellipse
        yy, xx = np.mgrid[y0 : y1 + 1, x0 : x1 + 1]
        cy = (y0 + y1) / 2.0
        ry = max((y1 - y0) / 2.0, 0.5)
        rx = max(half_w, 0.5)
        mask = ((xx - cx) / rx) ** 2 + ((yy - cy) / ry) ** 2 <= 1.0
        canvas[y0 : y1 + 1, x0 : x1 + 1][mask] = lm.shade


def render_frame(world: World, position: float) -> ImageBuffer:
    """Grayscale geometry render at a route position (before condition styling)."""
    cfg = world.config
    h, w = cfg.height, cfg.width
    ppu = w / 12.0  # pixels per route unit at depth 1
    horizon = int(h * 0.55)
    canvas = np.empty((h, w), dtype=np.float64)
    sky = np.linspace(135.0, 175.0, horizon, endpoint=False)
    canvas[:horizon] = sky[:, None]
    ground = np.linspace(105.0, 70.0, h - horizon)
    canvas[horizon:] = ground[:, None]
    # Far layers first so near landmarks occlude them.
    order = sorted(range(len(world.landmarks)),
                   key=lambda i: -world.landmarks[i].depth)
    for i in order:
        _draw_landmark(canvas, world.landmarks[i], position, ppu, horizon)
    return ImageBuffer(np.clip(np.floor(canvas + 0.5), 0, 255).astype(np.uint8))


def frame_noise_seed(noise_seed: int, frame_id: int) -> int:
    """Per-frame seed derived by hashing (seed, frame id)."""
    return int(np.random.SeedSequence([noise_seed, frame_id]).generate_state(1, np.uint64)[0])


def apply_condition(img: ImageBuffer, condition: str, noise_seed: int = 0) -> ImageBuffer:
    """Style a grayscale render for one weather condition; deterministic per
    (condition, seed)."""
    if img.channels != 1:
        raise SeqLcdError("apply_condition expects a grayscale image")
    px = img.pixels.astype(np.float64)
    h, w = px.shape
    if condition == "sunny":
        out = px * SUNNY_GAIN + SUNNY_OFFSET
    elif condition == "foggy":
        fall = np.zeros(h) if h == 1 else np.arange(h) / (h - 1)
        weight = FOG_WEIGHT * (1.0 - 0.5 * fall)
        out = px * (1.0 - weight[:, None]) + FOG_GRAY * weight[:, None]
    elif condition == "rainy":
        out = px * RAIN_GAIN
        rng = np.random.default_rng(noise_seed)
        n_streaks = int(round(RAIN_COVERAGE * w * h / RAIN_STREAK_LEN))
        for _ in range(n_streaks):
            x = int(rng.integers(0, w))
            y = int(rng.integers(0, max(h - RAIN_STREAK_LEN, 0) + 1))
            out[y : y + RAIN_STREAK_LEN, x] = RAIN_STREAK_VALUE
    else:
        raise SeqLcdError(f"unknown condition {condition!r}")
    return ImageBuffer(np.clip(np.floor(out + 0.5), 0, 255).astype(np.uint8))


def sequence_positions(spec: SequenceSpec, route_length: float) -> np.ndarray:
    """Frame positions advancing at the spec's velocity ratio.

    n_frames is the nominal count at unit velocity; the emitted count scales
    inversely with the ratio so the same span is covered.
    """
    end = route_length if spec.end is None else spec.end
    if spec.n_frames == 1:
        return np.array([spec.start], dtype=np.float64)
    base_step = (end - spec.start) / (spec.n_frames - 1)
    count = int(math.floor((spec.n_frames - 1) / spec.velocity_ratio + 0.5)) + 1
    return spec.start + np.arange(count, dtype=np.float64) * spec.velocity_ratio * base_step


def warp_table(spec: SequenceSpec, positions: np.ndarray, route_length: float) -> dict[int, int]:
    """True test -> reference alignment onto the nominal unit-velocity grid.

    Each emitted position maps to the nearest nominal-grid frame; exact
    midpoints resolve to the lower index.
    """
    nominal = sequence_positions(
        SequenceSpec(
            n_frames=spec.n_frames,
            start=spec.start,
            end=spec.end,
            velocity_ratio=1.0,
            condition=spec.condition,
            noise_seed=spec.noise_seed,
        ),
        route_length,
    )
    pairs = {}
    for j, pos in enumerate(positions):
        pairs[j] = int(np.argmin(np.abs(nominal - pos)))
    return pairs


def generate_sequence(
    world: World,
    spec: SequenceSpec,
    out_dir: str | Path,
    route_id: str = "route",
) -> tuple[SequenceManifest, dict[int, int]]:
    """Render a styled sequence to disk: PGM frames, manifest JSON, warp JSON."""
    cfg = world.config
    labels = condition_set(cfg.condition_names)
    condition = lookup_condition(spec.condition, labels)

    out_dir = Path(out_dir)
    frames_dir = out_dir / "frames"
    frames_dir.mkdir(parents=True, exist_ok=True)
    positions = sequence_positions(spec, cfg.route_length)

    frames = []
    for j, pos in enumerate(positions):
        name = f"{route_id}_{condition.name}_{j:06d}.pgm"
        base = render_frame(world, float(pos))
        styled = apply_condition(base, condition.name, frame_noise_seed(spec.noise_seed, j))
        write_image(styled, frames_dir / name)
        frames.append(
            Frame(id=j, image_path=f"frames/{name}", position=float(pos), condition=condition)
        )

    manifest = SequenceManifest(
        route_id=route_id, condition=condition, frames=frames, base_dir=out_dir
    )
    save_manifest(manifest, out_dir / f"{route_id}_{condition.name}.manifest.json")

    warp = warp_table(spec, positions, cfg.route_length)
    warp_payload = {
        "condition": condition.name,
        "pairs": {str(j): ref for j, ref in warp.items()},
        "route_id": route_id,
        "velocity_ratio": spec.velocity_ratio,
    }
    (out_dir / f"{route_id}_{condition.name}.warp.json").write_text(
        json.dumps(warp_payload, sort_keys=True, separators=(",", ":")) + "\n",
        encoding="utf-8",
    )
    return manifest, warp
