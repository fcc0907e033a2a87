"""Binary PGM/PPM decoding, grayscale conversion, box downsampling, patch normalization."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from seqlcd.errors import ImageFormatError

# Rec.601 luma weights; the standard choice for grayscale conversion.
_LUMA_R, _LUMA_G, _LUMA_B = 0.299, 0.587, 0.114


@dataclass(frozen=True, eq=False)
class ImageBuffer:
    """8-bit image; ``pixels`` is (h, w) for grayscale or (h, w, 3) for RGB."""

    pixels: np.ndarray

    def __post_init__(self) -> None:
        p = self.pixels
        if p.dtype != np.uint8:
            raise ImageFormatError(f"pixels must be uint8, got {p.dtype}")
        if p.ndim == 2:
            return
        if p.ndim == 3 and p.shape[2] == 3:
            return
        raise ImageFormatError(f"pixels must be (h, w) or (h, w, 3), got shape {p.shape}")

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def channels(self) -> int:
        return 1 if self.pixels.ndim == 2 else 3


def _read_header_tokens(data: bytes, count: int, start: int) -> tuple[list[int], int]:
    """Read whitespace-separated integer tokens, skipping '#' comments."""
    tokens: list[int] = []
    i = start
    n = len(data)
    while len(tokens) < count:
        while i < n and data[i : i + 1].isspace():
            i += 1
        if i < n and data[i : i + 1] == b"#":
            while i < n and data[i : i + 1] != b"\n":
                i += 1
            continue
        j = i
        while j < n and not data[j : j + 1].isspace():
            j += 1
        if j == i:
            raise ImageFormatError("truncated header")
        try:
            tokens.append(int(data[i:j]))
        except ValueError as exc:
            raise ImageFormatError(f"bad header token {data[i:j]!r}") from exc
        i = j
    return tokens, i


def decode_image(path: str | Path) -> ImageBuffer:
    """Decode a binary PGM (P5) or PPM (P6) file with maxval 255."""
    data = Path(path).read_bytes()
    return decode_image_bytes(data)


def decode_image_bytes(data: bytes) -> ImageBuffer:
    if len(data) < 2:
        raise ImageFormatError("file too short for a PGM/PPM header")
    magic = data[:2]
    if magic == b"P5":
        channels = 1
    elif magic == b"P6":
        channels = 3
    else:
        raise ImageFormatError(f"unsupported magic {magic!r} (want P5 or P6)")
    (width, height, maxval), pos = _read_header_tokens(data, 3, 2)
    if maxval != 255:
        raise ImageFormatError(f"unsupported maxval {maxval} (want 255)")
    if width <= 0 or height <= 0:
        raise ImageFormatError(f"bad dimensions {width}x{height}")
    pos += 1  # single whitespace byte separates header from payload
    expected = width * height * channels
    payload = data[pos : pos + expected]
    if len(payload) != expected:
        raise ImageFormatError(
            f"truncated payload: expected {expected} bytes, got {len(payload)}"
        )
    arr = np.frombuffer(payload, dtype=np.uint8)
    shape = (height, width) if channels == 1 else (height, width, 3)
    return ImageBuffer(arr.reshape(shape).copy())


def encode_image(img: ImageBuffer) -> bytes:
    magic = b"P5" if img.channels == 1 else b"P6"
    header = magic + b"\n" + f"{img.width} {img.height}\n255\n".encode("ascii")
    return header + img.pixels.tobytes(order="C")


def write_image(img: ImageBuffer, path: str | Path) -> None:
    Path(path).write_bytes(encode_image(img))


def to_grayscale(img: ImageBuffer) -> ImageBuffer:
    """Rec.601 luma, rounded half-up. Grayscale input is returned unchanged."""
    if img.channels == 1:
        return img
    rgb = img.pixels.astype(np.float64)
    luma = rgb[:, :, 0] * _LUMA_R + rgb[:, :, 1] * _LUMA_G + rgb[:, :, 2] * _LUMA_B
    gray = np.clip(np.floor(luma + 0.5), 0, 255).astype(np.uint8)
    return ImageBuffer(gray)


def downsample(img: ImageBuffer, out_w: int, out_h: int) -> ImageBuffer:
    """Box-average downsampling; each output pixel is the mean of its source
    rectangle, rounded half-up."""
    if out_w <= 0 or out_h <= 0:
        raise ImageFormatError(f"output dimensions must be positive, got {out_w}x{out_h}")
    if out_w > img.width or out_h > img.height:
        raise ImageFormatError(
            f"cannot upsample: {img.width}x{img.height} -> {out_w}x{out_h}"
        )
    if out_w == img.width and out_h == img.height:
        return img
    src = img.pixels.astype(np.float64)
    h, w = img.height, img.width
    if h % out_h == 0 and w % out_w == 0:
        fy, fx = h // out_h, w // out_w
        if img.channels == 1:
            out = src.reshape(out_h, fy, out_w, fx).mean(axis=(1, 3))
        else:
            out = src.reshape(out_h, fy, out_w, fx, 3).mean(axis=(1, 3))
    else:
        out_shape = (out_h, out_w) if img.channels == 1 else (out_h, out_w, 3)
        out = np.empty(out_shape, dtype=np.float64)
        y_edges = [(i * h) // out_h for i in range(out_h + 1)]
        x_edges = [(j * w) // out_w for j in range(out_w + 1)]
        for i in range(out_h):
            y0, y1 = y_edges[i], max(y_edges[i + 1], y_edges[i] + 1)
            for j in range(out_w):
                x0, x1 = x_edges[j], max(x_edges[j + 1], x_edges[j] + 1)
                out[i, j] = src[y0:y1, x0:x1].mean(axis=(0, 1))
    return ImageBuffer(np.clip(np.floor(out + 0.5), 0, 255).astype(np.uint8))


def patch_normalize(img: ImageBuffer, patch: int = 8, epsilon: float = 1e-6) -> np.ndarray:
    """Zero-mean each patch and divide by max(population sigma, epsilon).

    When ``patch`` does not divide the image dimensions, the image is padded
    by edge replication, normalized, and cropped back. Returns float64 (h, w).
    """
    if patch <= 0:
        raise ImageFormatError(f"patch size must be positive, got {patch}")
    if img.channels != 1:
        raise ImageFormatError("patch_normalize expects a grayscale image")
    x = img.pixels.astype(np.float64)
    h, w = x.shape
    pad_h = (-h) % patch
    pad_w = (-w) % patch
    if pad_h or pad_w:
        x = np.pad(x, ((0, pad_h), (0, pad_w)), mode="edge")
    ph, pw = x.shape[0] // patch, x.shape[1] // patch
    blocks = x.reshape(ph, patch, pw, patch)
    mean = blocks.mean(axis=(1, 3), keepdims=True)
    centered = blocks - mean
    sigma = np.sqrt((centered**2).mean(axis=(1, 3), keepdims=True))
    out = centered / np.maximum(sigma, epsilon)
    return out.reshape(x.shape)[:h, :w]
