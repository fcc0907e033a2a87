import numpy as np
import pytest

from seqlcd.errors import ImageFormatError
from seqlcd.imaging import (
    ImageBuffer,
    decode_image,
    decode_image_bytes,
    downsample,
    encode_image,
    patch_normalize,
    to_grayscale,
    write_image,
)


def gray(arr):
    return ImageBuffer(np.asarray(arr, dtype=np.uint8))


def test_decode_p5_exact():
    data = b"P5\n2 2\n255\n" + bytes([0, 255, 128, 64])
    img = decode_image_bytes(data)
    assert img.channels == 1
    assert img.pixels.tolist() == [[0, 255], [128, 64]]


def test_decode_p6_channels():
    data = b"P6\n2 1\n255\n" + bytes(range(6))
    img = decode_image_bytes(data)
    assert img.channels == 3
    assert img.pixels.shape == (1, 2, 3)


def test_decode_header_comments():
    data = b"P5\n# a comment\n2 1 # trailing\n255\n" + bytes([7, 9])
    img = decode_image_bytes(data)
    assert img.pixels.tolist() == [[7, 9]]


def test_decode_rejects_unknown_magic():
    with pytest.raises(ImageFormatError, match="magic"):
        decode_image_bytes(b"P4\n2 2\n255\n" + bytes(4))


def test_decode_rejects_maxval():
    with pytest.raises(ImageFormatError, match="maxval"):
        decode_image_bytes(b"P5\n2 2\n100\n" + bytes(4))


def test_decode_rejects_truncated_payload():
    with pytest.raises(ImageFormatError, match="truncated"):
        decode_image_bytes(b"P5\n2 2\n255\n" + bytes(3))


@pytest.mark.parametrize("channels", [1, 3])
def test_encode_decode_round_trip(tmp_path, channels):
    rng = np.random.default_rng(42)
    shape = (9, 13) if channels == 1 else (9, 13, 3)
    img = ImageBuffer(rng.integers(0, 256, size=shape, dtype=np.uint8))
    path = tmp_path / "img.pnm"
    write_image(img, path)
    back = decode_image(path)
    assert np.array_equal(back.pixels, img.pixels)
    # payload bytes are reproduced exactly
    assert encode_image(back) == encode_image(img)


def test_grayscale_identity_on_gray_input():
    img = gray([[1, 2], [3, 4]])
    assert to_grayscale(img) is img


def test_grayscale_white():
    img = ImageBuffer(np.full((1, 1, 3), 255, dtype=np.uint8))
    assert to_grayscale(img).pixels[0, 0] == 255


@pytest.mark.parametrize(
    "rgb,expected",
    [((255, 0, 0), 76), ((0, 255, 0), 150), ((0, 0, 255), 29)],
)
def test_grayscale_luma_values(rgb, expected):
    img = ImageBuffer(np.array([[rgb]], dtype=np.uint8))
    assert to_grayscale(img).pixels[0, 0] == expected


def test_downsample_identity():
    img = gray([[1, 2], [3, 4]])
    assert downsample(img, 2, 2) is img


def test_downsample_constant_blocks():
    img = gray(np.full((4, 4), 100))
    out = downsample(img, 2, 2)
    assert np.array_equal(out.pixels, np.full((2, 2), 100))


def test_downsample_checkerboard_rounds_half_up():
    board = np.zeros((2, 4), dtype=np.uint8)
    board[0, 1::2] = 255
    board[1, 0::2] = 255
    out = downsample(gray(board), 2, 1)
    assert out.pixels.tolist() == [[128, 128]]  # mean 127.5 rounds half-up


def test_downsample_non_divisible_box_means():
    src = np.arange(15, dtype=np.uint8).reshape(3, 5)
    out = downsample(gray(src), 2, 2)
    # hand-computed box means with edges floor(i*size/out)
    assert out.pixels.tolist() == [[1, 3], [8, 11]]


def test_downsample_rejects_zero_dimension():
    with pytest.raises(ImageFormatError, match="positive"):
        downsample(gray([[0]]), 0, 1)


def test_downsample_rejects_upsampling():
    with pytest.raises(ImageFormatError, match="upsample"):
        downsample(gray([[0]]), 2, 2)


def test_patch_normalize_constant_is_zero():
    out = patch_normalize(gray(np.full((8, 8), 77)), patch=4)
    assert np.array_equal(out, np.zeros((8, 8)))


def test_patch_normalize_two_pixel_patch():
    # 1x2 image, patch 2 pads by replication: mean 1, sigma 1 -> [-1, +1]
    out = patch_normalize(gray([[0, 2]]), patch=2)
    assert out.shape == (1, 2)
    np.testing.assert_allclose(out, [[-1.0, 1.0]])


def test_patch_normalize_zero_mean_per_patch():
    rng = np.random.default_rng(3)
    img = gray(rng.integers(0, 256, size=(32, 48), dtype=np.uint8))
    out = patch_normalize(img, patch=8)
    blocks = out.reshape(4, 8, 6, 8)
    assert np.abs(blocks.mean(axis=(1, 3))).max() < 1e-9


def test_patch_normalize_affine_invariance():
    rng = np.random.default_rng(4)
    base = rng.integers(0, 100, size=(16, 16)).astype(np.uint8)
    scaled = (base.astype(np.int64) * 2 + 10).astype(np.uint8)  # exact uint8 affine
    a = patch_normalize(gray(base), patch=8)
    b = patch_normalize(gray(scaled), patch=8)
    assert np.abs(a - b).max() < 1e-6


def test_patch_normalize_pad_path_matches_manual():
    rng = np.random.default_rng(5)
    img = rng.integers(0, 256, size=(10, 14), dtype=np.uint8)
    out = patch_normalize(gray(img), patch=8)
    padded = np.pad(img.astype(np.float64), ((0, 6), (0, 2)), mode="edge")
    blocks = padded.reshape(2, 8, 2, 8)
    mean = blocks.mean(axis=(1, 3), keepdims=True)
    sigma = blocks.std(axis=(1, 3), keepdims=True)
    manual = ((blocks - mean) / np.maximum(sigma, 1e-6)).reshape(16, 16)[:10, :14]
    assert out == pytest.approx(manual, abs=1e-12)


def test_patch_normalize_rejects_zero_patch():
    with pytest.raises(ImageFormatError, match="patch"):
        patch_normalize(gray([[0]]), patch=0)


def test_operations_are_deterministic():
    rng = np.random.default_rng(6)
    img = ImageBuffer(rng.integers(0, 256, size=(12, 20, 3), dtype=np.uint8))
    first = patch_normalize(downsample(to_grayscale(img), 10, 6), patch=2)
    second = patch_normalize(downsample(to_grayscale(img), 10, 6), patch=2)
    assert np.array_equal(first, second)
