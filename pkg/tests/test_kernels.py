"""Backend equivalence: the numba kernels and the pure-numpy fallbacks must
agree, and chunked invocation must be byte-identical to a single call."""

import numpy as np
import pytest

from seqlcd import _kernels as K

_BACKENDS = [("numpy", "numpy")]
if K._have_numba:
    _BACKENDS.append(("numba", "numba"))


def _offsets(velocities, d_s):
    return np.array(
        [[int(np.floor(v * t + 0.5)) for t in range(d_s + 1)] for v in velocities],
        dtype=np.int64,
    )


@pytest.fixture(scope="module")
def data():
    rng = np.random.default_rng(99)
    return {
        "ref": rng.uniform(0, 100, size=(41, 64)),
        "test": rng.uniform(0, 100, size=(37, 64)),
        "d": rng.uniform(0, 60, size=(50, 33)),
        "dhat": rng.normal(size=(30, 30)),
    }


@pytest.mark.skipif(not K._have_numba, reason="numba unavailable")
def test_pairwise_backends_agree(data):
    for fn_np, fn_nb in (
        (K.pairwise_sad_numpy, K.pairwise_sad_numba),
        (K.pairwise_euclid_sq_numpy, K.pairwise_euclid_sq_numba),
    ):
        a = np.empty((41, 37))
        b = np.empty((41, 37))
        fn_np(data["ref"], data["test"], a, 0, 41)
        fn_nb(data["ref"], data["test"], b, 0, 41)
        np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-9)


@pytest.mark.skipif(not K._have_numba, reason="numba unavailable")
def test_enhance_backends_bit_identical(data):
    a = np.empty_like(data["d"])
    b = np.empty_like(data["d"])
    K.enhance_columns_numpy(data["d"], 10, 1e-6, a, 0, 33)
    K.enhance_columns_numba(data["d"], 10, 1e-6, b, 0, 33)
    assert np.array_equal(a, b)


@pytest.mark.skipif(not K._have_numba, reason="numba unavailable")
def test_best_routes_backends_bit_identical(data):
    offsets = _offsets([0.8, 0.9, 1.0, 1.1], 5)
    outs = []
    for fn in (K.best_routes_numpy, K.best_routes_numba):
        score = np.full(30, np.inf)
        s = np.zeros(30, np.int64)
        v = np.zeros(30, np.int64)
        fn(data["dhat"], offsets, 5, 5, 30, score, s, v)
        outs.append((score[5:], s[5:], v[5:]))
    assert np.array_equal(outs[0][0], outs[1][0])
    assert np.array_equal(outs[0][1], outs[1][1])
    assert np.array_equal(outs[0][2], outs[1][2])


def test_pairwise_chunked_matches_single(data):
    single = np.empty((41, 37))
    K.pairwise_sad(data["ref"], data["test"], single, 0, 41)
    chunked = np.empty((41, 37))
    for r0, r1 in ((0, 7), (7, 26), (26, 41)):
        K.pairwise_sad(data["ref"], data["test"], chunked, r0, r1)
    assert np.array_equal(single, chunked)


def test_enhance_chunked_matches_single(data):
    single = np.empty_like(data["d"])
    K.enhance_columns(data["d"], 8, 1e-6, single, 0, 33)
    chunked = np.empty_like(data["d"])
    for c0, c1 in ((0, 5), (5, 20), (20, 33)):
        K.enhance_columns(data["d"], 8, 1e-6, chunked, c0, c1)
    assert np.array_equal(single, chunked)


def test_best_routes_chunked_matches_single(data):
    offsets = _offsets([0.8, 0.9, 1.0, 1.1], 5)
    score1 = np.full(30, np.inf)
    s1 = np.zeros(30, np.int64)
    v1 = np.zeros(30, np.int64)
    K.best_routes(data["dhat"], offsets, 5, 5, 30, score1, s1, v1)
    score2 = np.full(30, np.inf)
    s2 = np.zeros(30, np.int64)
    v2 = np.zeros(30, np.int64)
    for t0, t1 in ((5, 9), (9, 22), (22, 30)):
        K.best_routes(data["dhat"], offsets, 5, t0, t1, score2, s2, v2)
    assert np.array_equal(score1, score2)
    assert np.array_equal(s1, s2)
    assert np.array_equal(v1, v2)


def test_backend_flag_resolution():
    assert K.BACKEND in ("numba", "numpy")
    assert callable(K.pairwise_sad)
