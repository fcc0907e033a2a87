import json

import pytest

from seqlcd.errors import ManifestError
from seqlcd.model import (
    Frame,
    SequenceManifest,
    align_ground_truth,
    condition_set,
    load_manifest,
    lookup_condition,
    manifest_from_dict,
    save_manifest,
)


def _manifest_dict(positions, condition="sunny"):
    return {
        "route_id": "r1",
        "condition": condition,
        "frames": [
            {"id": i, "file": f"frames/{i:06d}.pgm", "position": p}
            for i, p in enumerate(positions)
        ],
        "descriptor_ref": None,
    }


def test_condition_set_defaults():
    labels = condition_set()
    assert [l.name for l in labels] == ["sunny", "foggy", "rainy"]
    assert [l.index for l in labels] == [0, 1, 2]


def test_condition_set_rejects_duplicates():
    with pytest.raises(ManifestError, match="duplicate"):
        condition_set(("sunny", "sunny"))


def test_lookup_condition_unknown():
    with pytest.raises(ManifestError, match="unknown condition"):
        lookup_condition("snowy", condition_set())


def test_minimal_single_frame_manifest(tmp_path):
    path = tmp_path / "m.json"
    path.write_text(json.dumps(_manifest_dict([0.0])))
    manifest = load_manifest(path)
    assert len(manifest) == 1
    assert manifest.frames[0].position == 0.0
    assert manifest.base_dir == tmp_path


def test_non_monotone_positions_rejected():
    with pytest.raises(ManifestError, match="non-monotone position"):
        manifest_from_dict(_manifest_dict([0.0, 1.0, 3.0, 2.0]))


def test_nonconsecutive_ids_rejected():
    raw = _manifest_dict([0.0, 1.0])
    raw["frames"][1]["id"] = 5
    with pytest.raises(ManifestError, match="consecutive"):
        manifest_from_dict(raw)


def test_duplicate_ids_rejected():
    raw = _manifest_dict([0.0, 1.0])
    raw["frames"][1]["id"] = 0
    with pytest.raises(ManifestError, match="consecutive"):
        manifest_from_dict(raw)


def test_empty_frames_rejected():
    with pytest.raises(ManifestError, match="at least one frame"):
        manifest_from_dict(_manifest_dict([]))


def test_unknown_condition_name_rejected():
    with pytest.raises(ManifestError, match="unknown condition"):
        manifest_from_dict(_manifest_dict([0.0], condition="blizzard"))


def test_missing_key_rejected():
    raw = _manifest_dict([0.0])
    del raw["route_id"]
    with pytest.raises(ManifestError, match="route_id"):
        manifest_from_dict(raw)


def test_parse_error(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    with pytest.raises(ManifestError, match="cannot parse"):
        load_manifest(path)


def test_round_trip_identity(tmp_path):
    labels = condition_set()
    frames = [
        Frame(id=i, image_path=f"frames/{i}.pgm", position=i * 0.5, condition=labels[1])
        for i in range(7)
    ]
    manifest = SequenceManifest("r9", labels[1], frames, descriptor_ref="lat.bin")
    path = tmp_path / "m.json"
    save_manifest(manifest, path)
    loaded = load_manifest(path)
    assert loaded == manifest  # base_dir excluded from equality


def test_synthgen_round_trip_byte_identical(tmp_path, world):
    # 500-frame generator output; save -> load -> save must be byte-stable.
    from seqlcd.synthgen import SequenceSpec, generate_sequence

    manifest, _ = generate_sequence(
        world, SequenceSpec(n_frames=500, condition="foggy", noise_seed=9), tmp_path, "big"
    )
    first = tmp_path / "big_foggy.manifest.json"
    reloaded = load_manifest(first)
    assert reloaded == manifest
    second = tmp_path / "resaved.json"
    save_manifest(reloaded, second)
    assert first.read_bytes() == second.read_bytes()


def _make_manifest(positions, condition="sunny"):
    return manifest_from_dict(_manifest_dict(positions, condition))


def test_align_identity():
    manifest = _make_manifest([float(i) for i in range(10)])
    gt = align_ground_truth(manifest, manifest, d_thresh=20)
    assert gt.pairs == {i: i for i in range(10)}


def test_align_midpoint_ties_break_to_lower_id():
    ref = _make_manifest([float(i) for i in range(10)])
    test = _make_manifest([i + 0.5 for i in range(9)])
    gt = align_ground_truth(ref, test, d_thresh=20)
    assert gt.pairs == {i: i for i in range(9)}


def test_align_beyond_tolerance_absent():
    ref = _make_manifest([float(i) for i in range(10)])  # spacing 1.0
    test = _make_manifest([0.0, 4.0, 50.0])
    gt = align_ground_truth(ref, test, d_thresh=2)  # tolerance = 2 units
    assert gt.pairs == {0: 0, 1: 4}
    assert 2 not in gt.pairs


def test_align_matches_generator_warp(dataset):
    ref = dataset["ref"]["manifest"]
    warped = dataset["warped"]["manifest"]
    gt = align_ground_truth(ref, warped, d_thresh=20)
    assert gt.pairs == dataset["warped"]["warp"]


def test_align_deterministic(dataset):
    ref = dataset["ref"]["manifest"]
    test = dataset["warped"]["manifest"]
    a = align_ground_truth(ref, test, 20)
    b = align_ground_truth(ref, test, 20)
    assert a.pairs == b.pairs


def test_align_empty_reference_rejected():
    test = _make_manifest([0.0])
    empty = SequenceManifest("r0", condition_set()[0], frames=[])
    with pytest.raises(ManifestError, match="empty reference"):
        align_ground_truth(empty, test)


def test_d_thresh_must_be_positive():
    ref = _make_manifest([0.0, 1.0])
    with pytest.raises(ManifestError, match="d_thresh"):
        align_ground_truth(ref, ref, d_thresh=0)
