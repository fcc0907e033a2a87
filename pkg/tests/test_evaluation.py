import math

import numpy as np
import pytest

from seqlcd.errors import EvaluationError
from seqlcd.evaluation import (
    ConfusionCounts,
    build_report,
    confusion_counts,
    emit_plot,
    emit_report_csv,
    emit_report_json,
    load_report_json,
    pr_curve,
    recall_at_full_precision,
    roc_auc,
)
from seqlcd.matcher import MatchCandidate, apply_threshold
from seqlcd.model import GroundTruthAlignment

from oracles import confusion_recount, curve_recount


def gt_of(pairs, d_thresh=2):
    return GroundTruthAlignment(pairs=pairs, d_thresh=d_thresh)


def cand(t, ref, score):
    return MatchCandidate(test_index=t, ref_index=ref, velocity=1.0, score=score)


def test_confusion_all_accepted_exact():
    gt = gt_of({0: 0, 1: 1, 2: 2})
    candidates = [cand(i, i, 0.1) for i in range(3)]
    counts = confusion_counts({0: 0, 1: 1, 2: 2}, candidates, gt)
    assert (counts.tp, counts.fp, counts.fn, counts.tn) == (3, 0, 0, 0)


def test_precision_recall_arithmetic():
    counts = ConfusionCounts(tp=3, fp=1, fn=2, tn=0)
    assert counts.precision() == 0.75
    assert counts.recall() == 0.6


def test_confusion_conserves_frames():
    gt = gt_of({0: 0, 2: 5})
    candidates = [cand(0, 0, 0.5), cand(1, 3, 0.2), cand(2, 9, 0.8)]
    counts = confusion_counts({0: 0, 2: 9}, candidates, gt)
    assert counts.total == 3
    # accepted without gt would be FP; accepted beyond d_thresh is FP
    assert (counts.tp, counts.fp, counts.fn, counts.tn) == (1, 1, 0, 1)


def test_confusion_matches_recount_oracle():
    rng = np.random.default_rng(31)
    gt_pairs = {t: int(rng.integers(0, 50)) for t in range(40) if rng.random() < 0.7}
    gt = gt_of(gt_pairs, d_thresh=3)
    candidates = [cand(t, int(rng.integers(0, 50)), float(rng.normal())) for t in range(40)]
    accepted = {
        c.test_index: c.ref_index for c in candidates if rng.random() < 0.5
    }
    counts = confusion_counts(accepted, candidates, gt)
    assert (counts.tp, counts.fp, counts.fn, counts.tn) == confusion_recount(
        candidates, accepted, gt_pairs, 3
    )


def test_pr_curve_perfect_scores_reach_full_recall():
    gt = gt_of({0: 0, 1: 1})
    candidates = [cand(0, 0, 0.1), cand(1, 1, 0.2), cand(5, 9, 0.9)]
    curve = pr_curve(candidates, gt)
    assert any(p == 1.0 and r == 1.0 for p, r, _ in curve)


def test_pr_curve_sentinel_convention():
    gt = gt_of({0: 0})
    curve = pr_curve([cand(0, 0, 0.5)], gt)
    assert curve[0] == (1.0, 0.0, float("-inf"))
    assert curve[-1][2] == float("inf")


def test_pr_curve_empty():
    assert pr_curve([], gt_of({})) == []


def test_pr_curve_matches_recount_oracle():
    rng = np.random.default_rng(32)
    gt_pairs = {t: int(rng.integers(0, 120)) for t in range(100) if rng.random() < 0.6}
    gt = gt_of(gt_pairs, d_thresh=4)
    candidates = [
        cand(t, int(rng.integers(0, 120)), float(rng.normal())) for t in range(100)
    ]
    for precision, recall, theta in pr_curve(candidates, gt):
        tp, fp, fn, tn = curve_recount(candidates, gt_pairs, 4, theta)
        want_p = tp / (tp + fp) if tp + fp else 1.0
        want_r = tp / (tp + fn) if tp + fn else 0.0
        assert precision == pytest.approx(want_p, abs=1e-12)
        assert recall == pytest.approx(want_r, abs=1e-12)


def test_pr_recall_monotone_in_threshold():
    rng = np.random.default_rng(33)
    gt_pairs = {t: t for t in range(50) if rng.random() < 0.5}
    gt = gt_of(gt_pairs)
    candidates = [cand(t, t if rng.random() < 0.7 else t + 10, float(rng.normal()))
                  for t in range(50)]
    recalls = [r for _, r, _ in pr_curve(candidates, gt)]
    assert recalls == sorted(recalls)


def test_roc_perfect_separation_auc_one():
    gt = gt_of({0: 0, 1: 1})
    candidates = [cand(0, 0, 0.1), cand(1, 1, 0.2), cand(7, 3, 0.9), cand(8, 4, 1.5)]
    _, auc = roc_auc(candidates, gt)
    assert auc == 1.0


def test_roc_constant_scores_auc_half():
    gt = gt_of({0: 0, 1: 1})
    candidates = [cand(0, 0, 0.5), cand(1, 1, 0.5), cand(7, 3, 0.5), cand(8, 4, 0.5)]
    _, auc = roc_auc(candidates, gt)
    assert auc == 0.5


def test_roc_random_scores_auc_near_half():
    rng = np.random.default_rng(34)
    candidates = []
    gt_pairs = {}
    for t in range(1000):
        correct = bool(rng.random() < 0.5)
        if correct:
            gt_pairs[t] = 0
            candidates.append(cand(t, 0, float(rng.random())))
        else:
            candidates.append(cand(t, 0, float(rng.random())))
    gt = gt_of(gt_pairs)
    _, auc = roc_auc(candidates, gt)
    assert 0.45 <= auc <= 0.55


def test_roc_rejects_degenerate_no_positive():
    gt = gt_of({})  # nothing can ever be a true positive
    with pytest.raises(EvaluationError, match="degenerate"):
        roc_auc([cand(0, 0, 0.5)], gt)
    with pytest.raises(EvaluationError, match="at least one"):
        roc_auc([], gt)


def test_roc_all_correct_hugs_left_edge():
    # no achievable false positive: FPR is 0 by convention, AUC 1.0
    gt = gt_of({0: 0, 1: 1})
    points, auc = roc_auc([cand(0, 0, 0.3), cand(1, 1, 0.7)], gt)
    assert all(fpr == 0.0 for fpr, _, _ in points)
    assert auc == 1.0


def test_auc_invariant_under_monotone_transform():
    rng = np.random.default_rng(35)
    gt_pairs = {t: t for t in range(60) if rng.random() < 0.5}
    gt = gt_of(gt_pairs)
    candidates = [cand(t, t if rng.random() < 0.6 else t + 30, float(rng.normal()))
                  for t in range(60)]
    _, auc = roc_auc(candidates, gt)
    transformed = [
        MatchCandidate(c.test_index, c.ref_index, c.velocity, math.exp(c.score) * 2 + 1)
        for c in candidates
    ]
    _, auc_t = roc_auc(transformed, gt)
    assert auc_t == pytest.approx(auc, abs=1e-12)


def test_recall_at_full_precision_picks_best():
    points = [(1.0, 0.0, float("-inf")), (1.0, 0.65, 0.3), (0.9, 0.8, 0.7)]
    assert recall_at_full_precision(points) == 0.65


def test_recall_at_full_precision_none_beyond_sentinel():
    points = [(1.0, 0.0, float("-inf")), (0.5, 0.5, 0.1)]
    assert recall_at_full_precision(points) == 0.0


def test_report_json_round_trip(tmp_path):
    gt = gt_of({0: 0, 1: 1})
    candidates = [cand(0, 0, 0.25), cand(1, 4, 0.75)]
    report = build_report(candidates, gt, params={"d_thresh": 2, "descriptor": "sad"})
    path = tmp_path / "report.json"
    emit_report_json(report, path)
    assert load_report_json(path) == report


def test_identical_reports_identical_bytes(tmp_path):
    gt = gt_of({0: 0})
    report = build_report([cand(0, 0, 0.5)], gt, params={"x": 1})
    emit_report_json(report, tmp_path / "a.json")
    emit_report_json(report, tmp_path / "b.json")
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
    emit_plot(report, tmp_path / "a.svg")
    emit_plot(report, tmp_path / "b.svg")
    assert (tmp_path / "a.svg").read_bytes() == (tmp_path / "b.svg").read_bytes()


def test_report_csv_row_count(tmp_path):
    gt = gt_of({0: 0, 1: 1})
    candidates = [cand(0, 0, 0.25), cand(1, 1, 0.75)]
    report = build_report(candidates, gt)
    path = tmp_path / "report.csv"
    emit_report_csv(report, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "kind,threshold,x,y"
    assert len(lines) == 1 + len(report.pr_points) + len(report.roc_points)


def test_build_report_empty_candidates():
    report = build_report([], gt_of({0: 0}))
    assert report.pr_points == [] and report.roc_points == []
    assert report.auc == 0.0 and report.recall_at_full_precision == 0.0


def test_build_report_no_positive_falls_back():
    report = build_report([cand(0, 5, 0.3)], gt_of({}))
    assert report.roc_points == [] and report.auc == 0.0
    assert report.pr_points  # PR curve still defined


def test_threshold_sweep_consistent_with_apply_threshold():
    rng = np.random.default_rng(36)
    gt_pairs = {t: t for t in range(30)}
    gt = gt_of(gt_pairs)
    candidates = [cand(t, t, float(rng.normal())) for t in range(30)]
    for _, _, theta in pr_curve(candidates, gt):
        if not math.isfinite(theta):
            continue
        accepted = apply_threshold(candidates, theta)
        counts = confusion_counts(accepted, candidates, gt)
        tp, fp, fn, tn = curve_recount(candidates, gt_pairs, gt.d_thresh, theta)
        assert (counts.tp, counts.fp, counts.fn, counts.tn) == (tp, fp, fn, tn)
