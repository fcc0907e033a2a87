"""Confusion accounting, PR / ROC / AUC computation, and report emission."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from seqlcd.errors import EvaluationError
from seqlcd.matcher import MatchCandidate
from seqlcd.model import GroundTruthAlignment


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    def precision(self) -> float:
        return self.tp / (self.tp + self.fp) if self.tp + self.fp else 1.0

    def recall(self) -> float:
        return self.tp / (self.tp + self.fn) if self.tp + self.fn else 0.0


@dataclass
class EvalReport:
    pr_points: list[tuple[float, float, float]]  # (precision, recall, threshold)
    roc_points: list[tuple[float, float, float]]  # (fpr, tpr, threshold)
    auc: float
    recall_at_full_precision: float
    params: dict = field(default_factory=dict)


def _pair_correct(test_index: int, ref_index: int, gt: GroundTruthAlignment) -> bool:
    ref_gt = gt.pairs.get(test_index)
    return ref_gt is not None and abs(ref_index - ref_gt) <= gt.d_thresh


def _is_correct(candidate: MatchCandidate, gt: GroundTruthAlignment) -> bool:
    return _pair_correct(candidate.test_index, candidate.ref_index, gt)


def confusion_counts(
    accepted: dict[int, int],
    candidates: list[MatchCandidate],
    gt: GroundTruthAlignment,
) -> ConfusionCounts:
    """Count TP/FP/FN/TN over all candidate test frames at a fixed decision.

    Accepted frames are true positives when a ground-truth pair exists and the
    estimate is within d_thresh reference frames of it, false positives
    otherwise. Rejected frames are false negatives when a ground-truth pair
    exists, true negatives otherwise.
    """
    tp = fp = fn = tn = 0
    for c in candidates:
        if c.test_index in accepted:
            if _pair_correct(c.test_index, accepted[c.test_index], gt):
                tp += 1
            else:
                fp += 1
        else:
            if c.test_index in gt.pairs:
                fn += 1
            else:
                tn += 1
    return ConfusionCounts(tp=tp, fp=fp, fn=fn, tn=tn)


def _sweep_counts(
    candidates: list[MatchCandidate], gt: GroundTruthAlignment
) -> list[tuple[float, ConfusionCounts]]:
    """Confusion counts for thresholds -inf, each distinct score, +inf (ascending)."""
    order = np.argsort([c.score for c in candidates], kind="stable")
    scores = np.array([candidates[i].score for i in order])
    correct = np.array([_is_correct(candidates[i], gt) for i in order], dtype=np.int64)
    has_gt = np.array(
        [candidates[i].test_index in gt.pairs for i in order], dtype=np.int64
    )
    n = len(candidates)
    cum_correct = np.concatenate([[0], np.cumsum(correct)])
    cum_has_gt = np.concatenate([[0], np.cumsum(has_gt)])
    total_has_gt = int(cum_has_gt[-1])

    thresholds = [float("-inf")]
    thresholds.extend(float(s) for i, s in enumerate(scores) if i == 0 or s != scores[i - 1])
    thresholds.append(float("inf"))

    out = []
    for theta in thresholds:
        k = int(np.searchsorted(scores, theta, side="left"))  # accepted: score < theta
        tp = int(cum_correct[k])
        fp = k - tp
        fn = total_has_gt - int(cum_has_gt[k])
        tn = (n - k) - fn
        out.append((theta, ConfusionCounts(tp=tp, fp=fp, fn=fn, tn=tn)))
    return out


def pr_curve(
    candidates: list[MatchCandidate], gt: GroundTruthAlignment
) -> list[tuple[float, float, float]]:
    """(precision, recall, threshold) points, ordered by ascending threshold.

    Precision is 1 at zero predictions, anchoring the curve at the theta=-inf
    sentinel. An empty candidate list yields an empty curve.
    """
    if not candidates:
        return []
    return [
        (counts.precision(), counts.recall(), theta)
        for theta, counts in _sweep_counts(candidates, gt)
    ]


def roc_auc(
    candidates: list[MatchCandidate], gt: GroundTruthAlignment
) -> tuple[list[tuple[float, float, float]], float]:
    """(fpr, tpr, threshold) points plus trapezoidal AUC.

    Raises when no candidate can ever become a true positive (degenerate
    detection problem). When no candidate can ever be a false positive, FPR is
    0 by convention at every threshold and the curve hugs the left edge.
    """
    if not candidates:
        raise EvaluationError("roc_auc requires at least one candidate")
    if not any(_is_correct(c, gt) for c in candidates):
        raise EvaluationError("degenerate candidate set: no achievable true positive")
    points = []
    for theta, c in _sweep_counts(candidates, gt):
        tpr = c.tp / (c.tp + c.fn) if c.tp + c.fn else 0.0
        fpr = c.fp / (c.fp + c.tn) if c.fp + c.tn else 0.0
        points.append((fpr, tpr, theta))
    xy = sorted([(0.0, 0.0), (1.0, 1.0)] + [(p[0], p[1]) for p in points])
    auc = 0.0
    for (x0, y0), (x1, y1) in zip(xy, xy[1:]):
        auc += (x1 - x0) * (y0 + y1) / 2.0
    return points, float(auc)


def recall_at_full_precision(pr_points: list[tuple[float, float, float]]) -> float:
    """Highest recall among points with precision == 1 (within 1e-12); 0 if none."""
    best = 0.0
    for precision, recall, _ in pr_points:
        if precision >= 1.0 - 1e-12:
            best = max(best, recall)
    return best


def build_report(
    candidates: list[MatchCandidate],
    gt: GroundTruthAlignment,
    params: dict | None = None,
) -> EvalReport:
    """Full evaluation over a candidate set.

    Degenerate inputs (no candidates, or no achievable true positive) produce
    empty curves and an AUC of 0 rather than an error, so batch runs always
    emit a report.
    """
    params = dict(params or {})
    if not candidates:
        return EvalReport([], [], 0.0, 0.0, params)
    pr = pr_curve(candidates, gt)
    try:
        roc, auc = roc_auc(candidates, gt)
    except EvaluationError:
        roc, auc = [], 0.0
    return EvalReport(
        pr_points=pr,
        roc_points=roc,
        auc=auc,
        recall_at_full_precision=recall_at_full_precision(pr),
        params=params,
    )


# --- report serialization ----------------------------------------------------


def _encode_threshold(theta: float) -> float | str:
    if theta == float("inf"):
        return "inf"
    if theta == float("-inf"):
        return "-inf"
    return theta


def _decode_threshold(raw: float | str) -> float:
    return float(raw)


def report_to_dict(report: EvalReport) -> dict:
    return {
        "auc": report.auc,
        "params": report.params,
        "pr_points": [[p, r, _encode_threshold(t)] for p, r, t in report.pr_points],
        "recall_at_full_precision": report.recall_at_full_precision,
        "roc_points": [[f, t, _encode_threshold(th)] for f, t, th in report.roc_points],
    }


def report_from_dict(raw: dict) -> EvalReport:
    return EvalReport(
        pr_points=[(p, r, _decode_threshold(t)) for p, r, t in raw["pr_points"]],
        roc_points=[(f, t, _decode_threshold(th)) for f, t, th in raw["roc_points"]],
        auc=raw["auc"],
        recall_at_full_precision=raw["recall_at_full_precision"],
        params=raw.get("params", {}),
    )


def emit_report_json(report: EvalReport, path: str | Path) -> None:
    """Canonical JSON: sorted keys, compact separators; non-finite thresholds
    are encoded as "inf"/"-inf" strings so the file stays strict JSON."""
    payload = json.dumps(report_to_dict(report), sort_keys=True, separators=(",", ":"))
    Path(path).write_text(payload + "\n", encoding="utf-8")


def load_report_json(path: str | Path) -> EvalReport:
    return report_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def emit_report_csv(report: EvalReport, path: str | Path) -> None:
    """One row per curve point: kind,threshold,x,y (pr: x=recall, y=precision;
    roc: x=fpr, y=tpr)."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("kind,threshold,x,y\n")
        for precision, recall, theta in report.pr_points:
            fh.write(f"pr,{theta!r},{recall!r},{precision!r}\n")
        for fpr, tpr, theta in report.roc_points:
            fh.write(f"roc,{theta!r},{fpr!r},{tpr!r}\n")


def _svg_panel(
    points: list[tuple[float, float]],
    origin_x: int,
    title: str,
    x_label: str,
    y_label: str,
) -> list[str]:
    size = 320
    pad = 50
    lines = [
        f'<g transform="translate({origin_x},20)">',
        f'<rect x="{pad}" y="10" width="{size}" height="{size}" fill="none" stroke="#444"/>',
        f'<text x="{pad + size / 2:.1f}" y="0" text-anchor="middle" font-size="14">{title}</text>',
    ]
    for frac in (0.0, 0.5, 1.0):
        x = pad + frac * size
        y = 10 + size - frac * size
        lines.append(
            f'<text x="{x:.1f}" y="{10 + size + 16}" text-anchor="middle" font-size="10">{frac:.1f}</text>'
        )
        lines.append(
            f'<text x="{pad - 6}" y="{y + 3:.1f}" text-anchor="end" font-size="10">{frac:.1f}</text>'
        )
    lines.append(
        f'<text x="{pad + size / 2:.1f}" y="{10 + size + 34}" text-anchor="middle" font-size="11">{x_label}</text>'
    )
    lines.append(
        f'<text x="14" y="{10 + size / 2:.1f}" text-anchor="middle" font-size="11" '
        f'transform="rotate(-90 14 {10 + size / 2:.1f})">{y_label}</text>'
    )
    if points:
        coords = " ".join(
            f"{pad + x * size:.3f},{10 + size - y * size:.3f}" for x, y in points
        )
        lines.append(
            f'<polyline points="{coords}" fill="none" stroke="#0a5" stroke-width="1.5"/>'
        )
    lines.append("</g>")
    return lines


def emit_plot(report: EvalReport, path: str | Path) -> None:
    """Standalone two-panel SVG (PR and ROC); identical reports give identical bytes."""
    pr_xy = sorted((r, p) for p, r, _ in report.pr_points)
    roc_xy = sorted((f, t) for f, t, _ in report.roc_points)
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        '<svg xmlns="http://www.w3.org/2000/svg" width="880" height="440" '
        'viewBox="0 0 880 440" font-family="monospace">',
        '<rect width="880" height="440" fill="white"/>',
    ]
    lines.extend(_svg_panel(pr_xy, 20, "Precision-Recall", "recall", "precision"))
    lines.extend(
        _svg_panel(
            roc_xy,
            460,
            f"ROC (AUC {report.auc:.4f})",
            "false positive rate",
            "true positive rate",
        )
    )
    lines.append("</svg>")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
