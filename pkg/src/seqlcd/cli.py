"""Command-line driver: synth, describe, diff, match, eval, run."""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from seqlcd.descriptor import (
    DescriptorKind,
    DescriptorSet,
    SadConfig,
    read_latents,
    sad_descriptor_set,
    write_latents,
)
from seqlcd.diffmatrix import (
    EnhanceConfig,
    Metric,
    compute_difference_matrix,
    enhance_local,
    read_matrix_binary,
    write_matrix_binary,
    write_matrix_csv,
)
from seqlcd.errors import ConfigError, SeqLcdError
from seqlcd.evaluation import (
    build_report,
    confusion_counts,
    emit_plot,
    emit_report_csv,
    emit_report_json,
)
from seqlcd.matcher import (
    MatcherParams,
    apply_threshold,
    read_candidates_csv,
    search_matches,
    write_candidates_csv,
)
from seqlcd.model import (
    DEFAULT_CONDITION_NAMES,
    DEFAULT_D_THRESH,
    align_ground_truth,
    load_manifest,
)
from seqlcd.synthgen import SequenceSpec, WorldConfig, generate_sequence, generate_world


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")
    return raw


def _get(cfg: dict, path: str, default=None):
    cur = cfg
    parts = path.split(".")
    for part in parts:
        if not isinstance(cur, dict) or part not in cur:
            return default
        cur = cur[part]
    return cur


def _require(cfg: dict, path: str):
    sentinel = object()
    value = _get(cfg, path, sentinel)
    if value is sentinel:
        raise ConfigError(f"{path}: missing required field")
    return value


def _typed(cfg: dict, path: str, kind, default):
    value = _get(cfg, path, default)
    if value is None:
        return None
    try:
        return kind(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: expected {kind.__name__}, got {value!r}") from exc


class _StageTimer:
    def __init__(self) -> None:
        self.stages: dict[str, float] = {}
        self._t0 = time.perf_counter()

    def mark(self, name: str) -> None:
        now = time.perf_counter()
        self.stages[name] = now - self._t0
        self._t0 = now

    def total(self) -> float:
        return sum(self.stages.values())


# --- synth -------------------------------------------------------------------


def cmd_synth(args: argparse.Namespace) -> int:
    cfg = _load_config(args.config)
    if args.seed is not None:
        cfg.setdefault("world", {})["seed"] = args.seed
    world_cfg = WorldConfig(
        seed=int(_require(cfg, "world.seed")),
        n_landmarks=_typed(cfg, "world.n_landmarks", int, 160),
        width=_typed(cfg, "world.width", int, 256),
        height=_typed(cfg, "world.height", int, 128),
        route_length=_typed(cfg, "world.route_length", float, 100.0),
        condition_names=tuple(_get(cfg, "world.conditions", list(DEFAULT_CONDITION_NAMES))),
    )
    sequences = _get(cfg, "sequences")
    if not isinstance(sequences, list) or not sequences:
        raise ConfigError("sequences: expected a non-empty list")
    route_id = str(_get(cfg, "route_id", "route"))
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    world = generate_world(world_cfg)
    for i, entry in enumerate(sequences):
        if not isinstance(entry, dict):
            raise ConfigError(f"sequences[{i}]: expected an object")
        if "noise_seed" not in entry:
            raise ConfigError(f"sequences[{i}].noise_seed: missing required field")
        if "condition" not in entry:
            raise ConfigError(f"sequences[{i}].condition: missing required field")
        if "n_frames" not in entry:
            raise ConfigError(f"sequences[{i}].n_frames: missing required field")
        spec = SequenceSpec(
            n_frames=int(entry["n_frames"]),
            start=float(entry.get("start", 0.0)),
            end=float(entry["end"]) if entry.get("end") is not None else None,
            velocity_ratio=float(entry.get("velocity_ratio", 1.0)),
            condition=str(entry["condition"]),
            noise_seed=int(entry["noise_seed"]),
        )
        manifest, _ = generate_sequence(world, spec, out_dir, route_id)
        print(f"wrote {manifest.route_id}/{manifest.condition.name}: {len(manifest)} frames")
    return 0


# --- shared pipeline pieces --------------------------------------------------


def _sad_config(cfg: dict) -> SadConfig:
    return SadConfig(
        out_w=_typed(cfg, "sad.out_w", int, 64),
        out_h=_typed(cfg, "sad.out_h", int, 32),
        patch=_typed(cfg, "sad.patch", int, 8),
        epsilon=_typed(cfg, "sad.epsilon", float, 1e-6),
    )


def _enhance_config(cfg: dict) -> EnhanceConfig:
    return EnhanceConfig(
        window_radius=_typed(cfg, "enhance.window_radius", int, 10),
        epsilon=_typed(cfg, "enhance.epsilon", float, 1e-6),
    )


def _matcher_params(cfg: dict) -> MatcherParams:
    threshold = _get(cfg, "matcher.score_threshold")
    return MatcherParams(
        d_s=_typed(cfg, "matcher.d_s", int, 10),
        v_min=_typed(cfg, "matcher.v_min", float, 0.8),
        v_max=_typed(cfg, "matcher.v_max", float, 1.1),
        v_step=_typed(cfg, "matcher.v_step", float, 0.1),
        score_threshold=float(threshold) if threshold is not None else None,
    )


def _conditions(cfg: dict) -> tuple[str, ...]:
    return tuple(_get(cfg, "conditions", list(DEFAULT_CONDITION_NAMES)))


def _load_descriptors(
    kind: DescriptorKind,
    manifest_path: str,
    latents_path: str | None,
    sad_cfg: SadConfig,
    conditions: tuple[str, ...],
) -> tuple[DescriptorSet, object]:
    manifest = load_manifest(manifest_path, conditions)
    if kind is DescriptorKind.SAD:
        descriptors = sad_descriptor_set(manifest, sad_cfg)
    else:
        if latents_path is None:
            raise ConfigError("latents: missing required field for descriptor=latent")
        descriptors = read_latents(latents_path)
        if descriptors.count != len(manifest):
            raise SeqLcdError(
                f"latent count {descriptors.count} does not match manifest "
                f"frame count {len(manifest)} ({manifest_path})"
            )
    return descriptors, manifest


def _params_echo(
    descriptor: DescriptorKind,
    metric: Metric,
    sad_cfg: SadConfig,
    enhance_cfg: EnhanceConfig,
    matcher: MatcherParams,
    d_thresh: int,
) -> dict:
    # Thread count is deliberately excluded: reports must be byte-identical
    # across thread counts.
    return {
        "descriptor": descriptor.value,
        "metric": metric.value,
        "sad": {
            "out_w": sad_cfg.out_w,
            "out_h": sad_cfg.out_h,
            "patch": sad_cfg.patch,
            "epsilon": sad_cfg.epsilon,
        },
        "enhance": {
            "window_radius": enhance_cfg.window_radius,
            "epsilon": enhance_cfg.epsilon,
        },
        "matcher": {
            "d_s": matcher.d_s,
            "v_min": matcher.v_min,
            "v_max": matcher.v_max,
            "v_step": matcher.v_step,
            "score_threshold": matcher.score_threshold,
        },
        "d_thresh": d_thresh,
    }


def _merge_run_config(args: argparse.Namespace) -> dict:
    cfg = _load_config(args.config)
    overrides = {
        "ref": args.ref,
        "test": args.test,
        "descriptor": args.descriptor,
        "latents_ref": args.latents_ref,
        "latents_test": args.latents_test,
        "out": args.out,
        "threads": args.threads,
        "metric": getattr(args, "metric", None),
        "d_thresh": getattr(args, "d_thresh", None),
    }
    for key, value in overrides.items():
        if value is not None:
            cfg[key] = value
    return cfg


def cmd_run(args: argparse.Namespace) -> int:
    cfg = _merge_run_config(args)
    ref_path = str(_require(cfg, "ref"))
    test_path = str(_require(cfg, "test"))
    out_dir = Path(str(_require(cfg, "out")))
    descriptor = DescriptorKind(_get(cfg, "descriptor", "sad"))
    threads = _typed(cfg, "threads", int, 0)
    d_thresh = _typed(cfg, "d_thresh", int, DEFAULT_D_THRESH)
    sad_cfg = _sad_config(cfg)
    enhance_cfg = _enhance_config(cfg)
    matcher_params = _matcher_params(cfg)
    conditions = _conditions(cfg)
    metric_name = _get(cfg, "metric")
    if metric_name is not None:
        metric = Metric(metric_name)
    else:
        metric = Metric.SAD if descriptor is DescriptorKind.SAD else Metric.EUCLID_SQ

    timer = _StageTimer()
    ref_desc, ref_manifest = _load_descriptors(
        descriptor, ref_path, _get(cfg, "latents_ref"), sad_cfg, conditions
    )
    test_desc, test_manifest = _load_descriptors(
        descriptor, test_path, _get(cfg, "latents_test"), sad_cfg, conditions
    )
    timer.mark("describe")
    n_frames = ref_desc.count + test_desc.count
    describe_ms_per_frame = timer.stages["describe"] / n_frames * 1e3

    raw = compute_difference_matrix(ref_desc, test_desc, metric, threads=threads)
    timer.mark("diff")
    enhanced = enhance_local(raw, enhance_cfg, threads=threads)
    timer.mark("enhance")
    candidates = search_matches(enhanced, matcher_params, threads=threads)
    timer.mark("match")

    gt = align_ground_truth(ref_manifest, test_manifest, d_thresh)
    params = _params_echo(descriptor, metric, sad_cfg, enhance_cfg, matcher_params, d_thresh)
    params["ref_route"] = ref_manifest.route_id
    params["test_route"] = test_manifest.route_id
    params["ref_condition"] = ref_manifest.condition.name
    params["test_condition"] = test_manifest.condition.name
    report = build_report(candidates, gt, params)
    timer.mark("eval")

    out_dir.mkdir(parents=True, exist_ok=True)
    write_candidates_csv(candidates, out_dir / "candidates.csv")
    emit_report_json(report, out_dir / "report.json")
    emit_report_csv(report, out_dir / "report.csv")
    emit_plot(report, out_dir / "plot.svg")
    if _get(cfg, "dump_matrices", False):
        write_matrix_binary(raw, out_dir / "difference_raw.bin")
        write_matrix_csv(raw, out_dir / "difference_raw.csv")
        write_matrix_binary(enhanced, out_dir / "difference_enhanced.bin")
    timings = dict(timer.stages)
    timings["describe_ms_per_frame"] = describe_ms_per_frame
    timings["total_s"] = timer.total()
    (out_dir / "timings.json").write_text(
        json.dumps(timings, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )

    if matcher_params.score_threshold is not None:
        accepted = apply_threshold(candidates, matcher_params.score_threshold)
        counts = confusion_counts(accepted, candidates, gt)
        print(
            f"threshold {matcher_params.score_threshold}: "
            f"tp={counts.tp} fp={counts.fp} fn={counts.fn} tn={counts.tn} "
            f"precision={counts.precision():.4f} recall={counts.recall():.4f}"
        )
    print(
        f"auc={report.auc:.4f} recall@100%precision={report.recall_at_full_precision:.4f} "
        f"candidates={len(candidates)}"
    )
    print(
        f"timing: describe {timer.stages['describe']:.3f}s "
        f"({describe_ms_per_frame:.2f} ms/frame), diff {timer.stages['diff']:.3f}s, "
        f"enhance {timer.stages['enhance']:.3f}s, match {timer.stages['match']:.3f}s, "
        f"eval {timer.stages['eval']:.3f}s",
        file=sys.stderr,
    )
    return 0


def cmd_describe(args: argparse.Namespace) -> int:
    cfg = _load_config(args.config)
    conditions = _conditions(cfg)
    sad_cfg = _sad_config(cfg)
    manifest = load_manifest(args.manifest, conditions)
    t0 = time.perf_counter()
    descriptors = sad_descriptor_set(manifest, sad_cfg)
    elapsed = time.perf_counter() - t0
    write_latents(descriptors, args.out)
    print(
        f"wrote {descriptors.count} x {descriptors.dim} descriptors "
        f"({elapsed / descriptors.count * 1e3:.2f} ms/frame)"
    )
    return 0


def cmd_diff(args: argparse.Namespace) -> int:
    cfg = _merge_run_config(args)
    descriptor = DescriptorKind(_get(cfg, "descriptor", "sad"))
    conditions = _conditions(cfg)
    sad_cfg = _sad_config(cfg)
    threads = _typed(cfg, "threads", int, 0)
    metric_name = _get(cfg, "metric")
    if metric_name is not None:
        metric = Metric(metric_name)
    else:
        metric = Metric.SAD if descriptor is DescriptorKind.SAD else Metric.EUCLID_SQ
    ref_desc, _ = _load_descriptors(
        descriptor, str(_require(cfg, "ref")), _get(cfg, "latents_ref"), sad_cfg, conditions
    )
    test_desc, _ = _load_descriptors(
        descriptor, str(_require(cfg, "test")), _get(cfg, "latents_test"), sad_cfg, conditions
    )
    raw = compute_difference_matrix(ref_desc, test_desc, metric, threads=threads)
    enhanced = enhance_local(raw, _enhance_config(cfg), threads=threads)
    out_dir = Path(str(_require(cfg, "out")))
    out_dir.mkdir(parents=True, exist_ok=True)
    write_matrix_binary(raw, out_dir / "difference_raw.bin")
    write_matrix_csv(raw, out_dir / "difference_raw.csv")
    write_matrix_binary(enhanced, out_dir / "difference_enhanced.bin")
    print(f"wrote {raw.rows}x{raw.cols} difference matrices to {out_dir}")
    return 0


def cmd_match(args: argparse.Namespace) -> int:
    cfg = _load_config(args.config)
    params = _matcher_params(cfg)
    threads = args.threads if args.threads is not None else _typed(cfg, "threads", int, 0)
    enhanced = read_matrix_binary(args.matrix, enhanced=True)
    candidates = search_matches(enhanced, params, threads=threads)
    write_candidates_csv(candidates, args.out)
    print(f"wrote {len(candidates)} candidates to {args.out}")
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    cfg = _load_config(args.config)
    conditions = _conditions(cfg)
    d_thresh = args.d_thresh if args.d_thresh is not None else _typed(cfg, "d_thresh", int, DEFAULT_D_THRESH)
    ref_manifest = load_manifest(args.ref, conditions)
    test_manifest = load_manifest(args.test, conditions)
    candidates = read_candidates_csv(args.candidates)
    if not candidates:
        print("warning: empty candidates CSV; emitting an empty-curve report", file=sys.stderr)
    gt = align_ground_truth(ref_manifest, test_manifest, d_thresh)
    params = {
        "candidates": str(args.candidates),
        "d_thresh": d_thresh,
        "ref_route": ref_manifest.route_id,
        "test_route": test_manifest.route_id,
    }
    report = build_report(candidates, gt, params)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    emit_report_json(report, out_dir / "report.json")
    emit_report_csv(report, out_dir / "report.csv")
    emit_plot(report, out_dir / "plot.svg")
    print(
        f"auc={report.auc:.4f} recall@100%precision={report.recall_at_full_precision:.4f}"
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="seqlcd",
        description="Sequence-matching loop closure detection over multi-condition routes.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_synth = sub.add_parser("synth", help="generate a synthetic multi-condition dataset")
    p_synth.add_argument("--config", required=True, help="world + sequences JSON config")
    p_synth.add_argument("--out", required=True, help="output dataset directory")
    p_synth.add_argument("--seed", type=int, help="override world.seed")
    p_synth.set_defaults(func=cmd_synth)

    p_desc = sub.add_parser("describe", help="compute SAD descriptors for a manifest")
    p_desc.add_argument("--config", help="optional JSON config (sad.* keys)")
    p_desc.add_argument("--manifest", required=True)
    p_desc.add_argument("--out", required=True, help="output latent interchange file")
    p_desc.set_defaults(func=cmd_describe)

    def add_pair_args(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="JSON config; flags override file values")
        p.add_argument("--ref", help="reference manifest path")
        p.add_argument("--test", help="test manifest path")
        p.add_argument("--descriptor", choices=[k.value for k in DescriptorKind])
        p.add_argument("--latents-ref", dest="latents_ref")
        p.add_argument("--latents-test", dest="latents_test")
        p.add_argument("--metric", choices=[m.value for m in Metric])
        p.add_argument("--out", help="output directory")
        p.add_argument("--threads", type=int, help="worker threads (0 = auto)")

    p_diff = sub.add_parser("diff", help="compute and dump difference matrices")
    add_pair_args(p_diff)
    p_diff.set_defaults(func=cmd_diff)

    p_match = sub.add_parser("match", help="route search over a dumped enhanced matrix")
    p_match.add_argument("--config", help="optional JSON config (matcher.* keys)")
    p_match.add_argument("--matrix", required=True, help="enhanced matrix binary dump")
    p_match.add_argument("--out", required=True, help="output candidates CSV")
    p_match.add_argument("--threads", type=int)
    p_match.set_defaults(func=cmd_match)

    p_eval = sub.add_parser("eval", help="re-score precomputed candidates")
    p_eval.add_argument("--config", help="optional JSON config")
    p_eval.add_argument("--candidates", required=True, help="candidates CSV")
    p_eval.add_argument("--ref", required=True)
    p_eval.add_argument("--test", required=True)
    p_eval.add_argument("--d-thresh", dest="d_thresh", type=int)
    p_eval.add_argument("--out", required=True, help="output directory")
    p_eval.set_defaults(func=cmd_eval)

    p_run = sub.add_parser("run", help="full pipeline: describe, diff, enhance, match, eval")
    add_pair_args(p_run)
    p_run.add_argument("--d-thresh", dest="d_thresh", type=int)
    p_run.set_defaults(func=cmd_run)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SeqLcdError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
