"""Latent-invariance probe: same geometry under different conditions should
sit closer in latent space than different geometry."""

from __future__ import annotations

import numpy as np

from cmal_trainer import DataError
from cmal_trainer.data import RouteDataset
from cmal_trainer.latents import encode_frames
from cmal_trainer.models import ModelBundle


def top_k_retrieval(query: np.ndarray, gallery: np.ndarray, true_index: np.ndarray,
                    k: int = 5) -> float:
    """Fraction of queries whose true gallery row ranks in the k nearest."""
    hits = 0
    for i in range(query.shape[0]):
        dists = ((gallery - query[i]) ** 2).sum(axis=1)
        nearest = np.argsort(dists, kind="stable")[:k]
        hits += int(true_index[i] in nearest)
    return hits / query.shape[0]


def invariance_probe(bundle: ModelBundle, dataset: RouteDataset, k: int = 5) -> dict:
    """Cross-condition retrieval over a geometry-paired dataset.

    For every ordered condition pair (a, b), each frame's latent under a
    queries the gallery of latents under b; a hit means the same frame id is
    among the k nearest. Also reports the mean same-geometry to
    different-geometry distance ratio (lower is more invariant).
    """
    if not dataset.is_paired():
        raise DataError("invariance probe requires the same frame ids under every condition")
    n_conditions = len(dataset.condition_names)
    latents = {}
    for cond in range(n_conditions):
        idx = dataset.by_condition(cond)
        order = np.argsort(dataset.frame_ids[idx], kind="stable")
        latents[cond] = encode_frames(bundle, dataset.images[idx][order])

    rates = []
    same_dists = []
    diff_dists = []
    n_frames = next(iter(latents.values())).shape[0]
    true_index = np.arange(n_frames)
    for a in range(n_conditions):
        for b in range(n_conditions):
            if a == b:
                continue
            rates.append(top_k_retrieval(latents[a], latents[b], true_index, k))
            d = ((latents[a][:, None, :] - latents[b][None, :, :]) ** 2).sum(axis=2)
            same_dists.append(float(np.mean(np.diag(d))))
            off = d[~np.eye(n_frames, dtype=bool)]
            diff_dists.append(float(np.mean(off)))

    same = float(np.mean(same_dists))
    diff = float(np.mean(diff_dists))
    return {
        "top_k": k,
        "top_k_rate": float(np.mean(rates)),
        "same_geometry_distance": same,
        "different_geometry_distance": diff,
        "distance_ratio": same / diff if diff > 0 else float("inf"),
        "n_frames": int(n_frames),
    }
