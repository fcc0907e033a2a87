"""Optimal-discriminator diagnostics on discrete toy distributions.

On a histogram toy problem the discriminator's optimum has the closed form
D*(x) = P_data(x) / (P_data(x) + P_g(x)), and the resulting generator
objective equals 2 * JSD(P_data || P_g) - 2 log 2, hitting -2 log 2 exactly
when the two distributions coincide. These checks validate the adversarial
machinery independently of image networks.
"""

from __future__ import annotations

import numpy as np

from cmal_trainer import TrainerError


def _validate(p: np.ndarray) -> np.ndarray:
    p = np.asarray(p, dtype=np.float64)
    if p.ndim != 1 or p.size == 0 or (p < 0).any():
        raise TrainerError("distribution must be a non-negative 1-D histogram")
    total = p.sum()
    if total <= 0:
        raise TrainerError("distribution must have positive mass")
    return p / total


def optimal_discriminator(p_data: np.ndarray, p_g: np.ndarray) -> np.ndarray:
    """Closed-form D* per bin; 0.5 where both distributions carry no mass."""
    p_data, p_g = _validate(p_data), _validate(p_g)
    denom = p_data + p_g
    out = np.full_like(p_data, 0.5)
    mask = denom > 0
    out[mask] = p_data[mask] / denom[mask]
    return out


def train_toy_discriminator(
    p_data: np.ndarray,
    p_g: np.ndarray,
    steps: int = 2000,
    lr: float = 0.5,
) -> np.ndarray:
    """Gradient-ascend a per-bin tabular discriminator on the GAN value.

    V(D) = sum_b p_data[b] log D[b] + p_g[b] log(1 - D[b]) is concave in the
    per-bin logits, so plain ascent converges to D*.
    """
    p_data, p_g = _validate(p_data), _validate(p_g)
    logits = np.zeros_like(p_data)
    for _ in range(steps):
        d = 1.0 / (1.0 + np.exp(-logits))
        grad = p_data * (1.0 - d) - p_g * d  # dV/dlogits
        logits += lr * grad
    return 1.0 / (1.0 + np.exp(-logits))


def generator_objective(p_data: np.ndarray, p_g: np.ndarray, d: np.ndarray) -> float:
    """E_data[log D] + E_g[log(1 - D)] under a fixed discriminator table."""
    p_data, p_g = _validate(p_data), _validate(p_g)
    d = np.clip(np.asarray(d, dtype=np.float64), 1e-12, 1.0 - 1e-12)
    return float(np.sum(p_data * np.log(d)) + np.sum(p_g * np.log(1.0 - d)))


def jensen_shannon(p: np.ndarray, q: np.ndarray) -> float:
    p, q = _validate(p), _validate(q)
    m = (p + q) / 2.0

    def kl(a, b):
        mask = a > 0
        return float(np.sum(a[mask] * np.log(a[mask] / b[mask])))

    return 0.5 * kl(p, m) + 0.5 * kl(q, m)
