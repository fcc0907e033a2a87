"""Value functions and losses for the adversarial feature learner."""

from __future__ import annotations

from dataclasses import dataclass, field

import torch

LOG_CLAMP = 1e-7  # guards log() against saturated discriminator outputs


def _safe_log(p: torch.Tensor) -> torch.Tensor:
    return torch.log(p.clamp(LOG_CLAMP, 1.0 - LOG_CLAMP))


@dataclass
class LossTerms:
    v_branch: list[torch.Tensor] = field(default_factory=list)
    l_recon: torch.Tensor | None = None
    l_class: torch.Tensor | None = None


def branch_value(
    discriminator,
    decoder,
    encoder,
    x: torch.Tensor,
    c: torch.Tensor,
    z: torch.Tensor,
) -> torch.Tensor:
    """Per-branch value: E[log D(x|c)] + E[log(1 - D(De(z|c)|c))]
    + E[log(1 - D(De(En(x|c)|c)|c))], averaged over the batch.

    ``z`` is drawn from the standard normal prior. The discriminator ascends
    this value; encoder and decoder descend it.
    """
    e_real = _safe_log(discriminator(x, c)).mean()
    e_generate = _safe_log(1.0 - discriminator(decoder(z, c), c)).mean()
    reconstructed = decoder(encoder(x, c), c)
    e_reconstructed = _safe_log(1.0 - discriminator(reconstructed, c)).mean()
    return e_real + e_generate + e_reconstructed


def reconstruction_loss(encoder, decoder, x: torch.Tensor, c: torch.Tensor) -> torch.Tensor:
    """Mean squared error between the input and its encode-decode round trip."""
    reconstructed = decoder(encoder(x, c), c)
    return torch.mean((x - reconstructed) ** 2)


def classification_loss(classifier, x: torch.Tensor, labels: torch.Tensor) -> torch.Tensor:
    """Cross-entropy of the classifier's simplex output against true labels."""
    probs = classifier(x)
    return torch.nn.functional.nll_loss(_safe_log(probs), labels)


def classification_accuracy(classifier, x: torch.Tensor, labels: torch.Tensor) -> float:
    with torch.no_grad():
        return float((classifier(x).argmax(dim=1) == labels).double().mean())


def joint_objective(
    terms: LossTerms,
    w_adversarial: float = 1.0,
    w_recon: float = 1.0,
    w_class: float = 1.0,
) -> torch.Tensor:
    """Weighted joint value: sum of branch values plus reconstruction plus
    classifier cross-entropy. Unit weights give the plain unweighted sum."""
    total = torch.zeros((), dtype=torch.get_default_dtype())
    for v in terms.v_branch:
        total = total + w_adversarial * v
    if terms.l_recon is not None:
        total = total + w_recon * terms.l_recon
    if terms.l_class is not None:
        total = total + w_class * terms.l_class
    return total
