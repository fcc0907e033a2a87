"""Alternating training of the classifier / encoder / decoder / discriminator."""

from __future__ import annotations

import json
import math
from dataclasses import asdict
from pathlib import Path

import numpy as np
import torch

from cmal_trainer import TrainingDiverged
from cmal_trainer.config import TrainConfig
from cmal_trainer.data import RouteDataset
from cmal_trainer.losses import _safe_log, classification_loss
from cmal_trainer.models import ModelBundle, build_bundle, one_hot


def _check_finite(value: torch.Tensor, what: str, epoch: int, step: int) -> None:
    if not math.isfinite(float(value)):
        raise TrainingDiverged(f"{what} became non-finite at epoch {epoch}, step {step}")


def _sample_batch(rng, pool: np.ndarray, batch_size: int) -> np.ndarray:
    return rng.choice(pool, size=min(batch_size, len(pool)), replace=False)


def train(
    config: TrainConfig,
    dataset: RouteDataset,
    out_dir: str | Path | None = None,
) -> tuple[ModelBundle, list[dict]]:
    """Run the three-way alternating update and return the trained bundle
    plus the per-epoch training log.

    Each step draws a pair of distinct conditions. The discriminator ascends
    the two branch values (real vs. noise-decode and reconstruction-decode);
    the encoder/decoder descend the non-saturating surrogate plus the
    reconstruction term and a classifier-judged condition-swap term; the
    classifier fits the true condition labels.
    """
    torch.manual_seed(config.seed)
    rng = np.random.default_rng(config.seed)
    noise = torch.Generator().manual_seed(config.seed + 1)
    device = torch.device(config.device)

    bundle = build_bundle(config)
    for module in (bundle.classifier, bundle.encoder, bundle.decoder, bundle.discriminator):
        module.to(device)

    opt_d = torch.optim.Adam(bundle.discriminator.parameters(),
                             lr=config.lr_discriminator, betas=(0.5, 0.999))
    gen_params = list(bundle.encoder.parameters()) + list(bundle.decoder.parameters())
    opt_g = torch.optim.Adam(gen_params, lr=config.lr_generator, betas=(0.5, 0.999))
    opt_c = torch.optim.Adam(bundle.classifier.parameters(), lr=config.lr_classifier)

    k = config.n_conditions
    pools = [dataset.by_condition(c) for c in range(k)]
    images = torch.from_numpy(dataset.images).to(device)
    labels = torch.from_numpy(dataset.labels).to(device)
    steps_per_epoch = max(1, len(dataset) // config.batch_size)

    out_dir = Path(out_dir) if out_dir is not None else None
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
    log: list[dict] = []

    for epoch in range(config.epochs):
        sums = {"d_loss": 0.0, "g_adv": 0.0, "recon": 0.0, "swap": 0.0,
                "class_loss": 0.0, "class_acc": 0.0}
        for step in range(steps_per_epoch):
            cond_a, cond_b = rng.choice(k, size=2, replace=False)
            batches = []
            for cond in (int(cond_a), int(cond_b)):
                idx = _sample_batch(rng, pools[cond], config.batch_size)
                x = images[idx]
                c = one_hot(torch.full((len(idx),), cond, dtype=torch.int64,
                                       device=device), k)
                batches.append((x, c, cond))

            # discriminator: ascend both branch values with the generator frozen
            d_loss = torch.zeros((), device=device)
            with torch.no_grad():
                fakes = []
                for x, c, _ in batches:
                    z = torch.randn(x.shape[0], config.latent_dim, generator=noise,
                                    device=device)
                    fakes.append((bundle.decoder(z, c),
                                  bundle.decoder(bundle.encoder(x, c), c)))
            for (x, c, _), (fake_z, fake_rec) in zip(batches, fakes):
                value = (
                    _safe_log(bundle.discriminator(x, c)).mean()
                    + _safe_log(1.0 - bundle.discriminator(fake_z, c)).mean()
                    + _safe_log(1.0 - bundle.discriminator(fake_rec, c)).mean()
                )
                d_loss = d_loss - value
            opt_d.zero_grad()
            d_loss.backward()
            opt_d.step()
            _check_finite(d_loss, "discriminator loss", epoch, step)

            # encoder/decoder: fool the discriminator, reconstruct, and land
            # condition swaps on the requested condition. The adversarial and
            # swap terms see a detached latent: they shape the decoder while
            # the encoder's code space is carved by reconstruction alone,
            # which keeps the geometry structure adversarial noise would
            # otherwise scramble.
            g_adv = torch.zeros((), device=device)
            g_recon = torch.zeros((), device=device)
            g_swap = torch.zeros((), device=device)
            for (x, c, cond), (other_x, other_c, other_cond) in (
                (batches[0], batches[1]),
                (batches[1], batches[0]),
            ):
                z = torch.randn(x.shape[0], config.latent_dim, generator=noise,
                                device=device)
                latent = bundle.encoder(x, c)
                rec = bundle.decoder(latent, c)
                g_adv = g_adv - _safe_log(bundle.discriminator(bundle.decoder(z, c), c)).mean()
                rec_frozen = bundle.decoder(latent.detach(), c)
                g_adv = g_adv - _safe_log(bundle.discriminator(rec_frozen, c)).mean()
                g_recon = g_recon + torch.mean((x - rec) ** 2)
                swapped = bundle.decoder(latent.detach(), other_c)
                target = torch.full((x.shape[0],), other_cond, dtype=torch.int64,
                                    device=device)
                probs = bundle.classifier(swapped)
                g_swap = g_swap + torch.nn.functional.nll_loss(_safe_log(probs), target)
            g_loss = (config.w_adversarial * g_adv + config.w_recon * g_recon
                      + config.w_swap * g_swap)
            opt_g.zero_grad()
            g_loss.backward()
            opt_g.step()
            _check_finite(g_loss, "generator loss", epoch, step)

            # classifier: plain supervised update on real frames
            x_all = torch.cat([batches[0][0], batches[1][0]])
            y_all = torch.cat([
                torch.full((batches[0][0].shape[0],), batches[0][2], dtype=torch.int64),
                torch.full((batches[1][0].shape[0],), batches[1][2], dtype=torch.int64),
            ]).to(device)
            c_loss = classification_loss(bundle.classifier, x_all, y_all)
            opt_c.zero_grad()
            c_loss.backward()
            opt_c.step()
            _check_finite(c_loss, "classifier loss", epoch, step)

            with torch.no_grad():
                acc = float((bundle.classifier(x_all).argmax(1) == y_all).double().mean())
            sums["d_loss"] += float(d_loss)
            sums["g_adv"] += float(g_adv)
            sums["recon"] += float(g_recon) / 2.0
            sums["swap"] += float(g_swap) / 2.0
            sums["class_loss"] += float(c_loss)
            sums["class_acc"] += acc

        record = {"epoch": epoch}
        record.update({key: value / steps_per_epoch for key, value in sums.items()})
        log.append(record)
        if out_dir is not None:
            with open(out_dir / "training_log.jsonl", "a", encoding="utf-8") as fh:
                fh.write(json.dumps(record, sort_keys=True) + "\n")
            if config.checkpoint_every and (epoch + 1) % config.checkpoint_every == 0:
                save_checkpoint(bundle, out_dir / "checkpoint.pt")

    if out_dir is not None:
        save_checkpoint(bundle, out_dir / "checkpoint.pt")
    return bundle, log


def save_checkpoint(bundle: ModelBundle, path: str | Path) -> None:
    torch.save({"config": asdict(bundle.config), "state": bundle.state_dicts()}, path)


def load_checkpoint(path: str | Path) -> ModelBundle:
    payload = torch.load(path, map_location="cpu", weights_only=False)
    raw = payload["config"]
    raw["condition_names"] = tuple(raw["condition_names"])
    bundle = build_bundle(TrainConfig(**raw))
    bundle.load_state_dicts(payload["state"])
    return bundle.eval()
