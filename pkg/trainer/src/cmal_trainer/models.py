"""The four network modules: classifier, encoder, decoder, discriminator.

Conditions enter the encoder, decoder, and discriminator as one-hot vectors,
broadcast to constant image planes where the input is spatial.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch
from torch import nn

from cmal_trainer.config import TrainConfig


def one_hot(labels: torch.Tensor, n_conditions: int) -> torch.Tensor:
    return torch.nn.functional.one_hot(labels, n_conditions).to(torch.get_default_dtype())


def _condition_planes(x: torch.Tensor, c: torch.Tensor) -> torch.Tensor:
    """Concatenate one-hot condition vectors as constant planes."""
    planes = c[:, :, None, None].expand(-1, -1, x.shape[2], x.shape[3])
    return torch.cat([x, planes], dim=1)


class ConditionClassifier(nn.Module):
    """Predicts the weather condition of a raw image; output is a K-simplex."""

    def __init__(self, image_size: int, n_conditions: int, base_channels: int = 16):
        super().__init__()
        ch = base_channels
        self.features = nn.Sequential(
            nn.Conv2d(1, ch, 4, stride=2, padding=1),
            nn.ReLU(inplace=True),
            nn.Conv2d(ch, ch * 2, 4, stride=2, padding=1),
            nn.ReLU(inplace=True),
        )
        spatial = image_size // 4
        self.head = nn.Linear(ch * 2 * spatial * spatial, n_conditions)
        self.n_conditions = n_conditions

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        h = self.features(x).flatten(1)
        return torch.softmax(self.head(h), dim=1)


class Encoder(nn.Module):
    """Extracts a latent geometry code from an image under a given condition.

    Instance normalization in the trunk discards per-sample global gain and
    offset, which carries most of the condition styling.
    """

    def __init__(self, image_size: int, n_conditions: int, latent_dim: int,
                 base_channels: int = 32):
        super().__init__()
        ch = base_channels
        self.features = nn.Sequential(
            nn.Conv2d(1 + n_conditions, ch, 4, stride=2, padding=1),
            nn.ReLU(inplace=True),
            nn.Conv2d(ch, ch * 2, 4, stride=2, padding=1),
            nn.InstanceNorm2d(ch * 2),
            nn.ReLU(inplace=True),
            nn.Conv2d(ch * 2, ch * 4, 4, stride=2, padding=1),
            nn.InstanceNorm2d(ch * 4),
            nn.ReLU(inplace=True),
        )
        spatial = image_size // 8
        self.head = nn.Linear(ch * 4 * spatial * spatial, latent_dim)
        # Affine-free normalization keeps the code space metrically stable:
        # no dimension can grow to dominate latent distances.
        self.norm = nn.LayerNorm(latent_dim, elementwise_affine=False)

    def forward(self, x: torch.Tensor, c: torch.Tensor) -> torch.Tensor:
        h = self.features(_condition_planes(x, c)).flatten(1)
        return self.norm(self.head(h))


class Decoder(nn.Module):
    """Reconstructs an image from a latent code under a given condition."""

    def __init__(self, image_size: int, n_conditions: int, latent_dim: int,
                 base_channels: int = 32):
        super().__init__()
        ch = base_channels
        self.spatial = image_size // 8
        self.stem = nn.Linear(latent_dim + n_conditions, ch * 4 * self.spatial**2)
        self.deconv = nn.Sequential(
            nn.ReLU(inplace=True),
            nn.ConvTranspose2d(ch * 4, ch * 2, 4, stride=2, padding=1),
            nn.ReLU(inplace=True),
            nn.ConvTranspose2d(ch * 2, ch, 4, stride=2, padding=1),
            nn.ReLU(inplace=True),
            nn.ConvTranspose2d(ch, 1, 4, stride=2, padding=1),
            nn.Sigmoid(),
        )
        self.channels = ch * 4

    def forward(self, z: torch.Tensor, c: torch.Tensor) -> torch.Tensor:
        h = self.stem(torch.cat([z, c], dim=1))
        h = h.view(-1, self.channels, self.spatial, self.spatial)
        return self.deconv(h)


class Discriminator(nn.Module):
    """Separates real images from synthesized ones under a given condition;
    outputs a probability in (0, 1)."""

    def __init__(self, image_size: int, n_conditions: int, base_channels: int = 32):
        super().__init__()
        ch = base_channels
        self.features = nn.Sequential(
            nn.Conv2d(1 + n_conditions, ch, 4, stride=2, padding=1),
            nn.LeakyReLU(0.2, inplace=True),
            nn.Conv2d(ch, ch * 2, 4, stride=2, padding=1),
            nn.LeakyReLU(0.2, inplace=True),
            nn.Conv2d(ch * 2, ch * 4, 4, stride=2, padding=1),
            nn.LeakyReLU(0.2, inplace=True),
        )
        spatial = image_size // 8
        self.head = nn.Linear(ch * 4 * spatial * spatial, 1)

    def forward(self, x: torch.Tensor, c: torch.Tensor) -> torch.Tensor:
        h = self.features(_condition_planes(x, c)).flatten(1)
        return torch.sigmoid(self.head(h)).squeeze(1)


@dataclass
class ModelBundle:
    classifier: ConditionClassifier
    encoder: Encoder
    decoder: Decoder
    discriminator: Discriminator
    config: TrainConfig

    def eval(self) -> "ModelBundle":
        for module in (self.classifier, self.encoder, self.decoder, self.discriminator):
            module.eval()
        return self

    def state_dicts(self) -> dict:
        return {
            "classifier": self.classifier.state_dict(),
            "encoder": self.encoder.state_dict(),
            "decoder": self.decoder.state_dict(),
            "discriminator": self.discriminator.state_dict(),
        }

    def load_state_dicts(self, state: dict) -> None:
        self.classifier.load_state_dict(state["classifier"])
        self.encoder.load_state_dict(state["encoder"])
        self.decoder.load_state_dict(state["decoder"])
        self.discriminator.load_state_dict(state["discriminator"])


def build_bundle(config: TrainConfig) -> ModelBundle:
    k = config.n_conditions
    size = config.image_size
    ch = config.base_channels
    return ModelBundle(
        classifier=ConditionClassifier(size, k, base_channels=max(ch // 2, 4)),
        encoder=Encoder(size, k, config.latent_dim, base_channels=ch),
        decoder=Decoder(size, k, config.latent_dim, base_channels=ch),
        discriminator=Discriminator(size, k, base_channels=ch),
        config=config,
    )


def classify_condition(classifier: ConditionClassifier, x: torch.Tensor) -> torch.Tensor:
    """K-simplex per sample (components sum to 1)."""
    return classifier(x)
