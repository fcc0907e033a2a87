"""Condition-directed multi-domain adversarial feature learner.

Trains a classifier / encoder / decoder / discriminator quartet on weather-
labeled route imagery and exports condition-invariant latent codes through the
binary interchange format consumed by the matching engine.
"""

__version__ = "0.1.0"


class TrainerError(Exception):
    """Base class for trainer errors."""


class DataError(TrainerError):
    """Manifest or image input is malformed."""


class TrainingDiverged(TrainerError):
    """A loss became non-finite during training."""
