"""Toy Gaussian encoder and its listwise distillation trainer."""

from .data import FeatureTable, TrainingData, read_features, read_teacher_scores
from .encoder import EncoderParams, encode, encode_batch, softplus, softplus_grad
from .gradcheck import GradientCheckResult, check_gradients, run_gradient_check
from .loss import distill_loss, distill_loss_and_grad, ranks_from_scores
from .trainer import (
    Candidate,
    CandidatePool,
    Trainer,
    TrainingInstance,
    TrainingResult,
    learning_rate,
    refresh_hard_negatives,
    train_step,
)

__all__ = [
    "EncoderParams",
    "encode",
    "encode_batch",
    "softplus",
    "softplus_grad",
    "distill_loss",
    "distill_loss_and_grad",
    "ranks_from_scores",
    "Candidate",
    "CandidatePool",
    "TrainingInstance",
    "TrainingResult",
    "Trainer",
    "learning_rate",
    "train_step",
    "refresh_hard_negatives",
    "FeatureTable",
    "TrainingData",
    "read_features",
    "read_teacher_scores",
    "GradientCheckResult",
    "check_gradients",
    "run_gradient_check",
]
