"""Generator/discriminator topologies, baselines and their training loops."""
from .checkpoint import load_checkpoint, load_records, save_checkpoint, to_records
from .models import (
    EQUALIZER_KINDS,
    Discriminator,
    GeneratorCNN,
    GeneratorLinear,
    LMSEqualizer,
    Model,
    NoEqualizer,
    Volterra,
    build_discriminator,
    build_equalizer,
    build_g_cnn,
    build_g_lin,
    lms_step,
    volterra_feature_count,
    volterra_features,
    volterra_forward,
)
from .training import (
    GanTrainer,
    HwaState,
    IdleTrainer,
    LmsTrainer,
    NonFiniteLoss,
    SupervisedTrainer,
    TrainSchedule,
    blur_variance,
    gan_train_iteration,
    hwa_penalty,
    supervised_train_iteration,
)

__all__ = [
    "EQUALIZER_KINDS", "build_discriminator", "build_equalizer", "build_g_cnn", "build_g_lin",
    "load_checkpoint", "load_records", "save_checkpoint", "to_records",
    "Discriminator", "GeneratorCNN", "GeneratorLinear", "LMSEqualizer", "Model", "NoEqualizer", "Volterra",
    "lms_step", "volterra_feature_count", "volterra_features", "volterra_forward",
    "GanTrainer", "HwaState", "IdleTrainer", "LmsTrainer", "NonFiniteLoss", "SupervisedTrainer",
    "TrainSchedule", "blur_variance", "gan_train_iteration", "hwa_penalty", "supervised_train_iteration",
]
