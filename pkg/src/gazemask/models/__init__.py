"""Autoencoder, classifier and Deep-Q networks, their schedules and checkpoints."""

from gazemask.models.architectures import (
    ACTION_SIZE,
    BOTTLENECK_SIZE,
    IMAGE_RESOLUTION,
    ArchitectureSpec,
    AutoencoderModel,
    ClassifierModel,
    DqlModel,
    LayerSpec,
    ShapeError,
    build_layer,
    build_model,
    bottleneck_size,
    build_module,
    classifier_spec,
    count_parameters,
    decoder_spec,
    dql_spec,
    encoder_spec,
    images_to_tensor,
    spec_parameter_count,
    tensor_to_images,
)
from gazemask.models.checkpoint import (
    CheckpointError,
    Container,
    load_container,
    load_model,
    parameter_hash,
    save_container,
    save_model,
)
from gazemask.models.optim import MomentumSGD, sgd_step
from gazemask.models.schedule import (
    AUTOENCODER_SCHEDULE,
    CLASSIFIER_SCHEDULE,
    DQL_SCHEDULE,
    TRANSFER_SCHEDULE,
    TrainingSchedule,
)
from gazemask.models.training import (
    InsufficientData,
    MissingClass,
    TrainingTrace,
    accuracy,
    classify,
    decode,
    encode,
    q_forward,
    reconstruct,
    train_autoencoder,
    train_classifier,
    true_class_probs,
)

__all__ = [
    "ACTION_SIZE",
    "AUTOENCODER_SCHEDULE",
    "BOTTLENECK_SIZE",
    "CLASSIFIER_SCHEDULE",
    "DQL_SCHEDULE",
    "IMAGE_RESOLUTION",
    "TRANSFER_SCHEDULE",
    "ArchitectureSpec",
    "AutoencoderModel",
    "CheckpointError",
    "ClassifierModel",
    "Container",
    "DqlModel",
    "InsufficientData",
    "LayerSpec",
    "MissingClass",
    "MomentumSGD",
    "ShapeError",
    "TrainingSchedule",
    "TrainingTrace",
    "accuracy",
    "build_layer",
    "build_model",
    "bottleneck_size",
    "build_module",
    "classifier_spec",
    "classify",
    "count_parameters",
    "decode",
    "decoder_spec",
    "dql_spec",
    "encode",
    "encoder_spec",
    "images_to_tensor",
    "load_container",
    "load_model",
    "parameter_hash",
    "q_forward",
    "reconstruct",
    "save_container",
    "save_model",
    "sgd_step",
    "spec_parameter_count",
    "tensor_to_images",
    "train_autoencoder",
    "train_classifier",
    "true_class_probs",
]
