"""Playstyle classifiers: SMO-trained SVM and a hand-rolled LSTM."""

from .dataset import (
    EvalReport,
    LabelConfusion,
    aggregate_reports,
    evaluate,
    evaluate_predictions,
    split_dataset,
)
from .lstm import (
    LstmConfig,
    LstmModel,
    bce_loss,
    clip_gradients,
    init_params,
    load_lstm,
    loss_and_grads,
    lstm_forward,
    save_lstm,
    train_lstm,
    train_single_lstm,
    zero_params,
)
from .svm import (
    BinarySvm,
    SvmConfig,
    SvmModel,
    load_svm,
    save_svm,
    svm_predict,
    train_binary_svm,
    train_svm,
)

__all__ = [
    "BinarySvm",
    "EvalReport",
    "LabelConfusion",
    "LstmConfig",
    "LstmModel",
    "SvmConfig",
    "SvmModel",
    "aggregate_reports",
    "bce_loss",
    "clip_gradients",
    "evaluate",
    "evaluate_predictions",
    "init_params",
    "load_lstm",
    "load_svm",
    "loss_and_grads",
    "lstm_forward",
    "save_lstm",
    "save_svm",
    "split_dataset",
    "svm_predict",
    "train_binary_svm",
    "train_lstm",
    "train_single_lstm",
    "train_svm",
    "zero_params",
]
