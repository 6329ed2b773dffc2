"""Gated recurrent classifier over cropped observation sequences.

Single LSTM layer (hidden size 100 by default) followed by a 3-unit
logistic output, one unit per persona. Written directly in numpy: forward,
backpropagation through time, gradient clipping, and plain per-sequence
stochastic gradient descent. Loss is the sum of three independent binary
cross-entropies, which is what makes multilabel targets work.

Gate layout inside the stacked weight matrices is [input, forget, cell,
output], each block of ``hidden`` rows.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..errors import DivergenceError, EmptySequenceError
from ..labeling import LabelSet
from ..trace import CROP_FEATURES, CroppedSequence

MODEL_FORMAT_VERSION = 1
OUTPUT_UNITS = 3
PARAM_NAMES = ("Wx", "Wh", "b", "Wy", "by")


@dataclass(frozen=True)
class LstmConfig:
    hidden_size: int = 100
    input_size: int = CROP_FEATURES  # 3*3*13 window channels + hp scalar
    epochs: int = 200
    learning_rate: float = 0.001
    clip_norm: float = 5.0
    seed: int = 0
    replicas: int = 3


def _sigmoid(z: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-z))


def init_params(config: LstmConfig, rng: np.random.Generator) -> dict[str, np.ndarray]:
    """Uniform init scaled by 1/sqrt(fan-in); biases start at zero."""
    h, d = config.hidden_size, config.input_size

    def uniform(rows: int, cols: int) -> np.ndarray:
        scale = 1.0 / np.sqrt(cols)
        return rng.uniform(-scale, scale, size=(rows, cols))

    return {
        "Wx": uniform(4 * h, d),
        "Wh": uniform(4 * h, h),
        "b": np.zeros(4 * h),
        "Wy": uniform(OUTPUT_UNITS, h),
        "by": np.zeros(OUTPUT_UNITS),
    }


def zero_params(config: LstmConfig) -> dict[str, np.ndarray]:
    h, d = config.hidden_size, config.input_size
    return {
        "Wx": np.zeros((4 * h, d)),
        "Wh": np.zeros((4 * h, h)),
        "b": np.zeros(4 * h),
        "Wy": np.zeros((OUTPUT_UNITS, h)),
        "by": np.zeros(OUTPUT_UNITS),
    }


@dataclass
class LstmModel:
    params: dict[str, np.ndarray]
    config: LstmConfig
    seed: int = 0
    final_loss: float = float("nan")

    def forward(self, features: np.ndarray) -> np.ndarray:
        """Probabilities (3,) for a (turns, input_size) feature matrix."""
        probs, _ = _forward_cached(self.params, self.config.hidden_size, features)
        return probs

    def forward_sequence(self, sequence: CroppedSequence) -> np.ndarray:
        return self.forward(sequence.features())

    def predict_labels(self, sequence: CroppedSequence) -> LabelSet:
        return LabelSet.from_flags(self.forward_sequence(sequence) > 0.5)


def lstm_forward(model: LstmModel, sequence: CroppedSequence) -> np.ndarray:
    return model.forward_sequence(sequence)


def _forward_cached(
    params: dict[str, np.ndarray], hidden: int, features: np.ndarray
) -> tuple[np.ndarray, dict]:
    if features.shape[0] == 0:
        raise EmptySequenceError("cannot run the recurrence over zero steps")
    T = features.shape[0]
    Wx, Wh, b, Wy, by = (params[k] for k in PARAM_NAMES)
    h_prev = np.zeros(hidden)
    c_prev = np.zeros(hidden)
    cache = {"x": features, "i": [], "f": [], "g": [], "o": [], "c": [], "h": [],
             "c_prev": [], "h_prev": []}
    for t in range(T):
        z = Wx @ features[t] + Wh @ h_prev + b
        i = _sigmoid(z[:hidden])
        f = _sigmoid(z[hidden : 2 * hidden])
        g = np.tanh(z[2 * hidden : 3 * hidden])
        o = _sigmoid(z[3 * hidden :])
        c = f * c_prev + i * g
        h = o * np.tanh(c)
        for key, val in (("i", i), ("f", f), ("g", g), ("o", o), ("c", c), ("h", h),
                         ("c_prev", c_prev), ("h_prev", h_prev)):
            cache[key].append(val)
        h_prev, c_prev = h, c
    logits = Wy @ h_prev + by
    probs = _sigmoid(logits)
    cache["probs"] = probs
    return probs, cache


def bce_loss(probs: np.ndarray, targets: np.ndarray) -> float:
    eps = 1e-12
    p = np.clip(probs, eps, 1.0 - eps)
    return float(-np.sum(targets * np.log(p) + (1 - targets) * np.log(1 - p)))


def loss_and_grads(
    params: dict[str, np.ndarray],
    hidden: int,
    features: np.ndarray,
    targets: np.ndarray,
) -> tuple[float, dict[str, np.ndarray]]:
    """Sum-of-BCE loss and exact gradients via backprop through time."""
    probs, cache = _forward_cached(params, hidden, features)
    loss = bce_loss(probs, targets)

    Wh, Wy = params["Wh"], params["Wy"]
    T = features.shape[0]
    grads = {name: np.zeros_like(params[name]) for name in PARAM_NAMES}

    du = probs - targets  # d loss / d logits for sigmoid + BCE
    grads["Wy"] = np.outer(du, cache["h"][T - 1])
    grads["by"] = du

    dh = Wy.T @ du
    dc = np.zeros(hidden)
    for t in range(T - 1, -1, -1):
        i, f, g, o = (cache[k][t] for k in ("i", "f", "g", "o"))
        c, c_prev, h_prev = cache["c"][t], cache["c_prev"][t], cache["h_prev"][t]
        tanh_c = np.tanh(c)
        do = dh * tanh_c
        dc = dc + dh * o * (1 - tanh_c**2)
        di = dc * g
        df = dc * c_prev
        dg = dc * i
        dz = np.concatenate(
            [di * i * (1 - i), df * f * (1 - f), dg * (1 - g**2), do * o * (1 - o)]
        )
        grads["Wx"] += np.outer(dz, cache["x"][t])
        grads["Wh"] += np.outer(dz, h_prev)
        grads["b"] += dz
        dh = Wh.T @ dz
        dc = dc * f
    return loss, grads


def clip_gradients(grads: dict[str, np.ndarray], max_norm: float) -> None:
    total = np.sqrt(sum(float(np.sum(g**2)) for g in grads.values()))
    if total > max_norm:
        scale = max_norm / total
        for g in grads.values():
            g *= scale


def train_single_lstm(
    features: Sequence[np.ndarray],
    targets: Sequence[np.ndarray],
    config: LstmConfig,
    seed: int,
) -> LstmModel:
    rng = np.random.default_rng(seed)
    params = init_params(config, rng)
    order = np.arange(len(features))
    lr = config.learning_rate
    epoch_loss = float("nan")
    for epoch in range(config.epochs):
        rng.shuffle(order)
        total = 0.0
        for idx in order:
            loss, grads = loss_and_grads(params, config.hidden_size, features[idx], targets[idx])
            if not np.isfinite(loss):
                raise DivergenceError(seed, epoch)
            clip_gradients(grads, config.clip_norm)
            for name in PARAM_NAMES:
                params[name] -= lr * grads[name]
            total += loss
        epoch_loss = total / max(1, len(features))
        if not np.isfinite(epoch_loss):
            raise DivergenceError(seed, epoch)
    return LstmModel(params=params, config=config, seed=seed, final_loss=epoch_loss)


def train_lstm(
    sequences: Sequence[CroppedSequence],
    label_sets: Sequence[LabelSet],
    config: LstmConfig = LstmConfig(),
) -> list[LstmModel]:
    """Train ``config.replicas`` models on consecutive seeds."""
    if len(sequences) != len(label_sets):
        raise ValueError("sequences and labels differ in length")
    features = [seq.features() for seq in sequences]
    targets = [np.array(labels.flags(), dtype=float) for labels in label_sets]
    return [
        train_single_lstm(features, targets, config, config.seed + r)
        for r in range(config.replicas)
    ]


# -- persistence -----------------------------------------------------------------


def save_lstm(model: LstmModel, path) -> None:
    payload = {
        "format": "lstm",
        "version": MODEL_FORMAT_VERSION,
        "config": {
            "hidden_size": model.config.hidden_size,
            "input_size": model.config.input_size,
            "epochs": model.config.epochs,
            "learning_rate": model.config.learning_rate,
            "clip_norm": model.config.clip_norm,
            "seed": model.config.seed,
            "replicas": model.config.replicas,
        },
        "seed": model.seed,
        "final_loss": model.final_loss,
        "params": {name: model.params[name].tolist() for name in PARAM_NAMES},
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)


def load_lstm(path) -> LstmModel:
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    if payload.get("format") != "lstm":
        raise ValueError("not an lstm model file")
    return LstmModel(
        params={name: np.array(payload["params"][name]) for name in PARAM_NAMES},
        config=LstmConfig(**payload["config"]),
        seed=payload["seed"],
        final_loss=payload["final_loss"],
    )
