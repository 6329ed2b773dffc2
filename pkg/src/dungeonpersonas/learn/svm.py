"""Soft-margin SVM: active-set primal solver (linear) and SMO (kernelized).

One binary classifier per persona (one-vs-rest), linear kernel by default.

The linear path minimizes the primal objective directly: each pass solves
the equality-constrained quadratic implied by the current violator/margin
sets, takes an exact line search toward that solution, and re-optimizes the
bias exactly. Every accepted move minimizes the true objective along a
line, so the recorded per-pass objective (and its hinge term) never
increases, and the method terminates at the exact KKT point, from which the
dual multipliers and duality gap are read off.

The RBF path uses classic sequential minimal optimization with deterministic
working-pair selection. Both paths are pure functions of their inputs.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..errors import UnnormalizedInputError
from ..labeling import LabelSet
from ..trace import FeatureVector, Normalizer

MODEL_FORMAT_VERSION = 1


@dataclass(frozen=True)
class SvmConfig:
    kernel: str = "linear"  # "linear" or "rbf"
    C: float = 1.0
    gamma: float = 0.5  # rbf only
    tol: float = 1e-4  # KKT violation tolerance
    dual_gap_tol: float = 1e-6
    max_passes: int = 200
    seed: int = 0  # recorded for provenance; SMO itself is deterministic


def _kernel_matrix(X: np.ndarray, config: SvmConfig) -> np.ndarray:
    if config.kernel == "linear":
        return X @ X.T
    if config.kernel == "rbf":
        sq = np.sum(X**2, axis=1)
        d2 = sq[:, None] + sq[None, :] - 2 * (X @ X.T)
        return np.exp(-config.gamma * np.maximum(d2, 0))
    raise ValueError(f"unknown kernel {config.kernel!r}")


@dataclass
class BinarySvm:
    """One persona-vs-rest classifier with its training diagnostics."""

    weights: np.ndarray  # (features,), meaningful for the linear kernel
    bias: float
    config: SvmConfig
    degenerate: bool = False  # single-class training set -> constant output
    alphas: np.ndarray | None = None
    support_x: np.ndarray | None = None  # kept when kernelized
    support_y: np.ndarray | None = None
    hinge_history: list[float] = field(default_factory=list)
    dual_gap: float = float("nan")
    passes: int = 0

    def decision(self, x: np.ndarray) -> float:
        if self.config.kernel == "linear" or self.degenerate:
            return float(self.weights @ x + self.bias)
        d2 = np.sum((self.support_x - x) ** 2, axis=1)
        k = np.exp(-self.config.gamma * d2)
        return float(np.sum(self.alphas * self.support_y * k) + self.bias)


def _primal_objective(
    X: np.ndarray, y: np.ndarray, w: np.ndarray, b: float, C: float
) -> float:
    margins = y * (X @ w + b)
    return 0.5 * float(w @ w) + C * float(np.sum(np.maximum(0.0, 1.0 - margins)))


def _dual_objective(alphas: np.ndarray, y: np.ndarray, K: np.ndarray) -> float:
    ay = alphas * y
    return float(np.sum(alphas) - 0.5 * (ay @ K @ ay))


def _exact_line_search(
    X: np.ndarray,
    y: np.ndarray,
    C: float,
    w: np.ndarray,
    b: float,
    dw: np.ndarray,
    db: float,
) -> float:
    """argmin over t in [0, 1] of the primal objective along (w, b) + t(dw, db).

    The objective along a ray is convex piecewise-quadratic with breakpoints
    where margins cross 1; each segment is minimized in closed form.
    """
    m = y * (X @ w + b)
    dm = y * (X @ dw + db)
    points = [0.0, 1.0]
    nz = np.abs(dm) > 1e-15
    t_cross = (1.0 - m[nz]) / dm[nz]
    points.extend(t for t in t_cross if 0.0 < t < 1.0)
    points = sorted(set(points))

    ww, wd, dd = float(w @ w), float(w @ dw), float(dw @ dw)

    def value(t: float) -> float:
        active = m + t * dm < 1.0
        return (
            0.5 * (ww + 2 * t * wd + t * t * dd)
            + C * float(np.sum(1.0 - m[active] - t * dm[active]))
        )

    best_t, best_v = 0.0, value(0.0)
    for lo, hi in zip(points[:-1], points[1:]):
        mid = (lo + hi) / 2.0
        active = m + mid * dm < 1.0
        # segment objective: 0.5*dd*t^2 + (wd - C*sum(dm_active))*t + const
        lin = wd - C * float(np.sum(dm[active]))
        candidates = [lo, hi]
        if dd > 1e-15:
            vertex = -lin / dd
            if lo < vertex < hi:
                candidates.append(vertex)
        for t in candidates:
            v = value(t)
            if v < best_v - 1e-15:
                best_t, best_v = t, v
    return best_t


def _optimal_bias(X: np.ndarray, y: np.ndarray, C: float, w: np.ndarray) -> float:
    """Exact 1-D minimizer of the objective in b (piecewise linear there).

    margin_i(b) = y_i (w.x_i + b) crosses 1 at b = y_i - w.x_i; with both
    classes present the minimum is attained at one of those breakpoints.
    """
    f = X @ w
    breakpoints = sorted(set(float(v) for v in (y - f)))
    best_b, best_v = breakpoints[0], None
    for b in breakpoints:
        v = C * float(np.sum(np.maximum(0.0, 1.0 - y * (f + b))))
        if best_v is None or v < best_v - 1e-15:
            best_b, best_v = b, v
    return best_b


def _train_linear_active_set(X: np.ndarray, y: np.ndarray, config: SvmConfig) -> BinarySvm:
    """Primal active-set solver; see the module docstring for the scheme."""
    n, dims = X.shape
    C = config.C
    w = np.zeros(dims)
    b = 0.0
    set_tol = 1e-9
    hinge_history: list[float] = []
    alphas = np.zeros(n)
    dual_gap = float("inf")
    passes = 0

    for passes in range(1, config.max_passes + 1):
        m = y * (X @ w + b)
        violators = m < 1.0 - set_tol
        margin_set = np.abs(m - 1.0) <= set_tol
        mi = np.flatnonzero(margin_set)
        base_w = (C * y[violators]) @ X[violators] if violators.any() else np.zeros(dims)

        if len(mi) > 0:
            Xm, ym = X[mi], y[mi]
            k = len(mi)
            A = np.zeros((k + 1, k + 1))
            A[:k, :k] = (ym[:, None] * ym[None, :]) * (Xm @ Xm.T)
            A[:k, k] = ym
            A[k, :k] = ym
            rhs = np.zeros(k + 1)
            rhs[:k] = 1.0 - ym * (Xm @ base_w)
            rhs[k] = -float(np.sum(C * y[violators]))
            sol, *_ = np.linalg.lstsq(A, rhs, rcond=None)
            mu = np.clip(sol[:k], 0.0, C)
            w_target = base_w + (mu * ym) @ Xm
            b_target = float(sol[k])
        else:
            mu = np.zeros(0)
            w_target = base_w
            b_target = _optimal_bias(X, y, C, w_target) if len(np.unique(y)) > 1 else b

        t = _exact_line_search(X, y, C, w, b, w_target - w, b_target - b)
        w = w + t * (w_target - w)
        b = b + t * (b_target - b)
        b = _optimal_bias(X, y, C, w)
        hinge_history.append(_primal_objective(X, y, w, b, C))

        # Dual estimate from the current sets; exact once the sets settle.
        m = y * (X @ w + b)
        alphas = np.zeros(n)
        at_bound = m < 1.0 - set_tol
        alphas[at_bound] = C
        on_margin = np.flatnonzero(np.abs(m - 1.0) <= 1e-6)
        if len(on_margin) > 0:
            Xm, ym = X[on_margin], y[on_margin]
            resid_w = w - ((C * at_bound * y) @ X)
            # Stationarity rows plus the bias-balance row.
            A_read = np.vstack([(Xm * ym[:, None]).T, ym[None, :]])
            rhs_read = np.concatenate([resid_w, [-float(np.sum(C * y[at_bound]))]])
            sol, *_ = np.linalg.lstsq(A_read, rhs_read, rcond=None)
            alphas[on_margin] = np.clip(sol, 0.0, C)
        ay = alphas * y
        dual = float(np.sum(alphas) - 0.5 * np.sum((ay @ X) ** 2))
        dual_gap = hinge_history[-1] - dual
        if dual_gap < config.dual_gap_tol:
            break
        if len(hinge_history) >= 2 and hinge_history[-2] - hinge_history[-1] < 1e-12:
            break  # objective has stalled; sets are as settled as they get

    support = alphas > 1e-10
    return BinarySvm(
        weights=w,
        bias=float(b),
        config=config,
        alphas=alphas[support],
        support_x=X[support],
        support_y=y[support],
        hinge_history=hinge_history,
        dual_gap=float(dual_gap),
        passes=passes,
    )


def train_binary_svm(X: np.ndarray, y: np.ndarray, config: SvmConfig) -> BinarySvm:
    """Labels y in {-1, +1}. Deterministic; dispatches on the kernel."""
    dims = X.shape[1]
    classes = np.unique(y)
    if len(classes) == 1:
        # Constant classifier, flagged; bias sign carries the single class.
        return BinarySvm(
            weights=np.zeros(dims),
            bias=float(classes[0]),
            config=config,
            degenerate=True,
        )
    if config.kernel == "linear":
        return _train_linear_active_set(X, y, config)
    return _train_smo(X, y, config)


def _train_smo(X: np.ndarray, y: np.ndarray, config: SvmConfig) -> BinarySvm:
    n = X.shape[0]
    K = _kernel_matrix(X, config)
    alphas = np.zeros(n)
    b = 0.0
    C, tol = config.C, config.tol
    hinge_history: list[float] = []
    passes = 0
    dual_gap = float("inf")
    # Error cache E_i = f(x_i) - y_i, updated incrementally after each pair step.
    errors = np.full(n, 0.0) - y + b

    def try_pair(i: int, j: int) -> bool:
        nonlocal b, errors
        if i == j:
            return False
        Ei, Ej = errors[i], errors[j]
        ai_old, aj_old = alphas[i], alphas[j]
        if y[i] != y[j]:
            L, H = max(0.0, aj_old - ai_old), min(C, C + aj_old - ai_old)
        else:
            L, H = max(0.0, ai_old + aj_old - C), min(C, ai_old + aj_old)
        if H - L < 1e-12:
            return False
        eta = 2.0 * K[i, j] - K[i, i] - K[j, j]
        if eta >= 0:
            return False
        aj = aj_old - y[j] * (Ei - Ej) / eta
        aj = min(H, max(L, aj))
        if abs(aj - aj_old) < 1e-5 * (aj + aj_old + 1e-5):
            return False
        ai = ai_old + y[i] * y[j] * (aj_old - aj)
        b1 = b - Ei - y[i] * (ai - ai_old) * K[i, i] - y[j] * (aj - aj_old) * K[i, j]
        b2 = b - Ej - y[i] * (ai - ai_old) * K[i, j] - y[j] * (aj - aj_old) * K[j, j]
        if 0 < ai < C:
            b_new = b1
        elif 0 < aj < C:
            b_new = b2
        else:
            b_new = (b1 + b2) / 2.0
        errors += (
            y[i] * (ai - ai_old) * K[i]
            + y[j] * (aj - aj_old) * K[j]
            + (b_new - b)
        )
        b = b_new
        alphas[i], alphas[j] = ai, aj
        return True

    def examine(i: int) -> bool:
        r = errors[i] * y[i]
        if not ((r < -tol and alphas[i] < C) or (r > tol and alphas[i] > 0)):
            return False
        non_bound = np.flatnonzero((alphas > 1e-12) & (alphas < C - 1e-12))
        if len(non_bound) > 1:
            gaps = np.abs(errors[i] - errors[non_bound])
            j = int(non_bound[int(np.argmax(gaps))])
            if try_pair(i, j):
                return True
        for j in non_bound:  # second heuristic: sweep the non-bound set
            if try_pair(i, int(j)):
                return True
        for j in range(n):  # last resort: sweep everything
            if try_pair(i, j):
                return True
        return False

    examine_all = True
    for passes in range(1, config.max_passes + 1):
        targets = range(n) if examine_all else np.flatnonzero(
            (alphas > 1e-12) & (alphas < C - 1e-12)
        )
        changed = sum(examine(int(i)) for i in targets)
        errors = (alphas * y) @ K + b - y  # refresh against numerical drift
        w = X.T @ (alphas * y)
        hinge_history.append(_primal_objective(X, y, w, b, C))
        dual_gap = hinge_history[-1] - _dual_objective(alphas, y, K)
        if dual_gap < config.dual_gap_tol:
            break
        if examine_all:
            if changed == 0:
                break  # full sweep with no movement: KKT holds within tol
            examine_all = False
        elif changed == 0:
            examine_all = True

    w = X.T @ (alphas * y)
    support = alphas > 1e-10
    return BinarySvm(
        weights=w,
        bias=float(b),
        config=config,
        alphas=alphas[support],
        support_x=X[support],
        support_y=y[support],
        hinge_history=hinge_history,
        dual_gap=float(dual_gap),
        passes=passes,
    )


PERSONA_ORDER = ("runner", "treasure_collector", "monster_killer")


@dataclass
class SvmModel:
    """Three one-vs-rest classifiers over the 17 mechanic frequencies."""

    classifiers: dict[str, BinarySvm]
    normalizer: Normalizer
    config: SvmConfig

    def margins(self, vector: FeatureVector) -> tuple[float, float, float]:
        if not vector.normalized:
            raise UnnormalizedInputError(
                "feature vector must be normalized with the model's normalizer"
            )
        return tuple(
            self.classifiers[name].decision(vector.counts) for name in PERSONA_ORDER
        )

    def predict(self, vector: FeatureVector) -> tuple[LabelSet, tuple[float, float, float]]:
        m = self.margins(vector)
        return LabelSet.from_flags([v > 0 for v in m]), m

    def predict_labels(self, vector: FeatureVector) -> LabelSet:
        return self.predict(vector)[0]

    def probabilities(self, vector: FeatureVector) -> tuple[float, float, float]:
        """Logistic squash of the margins; uncalibrated but in [0, 1]."""
        return tuple(1.0 / (1.0 + np.exp(-m)) for m in self.margins(vector))

    def degenerate_personas(self) -> list[str]:
        return [n for n in PERSONA_ORDER if self.classifiers[n].degenerate]


def train_svm(
    vectors: Sequence[FeatureVector],
    label_sets: Sequence[LabelSet],
    normalizer: Normalizer,
    config: SvmConfig = SvmConfig(),
) -> SvmModel:
    """Train the three binary classifiers on normalized frequency vectors."""
    if len(vectors) != len(label_sets):
        raise ValueError("vectors and labels differ in length")
    if any(not v.normalized for v in vectors):
        raise UnnormalizedInputError("train_svm expects normalized vectors")
    X = np.stack([v.counts for v in vectors])
    classifiers = {}
    for name in PERSONA_ORDER:
        flags = np.array(
            [getattr(labels, name) for labels in label_sets], dtype=float
        )
        y = np.where(flags > 0, 1.0, -1.0)
        classifiers[name] = train_binary_svm(X, y, config)
    return SvmModel(classifiers=classifiers, normalizer=normalizer, config=config)


def svm_predict(model: SvmModel, vector: FeatureVector):
    return model.predict(vector)


# -- persistence -----------------------------------------------------------------


def save_svm(model: SvmModel, path) -> None:
    payload = {
        "format": "svm",
        "version": MODEL_FORMAT_VERSION,
        "config": {
            "kernel": model.config.kernel,
            "C": model.config.C,
            "gamma": model.config.gamma,
            "tol": model.config.tol,
            "dual_gap_tol": model.config.dual_gap_tol,
            "max_passes": model.config.max_passes,
            "seed": model.config.seed,
        },
        "normalizer": model.normalizer.per_mechanic_max.tolist(),
        "classifiers": {
            name: {
                "weights": clf.weights.tolist(),
                "bias": clf.bias,
                "degenerate": clf.degenerate,
                "alphas": None if clf.alphas is None else clf.alphas.tolist(),
                "support_x": None if clf.support_x is None else clf.support_x.tolist(),
                "support_y": None if clf.support_y is None else clf.support_y.tolist(),
                "dual_gap": clf.dual_gap,
                "passes": clf.passes,
            }
            for name, clf in model.classifiers.items()
        },
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)


def load_svm(path) -> SvmModel:
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    if payload.get("format") != "svm":
        raise ValueError("not an svm model file")
    cfg = SvmConfig(**payload["config"])
    classifiers = {}
    for name, data in payload["classifiers"].items():
        classifiers[name] = BinarySvm(
            weights=np.array(data["weights"]),
            bias=data["bias"],
            config=cfg,
            degenerate=data["degenerate"],
            alphas=None if data["alphas"] is None else np.array(data["alphas"]),
            support_x=None if data["support_x"] is None else np.array(data["support_x"]),
            support_y=None if data["support_y"] is None else np.array(data["support_y"]),
            dual_gap=data["dual_gap"],
            passes=data["passes"],
        )
    return SvmModel(
        classifiers=classifiers,
        normalizer=Normalizer(np.array(payload["normalizer"])),
        config=cfg,
    )
