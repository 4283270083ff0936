"""One-hidden-layer softmax classifier trained with scaled conjugate gradient.

The network is input -> tanh hidden layer (200 units for the production
feature size) -> softmax over writer classes, minimizing mean cross entropy.
The trainer is Moller's SCG: conjugate directions scaled by a
Levenberg-Marquardt term, curvature estimated from a finite-difference
Hessian-vector product, no line search. Only steps that reduce the loss are
accepted, so the accepted-iterate loss sequence is non-increasing.

Everything here is deterministic given (data, options, seed).
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (
    BadMagic,
    DimensionMismatch,
    EmptyBatch,
    NonFiniteInput,
    SingleClassData,
    TruncatedData,
    VersionUnsupported,
)

N_INPUTS = 130
N_HIDDEN = 200

MODEL_MAGIC = "SIGVER-MODEL"
MODEL_VERSION = "v1"


@dataclass(frozen=True)
class MlpModel:
    W1: np.ndarray          # hidden x inputs
    b1: np.ndarray          # hidden
    W2: np.ndarray          # classes x hidden
    b2: np.ndarray          # classes
    class_labels: tuple     # ordered writer identifiers
    norm_mean: np.ndarray   # per-input normalization statistics
    norm_std: np.ndarray
    seed: int

    @property
    def n_inputs(self):
        return self.W1.shape[1]

    @property
    def n_hidden(self):
        return self.W1.shape[0]

    @property
    def n_classes(self):
        return self.W2.shape[0]


@dataclass(frozen=True)
class TrainOptions:
    max_epochs: int = 500
    val_fraction: float = 0.15
    patience: int = 20
    sigma: float = 5e-5
    lambda_init: float = 5e-7
    seed: int = 0


@dataclass
class TrainHistory:
    train_loss: list = field(default_factory=list)
    val_loss: list = field(default_factory=list)
    val_accuracy: list = field(default_factory=list)
    stop_reason: str = ""


def init_model(n_classes: int, seed: int, n_inputs: int = N_INPUTS,
               n_hidden: int = N_HIDDEN) -> MlpModel:
    """Fresh model with uniform Glorot weights and zero biases; the same seed
    always produces bit-identical weights."""
    if n_classes < 2:
        raise SingleClassData(f"need at least 2 classes, got {n_classes}")
    rng = np.random.default_rng(seed)
    lim1 = math.sqrt(6.0 / (n_inputs + n_hidden))
    lim2 = math.sqrt(6.0 / (n_hidden + n_classes))
    return MlpModel(
        W1=rng.uniform(-lim1, lim1, size=(n_hidden, n_inputs)),
        b1=np.zeros(n_hidden),
        W2=rng.uniform(-lim2, lim2, size=(n_classes, n_hidden)),
        b2=np.zeros(n_classes),
        class_labels=tuple(str(i) for i in range(n_classes)),
        norm_mean=np.zeros(n_inputs),
        norm_std=np.ones(n_inputs),
        seed=seed,
    )


def _softmax_rows(logits):
    shifted = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def forward(model: MlpModel, x: np.ndarray) -> np.ndarray:
    """Class probabilities for one input vector; sums to 1."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (model.n_inputs,):
        raise DimensionMismatch(f"expected input of length {model.n_inputs}")
    if not np.isfinite(x).all():
        raise NonFiniteInput("non-finite feature value")
    hidden = np.tanh(model.W1 @ x + model.b1)
    return _softmax_rows(model.W2 @ hidden + model.b2)


def _forward_batch(model, X):
    hidden = np.tanh(X @ model.W1.T + model.b1)
    probs = _softmax_rows(hidden @ model.W2.T + model.b2)
    return hidden, probs


def pack_params(model: MlpModel) -> np.ndarray:
    """Flatten (W1, b1, W2, b2) in that fixed order."""
    return np.concatenate([model.W1.ravel(), model.b1, model.W2.ravel(), model.b2])


def unpack_params(model: MlpModel, w: np.ndarray) -> MlpModel:
    h, d = model.W1.shape
    c = model.W2.shape[0]
    sizes = [h * d, h, c * h, c]
    if w.size != sum(sizes):
        raise DimensionMismatch("parameter vector length mismatch")
    parts = np.split(w, np.cumsum(sizes)[:-1])
    return replace(model, W1=parts[0].reshape(h, d).copy(), b1=parts[1].copy(),
                   W2=parts[2].reshape(c, h).copy(), b2=parts[3].copy())


def loss_and_gradient(model: MlpModel, X: np.ndarray, y: np.ndarray):
    """Mean cross entropy over the batch and its gradient, flattened in
    (W1, b1, W2, b2) order."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise EmptyBatch("empty training batch")
    if y.min() < 0 or y.max() >= model.n_classes:
        raise DimensionMismatch("class index out of range")
    n = X.shape[0]
    hidden, probs = _forward_batch(model, X)
    # clip only inside the log; the gradient uses the exact probabilities
    loss = float(-np.log(np.maximum(probs[np.arange(n), y], 1e-300)).mean())
    dlogits = probs.copy()
    dlogits[np.arange(n), y] -= 1.0
    dlogits /= n
    dW2 = dlogits.T @ hidden
    db2 = dlogits.sum(axis=0)
    dhidden = dlogits @ model.W2
    dz1 = dhidden * (1.0 - hidden * hidden)
    dW1 = dz1.T @ X
    db1 = dz1.sum(axis=0)
    grad = np.concatenate([dW1.ravel(), db1, dW2.ravel(), db2])
    return loss, grad


def scg_minimize(fun, w0: np.ndarray, max_iters: int = 500, grad_tol: float = 1e-8,
                 sigma: float = 5e-5, lambda_init: float = 5e-7, callback=None):
    """Moller's scaled conjugate gradient on fun(w) -> (value, gradient).

    Directions restart on steepest descent every len(w0) iterations. The
    callback, if given, runs after every accepted step with (k, w, value) and
    may return True to stop. Returns (w, info dict).
    """
    w = np.array(w0, dtype=np.float64)
    n = w.size
    f, g = fun(w)
    r = -g
    p = r.copy()
    lam = lambda_init
    lam_bar = 0.0
    success = True
    delta_raw = 0.0
    p_norm2 = 0.0
    reason = "max_iters"
    k = 0
    while k < max_iters:
        k += 1
        if success:
            p_norm2 = float(p @ p)
            if p_norm2 == 0.0:
                reason = "grad_tol"
                k -= 1
                break
            sig_k = sigma / math.sqrt(p_norm2)
            _, g_probe = fun(w + sig_k * p)
            delta_raw = float(p @ (g_probe - g)) / sig_k
        delta = delta_raw + (lam - lam_bar) * p_norm2
        if delta <= 0.0:
            # force positive definiteness of the scaled curvature
            lam_bar = 2.0 * (lam - delta / p_norm2)
            delta = -delta + lam * p_norm2
            lam = lam_bar
        mu = float(p @ r)
        if mu <= 0.0:
            # numerically lost conjugacy; restart on steepest descent
            p = r.copy()
            success = True
            continue
        alpha = mu / delta
        f_try, g_try = fun(w + alpha * p)
        cmp = 2.0 * delta * (f - f_try) / (mu * mu)
        if cmp >= 0.0:
            w = w + alpha * p
            f = f_try
            g = g_try
            r_new = -g
            lam_bar = 0.0
            success = True
            if k % n == 0:
                p = r_new.copy()
            else:
                beta = (float(r_new @ r_new) - float(r_new @ r)) / mu
                p = r_new + beta * p
            r = r_new
            if cmp >= 0.75:
                lam *= 0.25
            if callback is not None and callback(k, w, f):
                reason = "callback"
                break
            if math.sqrt(float(r @ r)) < grad_tol:
                reason = "grad_tol"
                break
        else:
            lam_bar = lam
            success = False
        if cmp < 0.25:
            lam += delta * (1.0 - cmp) / p_norm2
        if not success and lam > 1e150:
            # scaling has hit the floating-point ceiling; no step can improve
            reason = "stalled"
            break
    info = {"iterations": k, "value": f, "grad_norm": math.sqrt(float(r @ r)),
            "reason": reason}
    return w, info


def _stratified_split(y, val_fraction, seed):
    """Per-class index split; floor(val_fraction * class size) to validation."""
    rng = np.random.default_rng(seed)
    train_idx, val_idx = [], []
    for c in np.unique(y):
        idx = np.nonzero(y == c)[0]
        perm = idx[rng.permutation(idx.size)]
        n_val = int(val_fraction * idx.size)
        val_idx.extend(perm[:n_val].tolist())
        train_idx.extend(perm[n_val:].tolist())
    return np.sort(np.array(train_idx, dtype=np.int64)), np.sort(np.array(val_idx, dtype=np.int64))


def scg_train(model: MlpModel, X: np.ndarray, y: np.ndarray,
              options: TrainOptions = TrainOptions()):
    """Train on normalized features X with integer class labels y.

    A stratified validation slice (options.val_fraction per class, seeded by
    options.seed) is held out for early stopping: training stops when the
    validation loss has not improved for `patience` accepted iterations, and
    the best-validation snapshot is returned. Also stops at max_epochs or
    when the gradient norm falls below 1e-8.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.shape[0] == 0:
        raise EmptyBatch("no training samples")
    if np.unique(y).size < 2:
        raise SingleClassData("training data holds a single class")
    train_idx, val_idx = _stratified_split(y, options.val_fraction, options.seed)
    X_tr, y_tr = X[train_idx], y[train_idx]
    X_val, y_val = X[val_idx], y[val_idx]
    has_val = X_val.shape[0] > 0

    history = TrainHistory()
    state = {"best_loss": math.inf, "best_w": None, "best_k": 0}

    def objective(w):
        return loss_and_gradient(unpack_params(model, w), X_tr, y_tr)

    def on_step(k, w, f):
        history.train_loss.append(f)
        if not has_val:
            # tiny per-class sample counts can leave the holdout empty; early
            # stopping is then disabled and the history carries no val series
            return False
        m = unpack_params(model, w)
        _, probs = _forward_batch(m, X_val)
        vloss = float(-np.log(np.maximum(probs[np.arange(y_val.size), y_val], 1e-300)).mean())
        vacc = float((probs.argmax(axis=1) == y_val).mean())
        history.val_loss.append(vloss)
        history.val_accuracy.append(vacc)
        if vloss < state["best_loss"]:
            state["best_loss"] = vloss
            state["best_w"] = w.copy()
            state["best_k"] = k
        return k - state["best_k"] >= options.patience

    w_final, info = scg_minimize(
        objective, pack_params(model), max_iters=options.max_epochs,
        grad_tol=1e-8, sigma=options.sigma, lambda_init=options.lambda_init,
        callback=on_step)
    history.stop_reason = {"callback": "patience", "max_iters": "max_epochs"}.get(
        info["reason"], info["reason"])
    if has_val and state["best_w"] is not None:
        w_final = state["best_w"]
    return unpack_params(model, w_final), history


def predict(model: MlpModel, x: np.ndarray):
    """(class label, winning probability); ties go to the lowest class index."""
    probs = forward(model, x)
    idx = int(np.argmax(probs))
    return model.class_labels[idx], float(probs[idx])


def _fmt(values):
    return " ".join(repr(float(v)) for v in values)


def save_model(model: MlpModel) -> bytes:
    """Versioned textual snapshot; floats as shortest round-trip decimals."""
    if any(not label or any(ch.isspace() for ch in label)
           for label in model.class_labels):
        raise DimensionMismatch("class labels must be non-empty and whitespace-free")
    lines = [
        f"{MODEL_MAGIC} {MODEL_VERSION}",
        f"dims {model.n_inputs} {model.n_hidden} {model.n_classes}",
        " ".join(model.class_labels),
        str(model.seed),
        _fmt(model.norm_mean),
        _fmt(model.norm_std),
    ]
    lines.extend(_fmt(row) for row in model.W1)
    lines.append(_fmt(model.b1))
    lines.extend(_fmt(row) for row in model.W2)
    lines.append(_fmt(model.b2))
    return ("\n".join(lines) + "\n").encode("ascii")


def _parse_vector(line, expected, what):
    parts = line.split()
    if len(parts) != expected:
        raise DimensionMismatch(f"{what}: expected {expected} values, found {len(parts)}")
    try:
        return np.array([float(p) for p in parts], dtype=np.float64)
    except ValueError:
        raise DimensionMismatch(f"{what}: non-numeric value") from None


def load_model(data: bytes) -> MlpModel:
    """Inverse of save_model; forward outputs of the loaded model match the
    saved one exactly (round-trip decimals are lossless)."""
    try:
        text = data.decode("ascii")
    except UnicodeDecodeError:
        raise BadMagic("model file is not ASCII text") from None
    lines = text.split("\n")
    if not lines or not lines[0].startswith(MODEL_MAGIC):
        raise BadMagic("missing model magic")
    version = lines[0][len(MODEL_MAGIC):].strip()
    if version != MODEL_VERSION:
        raise VersionUnsupported(f"unsupported model version {version!r}")
    if len(lines) < 6:
        raise TruncatedData("model header incomplete")
    dims = lines[1].split()
    if len(dims) != 4 or dims[0] != "dims":
        raise DimensionMismatch(f"bad dims line: {lines[1]!r}")
    try:
        d, h, c = int(dims[1]), int(dims[2]), int(dims[3])
    except ValueError:
        raise DimensionMismatch(f"bad dims line: {lines[1]!r}") from None
    labels = tuple(lines[2].split())
    if len(labels) != c:
        raise DimensionMismatch(f"expected {c} class labels, found {len(labels)}")
    try:
        seed = int(lines[3])
    except ValueError:
        raise DimensionMismatch(f"bad seed line: {lines[3]!r}") from None
    need = 6 + h + 1 + c + 1
    if len(lines) < need:
        raise TruncatedData(f"expected {need} lines, found {len(lines)}")
    norm_mean = _parse_vector(lines[4], d, "normalizer means")
    norm_std = _parse_vector(lines[5], d, "normalizer stddevs")
    at = 6
    W1 = np.vstack([_parse_vector(lines[at + i], d, f"W1 row {i}") for i in range(h)])
    at += h
    b1 = _parse_vector(lines[at], h, "b1")
    at += 1
    W2 = np.vstack([_parse_vector(lines[at + i], h, f"W2 row {i}") for i in range(c)])
    at += c
    b2 = _parse_vector(lines[at], c, "b2")
    return MlpModel(W1=W1, b1=b1, W2=W2, b2=b2, class_labels=labels,
                    norm_mean=norm_mean, norm_std=norm_std, seed=seed)
