import math
from dataclasses import replace

import numpy as np
import pytest

from sigver import ann
from sigver.errors import (
    BadMagic,
    DimensionMismatch,
    EmptyBatch,
    NonFiniteInput,
    SingleClassData,
    TruncatedData,
    VersionUnsupported,
)


def small_model(seed=0, n_classes=3, n_inputs=5, n_hidden=7):
    return ann.init_model(n_classes, seed, n_inputs=n_inputs, n_hidden=n_hidden)


# --- initialization ----------------------------------------------------------

def test_init_deterministic():
    a = small_model(seed=42)
    b = small_model(seed=42)
    assert np.array_equal(a.W1, b.W1) and np.array_equal(a.W2, b.W2)
    c = small_model(seed=43)
    assert not np.array_equal(a.W1, c.W1)


def test_init_weight_bounds():
    m = small_model(seed=7, n_classes=4, n_inputs=9, n_hidden=11)
    lim1 = math.sqrt(6.0 / (9 + 11))
    lim2 = math.sqrt(6.0 / (11 + 4))
    assert np.abs(m.W1).max() <= lim1 and np.abs(m.W2).max() <= lim2
    assert not m.b1.any() and not m.b2.any()


def test_init_rejects_single_class():
    with pytest.raises(SingleClassData):
        ann.init_model(1, 0)


# --- forward -----------------------------------------------------------------

def zero_model(n_classes=4, n_inputs=5, n_hidden=7):
    m = small_model(n_classes=n_classes, n_inputs=n_inputs, n_hidden=n_hidden)
    return replace(m, W1=np.zeros_like(m.W1), W2=np.zeros_like(m.W2))


def test_forward_zero_weights_uniform():
    m = zero_model()
    p = ann.forward(m, np.ones(5))
    assert np.allclose(p, 0.25)


def test_forward_bias_shift_invariance():
    m = small_model()
    x = np.arange(5, dtype=np.float64)
    p0 = ann.forward(m, x)
    shifted = replace(m, b2=m.b2 + 3.7)
    assert np.allclose(ann.forward(shifted, x), p0, atol=1e-12)


def test_forward_sums_to_one():
    rng = np.random.default_rng(31)
    m = small_model(seed=5)
    for _ in range(50):
        p = ann.forward(m, rng.normal(scale=3.0, size=5))
        assert abs(p.sum() - 1.0) < 1e-9 and (p >= 0).all()


def test_forward_rejects_non_finite():
    m = small_model()
    with pytest.raises(NonFiniteInput):
        ann.forward(m, np.array([1.0, np.nan, 0.0, 0.0, 0.0]))


# --- loss and gradient -------------------------------------------------------

def test_loss_uniform_is_log_c():
    m = zero_model(n_classes=4)
    loss, _ = ann.loss_and_gradient(m, np.ones((3, 5)), np.array([0, 1, 2]))
    assert abs(loss - math.log(4)) < 1e-12


def test_loss_perfect_prediction_near_zero():
    m = small_model(n_classes=2)
    # drive the output bias hard toward class 0
    m = replace(m, b2=np.array([50.0, -50.0]))
    loss, _ = ann.loss_and_gradient(m, np.zeros((2, 5)), np.array([0, 0]))
    assert loss < 1e-9


def test_loss_empty_batch():
    with pytest.raises(EmptyBatch):
        ann.loss_and_gradient(small_model(), np.zeros((0, 5)), np.zeros(0, dtype=int))


def test_gradient_matches_finite_differences():
    model = small_model(seed=123)
    rng = np.random.default_rng(99)
    X = rng.normal(size=(11, 5))
    y = rng.integers(0, 3, size=11)
    _, g = ann.loss_and_gradient(model, X, y)
    w0 = ann.pack_params(model)
    h = 1e-5
    gf = np.empty_like(w0)
    for i in range(w0.size):
        wp, wm = w0.copy(), w0.copy()
        wp[i] += h
        wm[i] -= h
        fp, _ = ann.loss_and_gradient(ann.unpack_params(model, wp), X, y)
        fm, _ = ann.loss_and_gradient(ann.unpack_params(model, wm), X, y)
        gf[i] = (fp - fm) / (2 * h)
    rel = np.abs(g - gf) / np.maximum(np.abs(gf), 1e-10)
    assert rel.max() < 1e-5


# --- training ----------------------------------------------------------------

def separable_data(n_per_class=30, seed=77):
    rng = np.random.default_rng(seed)
    a = rng.normal(loc=(-3.0, -3.0, 0, 0, 0), scale=0.4, size=(n_per_class, 5))
    b = rng.normal(loc=(3.0, 3.0, 0, 0, 0), scale=0.4, size=(n_per_class, 5))
    X = np.vstack([a, b])
    y = np.array([0] * n_per_class + [1] * n_per_class)
    return X, y


def test_scg_train_separable():
    X, y = separable_data()
    model = small_model(n_classes=2, n_hidden=8)
    trained, hist = ann.scg_train(model, X, y, ann.TrainOptions(seed=3))
    _, probs = ann._forward_batch(trained, X)
    assert (probs.argmax(axis=1) == y).mean() == 1.0
    if hist.val_accuracy:
        assert hist.val_accuracy[-1] >= 0.95


def test_scg_accepted_losses_non_increasing():
    X, y = separable_data(seed=88)
    model = small_model(n_classes=2, n_hidden=8)
    _, hist = ann.scg_train(model, X, y, ann.TrainOptions(seed=3))
    losses = np.array(hist.train_loss)
    assert (np.diff(losses) <= 1e-15).all()


def test_scg_deterministic():
    X, y = separable_data(seed=42)
    opts = ann.TrainOptions(seed=9)
    m1, _ = ann.scg_train(small_model(n_classes=2), X, y, opts)
    m2, _ = ann.scg_train(small_model(n_classes=2), X, y, opts)
    assert np.array_equal(ann.pack_params(m1), ann.pack_params(m2))


def test_scg_rejects_single_class():
    X = np.zeros((4, 5))
    y = np.zeros(4, dtype=int)
    with pytest.raises(SingleClassData):
        ann.scg_train(small_model(n_classes=2), X, y, ann.TrainOptions())


def test_scg_minimize_convex_quadratic():
    rng = np.random.default_rng(55)
    A = rng.normal(size=(6, 6))
    A = A @ A.T + 6 * np.eye(6)
    b = rng.normal(size=6)

    def quad(w):
        return 0.5 * float(w @ A @ w) - float(b @ w), A @ w - b

    w, info = ann.scg_minimize(quad, np.zeros(6), max_iters=100, grad_tol=1e-9)
    assert info["grad_norm"] < 1e-9
    assert np.allclose(w, np.linalg.solve(A, b), atol=1e-7)


# --- predict -----------------------------------------------------------------

def test_predict_tie_break_lowest_index():
    m = zero_model(n_classes=4)
    label, score = ann.predict(m, np.ones(5))
    assert label == m.class_labels[0]
    assert abs(score - 0.25) < 1e-12


def test_predict_logit_shift_invariant():
    m = small_model()
    x = np.linspace(-1, 1, 5)
    label, _ = ann.predict(m, x)
    shifted = replace(m, b2=m.b2 + 11.0)
    assert ann.predict(shifted, x)[0] == label


def test_predict_on_trained_separable():
    X, y = separable_data(seed=11)
    model = small_model(n_classes=2, n_hidden=8)
    trained, _ = ann.scg_train(model, X, y, ann.TrainOptions(seed=4))
    hits = sum(ann.predict(trained, x)[0] == trained.class_labels[t]
               for x, t in zip(X, y))
    assert hits / len(y) >= 0.95


# --- persistence -------------------------------------------------------------

def test_save_load_roundtrip_exact():
    rng = np.random.default_rng(60)
    m = small_model(seed=8, n_classes=3, n_inputs=6, n_hidden=4)
    m = replace(m, class_labels=("alice", "bob", "carol"),
                norm_mean=rng.normal(size=6), norm_std=np.abs(rng.normal(size=6)) + 0.1,
                b1=rng.normal(size=4), b2=rng.normal(size=3))
    loaded = ann.load_model(ann.save_model(m))
    for _ in range(10):
        x = rng.normal(size=6)
        assert np.max(np.abs(ann.forward(loaded, x) - ann.forward(m, x))) < 1e-12
    assert loaded.class_labels == m.class_labels
    assert loaded.seed == m.seed


def test_load_truncated():
    data = ann.save_model(small_model())
    with pytest.raises(TruncatedData):
        ann.load_model(data[: len(data) // 2])


def test_load_bad_magic():
    with pytest.raises(BadMagic):
        ann.load_model(b"NOT-A-MODEL v1\n")


def test_load_bad_version():
    data = ann.save_model(small_model()).replace(b"v1", b"v9", 1)
    with pytest.raises(VersionUnsupported):
        ann.load_model(data)


def test_load_dimension_mismatch():
    lines = ann.save_model(small_model()).decode().split("\n")
    lines[4] = lines[4] + " 1.0"  # one extra normalizer mean
    with pytest.raises(DimensionMismatch):
        ann.load_model("\n".join(lines).encode())
