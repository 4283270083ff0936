from dataclasses import replace

import numpy as np
import pytest

from sigver import ann, evaluate as ev
from sigver.dataset import FeatureRow
from sigver.errors import OneSidedTrials, TooFewSamples, UnknownWriter


def biased_model(n_classes=2, n_inputs=4, favored=0):
    """Zero-weight model whose output bias makes `favored` win everywhere."""
    m = ann.init_model(n_classes, 0, n_inputs=n_inputs, n_hidden=3)
    b2 = np.zeros(n_classes)
    b2[favored] = 4.0
    return replace(m, W1=np.zeros_like(m.W1), W2=np.zeros_like(m.W2), b2=b2,
                   class_labels=tuple(f"w{i}" for i in range(n_classes)))


def rows_for(writers, label="genuine", dim=4):
    return [FeatureRow(f"{w}/x{i}.pgm", w, label, np.zeros(dim))
            for i, w in enumerate(writers)]


# --- trials ------------------------------------------------------------------

def test_make_trials_random_counts():
    m = biased_model()
    rows = rows_for(["w0", "w1"])
    trials = ev.make_trials(m, rows, "random")
    genuine = [t for t in trials if t.truth == ev.GENUINE]
    rf = [t for t in trials if t.truth == ev.RANDOM_FORGERY]
    assert len(genuine) == 2 and len(rf) == 2
    assert all(0.0 <= t.score <= 1.0 for t in trials)


def test_make_trials_skilled_counts():
    m = biased_model()
    rows = rows_for(["w0", "w1", "w0"], label="forged")
    trials = ev.make_trials(m, rows, "skilled")
    assert len(trials) == 3
    assert all(t.truth == ev.SKILLED_FORGERY for t in trials)


def test_make_trials_unknown_writer():
    m = biased_model()
    with pytest.raises(UnknownWriter):
        ev.make_trials(m, rows_for(["stranger"]), "random")


# --- accuracy ----------------------------------------------------------------

def test_accuracy_perfect_and_counts():
    m = biased_model(favored=0)
    rows = rows_for(["w0"] * 6)
    assert ev.classification_accuracy(m, rows) == 1.0
    mixed = rows_for(["w0"] * 5 + ["w1"] * 5)
    acc = ev.classification_accuracy(m, mixed)
    assert acc == 0.5  # the constant predictor hits exactly the w0 half
    assert float(acc * len(mixed)).is_integer()


# --- FAR/FRR curve -----------------------------------------------------------

def synth_trials(g_scores, f_scores, truth=ev.RANDOM_FORGERY, match=True):
    return ([ev.Trial("w", float(s), ev.GENUINE, match) for s in g_scores]
            + [ev.Trial("w", float(s), truth, match) for s in f_scores])


def test_far_frr_extremes():
    trials = synth_trials([0.9, 0.8], [0.3, 0.1])
    curve = ev.far_frr(trials)
    assert curve.far[0] == 1.0 and curve.frr[0] == 0.0  # t = 0 accepts all
    assert curve.far[-1] == 0.0 and curve.frr[-1] == 1.0  # t = 1 above all scores


def test_far_frr_separable_has_zero_point():
    trials = synth_trials([0.9, 0.95, 0.85], [0.1, 0.2, 0.15])
    curve = ev.far_frr(trials)
    both_zero = (curve.far == 0) & (curve.frr == 0)
    assert both_zero.any()


def test_far_frr_monotone_random():
    rng = np.random.default_rng(40)
    trials = synth_trials(rng.random(200), rng.random(150))
    curve = ev.far_frr(trials)
    assert (np.diff(curve.far) <= 0).all()
    assert (np.diff(curve.frr) >= 0).all()
    assert ((0 <= curve.far) & (curve.far <= 1)).all()


def test_far_frr_mismatch_never_accepted():
    trials = ([ev.Trial("w", 0.99, ev.GENUINE, True)]
              + [ev.Trial("w", 0.99, ev.RANDOM_FORGERY, False)])
    curve = ev.far_frr(trials)
    assert (curve.far == 0).all()


def test_far_frr_one_sided():
    with pytest.raises(OneSidedTrials):
        ev.far_frr([ev.Trial("w", 0.5, ev.GENUINE)])


# --- EER ---------------------------------------------------------------------

def test_eer_separable_zero():
    trials = synth_trials([0.9, 0.95], [0.1, 0.2])
    assert ev.eer(ev.far_frr(trials)) == 0.0


def test_eer_two_point_interpolation():
    curve = ev.ErrorCurve(np.array([0.4, 0.6]), np.array([0.2, 0.0]),
                          np.array([0.0, 0.2]))
    assert abs(ev.eer(curve) - 0.1) < 1e-12


def test_eer_identical_distributions():
    rng = np.random.default_rng(41)
    g = np.clip(rng.normal(0.5, 0.1, 10000), 0, 1)
    f = np.clip(rng.normal(0.5, 0.1, 10000), 0, 1)
    curve = ev.far_frr(synth_trials(g, f))
    assert abs(ev.eer(curve) - 0.5) < 0.03


# --- AUC ---------------------------------------------------------------------

def test_auc_perfect_and_chance():
    perfect = ev.far_frr(synth_trials([0.9, 0.95], [0.1, 0.2]))
    assert abs(ev.roc_auc(perfect) - 1.0) < 1e-12
    rng = np.random.default_rng(42)
    g = np.clip(rng.normal(0.5, 0.1, 5000), 0, 1)
    f = np.clip(rng.normal(0.5, 0.1, 5000), 0, 1)
    chance = ev.far_frr(synth_trials(g, f))
    assert abs(ev.roc_auc(chance) - 0.5) < 0.03


def test_auc_orientation_invariance():
    rng = np.random.default_rng(43)
    curve = ev.far_frr(synth_trials(rng.random(50), rng.random(60)))
    flipped = ev.ErrorCurve(curve.thresholds[::-1].copy(), curve.far[::-1].copy(),
                            curve.frr[::-1].copy())
    assert abs(ev.roc_auc(curve) - ev.roc_auc(flipped)) < 1e-12
    assert 0.0 <= ev.roc_auc(curve) <= 1.0


# --- PCA ---------------------------------------------------------------------

def test_pca3_line_explains_everything():
    rng = np.random.default_rng(44)
    t = rng.normal(size=50)
    direction = np.array([1.0, -2.0, 0.5, 3.0])
    X = np.outer(t, direction)
    _, explained = ev.pca3(X)
    assert abs(explained[0] - 1.0) < 1e-6


def test_pca3_top_component_maximal_variance():
    rng = np.random.default_rng(45)
    X = rng.normal(size=(60, 8)) * np.linspace(3, 0.3, 8)
    proj, _ = ev.pca3(X)
    top_var = proj[:, 0].var()
    centered = X - X.mean(axis=0)
    for _ in range(200):
        u = rng.normal(size=8)
        u /= np.linalg.norm(u)
        assert (centered @ u).var() <= top_var + 1e-9


def test_pca3_row_order_invariance():
    rng = np.random.default_rng(46)
    X = rng.normal(size=(30, 6))
    perm = rng.permutation(30)
    p1, e1 = ev.pca3(X)
    p2, e2 = ev.pca3(X[perm])
    assert np.allclose(e1, e2, atol=1e-9)
    for k in range(3):
        same = np.allclose(p2[:, k], p1[perm, k], atol=1e-6)
        flipped = np.allclose(p2[:, k], -p1[perm, k], atol=1e-6)
        assert same or flipped


def test_pca3_too_few():
    with pytest.raises(TooFewSamples):
        ev.pca3(np.zeros((3, 5)))


def test_evaluate_model_report():
    m = biased_model(favored=0)
    test_rows = rows_for(["w0"] * 4 + ["w1"] * 4)
    forged = rows_for(["w0", "w1"], label="forged")
    report, curve = ev.evaluate_model(m, test_rows, forged)
    assert 0.0 <= report.accuracy_rf <= 1.0
    assert report.accuracy_sf is not None and 0.0 <= report.accuracy_sf <= 1.0
    assert 0.0 <= report.eer <= 1.0 and 0.0 <= report.auc <= 1.0
    assert set(report.per_writer) == {"w0", "w1"}
    assert (np.diff(curve.far) <= 0).all()
    no_forged, _ = ev.evaluate_model(m, test_rows, [])
    assert no_forged.accuracy_sf is None


def test_skilled_rejection_rate():
    trials = [ev.Trial("w", 0.9, ev.SKILLED_FORGERY, True),
              ev.Trial("w", 0.2, ev.SKILLED_FORGERY, True),
              ev.Trial("w", 0.95, ev.SKILLED_FORGERY, False)]
    assert ev.skilled_rejection_rate(trials, 0.5) == pytest.approx(2 / 3)
    with pytest.raises(OneSidedTrials):
        ev.skilled_rejection_rate([ev.Trial("w", 0.5, ev.GENUINE)], 0.5)
