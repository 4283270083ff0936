"""Biometric evaluation of a trained verifier.

A verification trial claims a writer for a sample and carries the softmax
probability of the claimed class. A trial is accepted at threshold t when the
classifier's top class matches the claim AND the score reaches t. Sweeping t
over the observed scores yields the FAR/FRR trade-off, the equal error rate
and the ROC area.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .ann import MlpModel, forward
from .errors import OneSidedTrials, TooFewSamples, UnknownWriter
from .features import apply_normalizer, Normalizer

GENUINE = "genuine"
RANDOM_FORGERY = "random_forgery"
SKILLED_FORGERY = "skilled_forgery"


@dataclass(frozen=True)
class Trial:
    claimed_writer: str
    score: float
    truth: str
    # whether the classifier's argmax class equals the claim; the accept rule
    # requires it, so trials carry it alongside the raw score
    predicted_match: bool = True


@dataclass(frozen=True)
class ErrorCurve:
    thresholds: np.ndarray  # ascending
    far: np.ndarray         # non-increasing
    frr: np.ndarray         # non-decreasing


@dataclass(frozen=True)
class EvalReport:
    accuracy_rf: float
    accuracy_sf: Optional[float]
    eer: float
    eer_threshold: float
    auc: float
    per_writer: dict


def _normalized(model, row_values):
    return apply_normalizer(Normalizer(model.norm_mean, model.norm_std),
                            np.asarray(row_values, dtype=np.float64))


def _probs_for(model, values):
    p = forward(model, _normalized(model, values))
    return p, int(np.argmax(p))


def _class_index(model, writer):
    try:
        return model.class_labels.index(writer)
    except ValueError:
        raise UnknownWriter(f"writer {writer!r} not in model") from None


def make_trials(model: MlpModel, rows, protocol: str) -> list:
    """Verification trials from feature rows (objects with .writer, .label,
    .values).

    random protocol: every genuine row yields one genuine trial claiming its
    own writer plus one random-forgery trial for each other writer.
    skilled protocol: every forged row yields one trial claiming the writer
    it targets (the writer it is filed under).
    """
    trials = []
    if protocol == "random":
        for row in rows:
            if row.label != "genuine":
                continue
            own = _class_index(model, row.writer)
            probs, top = _probs_for(model, row.values)
            trials.append(Trial(row.writer, float(probs[own]), GENUINE, top == own))
            for idx, label in enumerate(model.class_labels):
                if idx == own:
                    continue
                trials.append(Trial(label, float(probs[idx]), RANDOM_FORGERY, top == idx))
    elif protocol == "skilled":
        for row in rows:
            if row.label != "forged":
                continue
            target = _class_index(model, row.writer)
            probs, top = _probs_for(model, row.values)
            trials.append(Trial(row.writer, float(probs[target]), SKILLED_FORGERY,
                                top == target))
    else:
        raise ValueError(f"unknown protocol {protocol!r}")
    return trials


def classification_accuracy(model: MlpModel, rows) -> float:
    """Fraction of genuine rows whose top class is their own writer."""
    total = 0
    correct = 0
    for row in rows:
        if row.label != "genuine":
            continue
        own = _class_index(model, row.writer)
        _, top = _probs_for(model, row.values)
        total += 1
        correct += int(top == own)
    if total == 0:
        raise OneSidedTrials("no genuine rows to score")
    return correct / total


def accepted(trial: Trial, threshold: float) -> bool:
    return trial.predicted_match and trial.score >= threshold


def far_frr(trials, thresholds=None) -> ErrorCurve:
    """FAR and FRR at each threshold; defaults to the exact step curve over
    the observed scores plus the 0 and 1 endpoints."""
    genuine = [t for t in trials if t.truth == GENUINE]
    forgeries = [t for t in trials if t.truth != GENUINE]
    if not genuine or not forgeries:
        raise OneSidedTrials("need both genuine and forgery trials")
    if thresholds is None:
        grid = sorted({t.score for t in trials} | {0.0, 1.0})
    else:
        grid = sorted(float(t) for t in thresholds)
    ths = np.array(grid, dtype=np.float64)
    # a trial whose top class misses the claim is rejected at every threshold;
    # fold that in as a score below the grid
    g_scores = np.sort([t.score if t.predicted_match else -1.0 for t in genuine])
    f_scores = np.sort([t.score if t.predicted_match else -1.0 for t in forgeries])
    far = (f_scores.size - np.searchsorted(f_scores, ths, side="left")) / f_scores.size
    frr = np.searchsorted(g_scores, ths, side="left") / g_scores.size
    return ErrorCurve(ths, far.astype(np.float64), frr.astype(np.float64))


def eer_point(curve: ErrorCurve):
    """(EER, threshold) where FAR meets FRR, linearly interpolated between the
    bracketing grid points. When FAR and FRR are exactly equal over a run of
    thresholds (separable scores), the operating threshold is the middle of
    that run."""
    d = curve.far - curve.frr

    def plateau_mid(start):
        end = start
        while end + 1 < d.size and d[end + 1] == 0.0:
            end += 1
        eer_val = float(curve.far[start])
        return eer_val, float((curve.thresholds[start] + curve.thresholds[end]) / 2.0)

    if np.all(d < 0):
        return float((curve.far[0] + curve.frr[0]) / 2.0), float(curve.thresholds[0])
    if np.all(d > 0):
        return float((curve.far[-1] + curve.frr[-1]) / 2.0), float(curve.thresholds[-1])
    # first index where FAR has fallen to or below FRR
    idx = int(np.nonzero(d <= 0)[0][0])
    if d[idx] == 0.0:
        return plateau_mid(idx)
    if idx == 0:
        return float((curve.far[0] + curve.frr[0]) / 2.0), float(curve.thresholds[0])
    d0, d1 = float(d[idx - 1]), float(d[idx])
    frac = d0 / (d0 - d1)
    eer_val = float(curve.far[idx - 1] + frac * (curve.far[idx] - curve.far[idx - 1]))
    thr = float(curve.thresholds[idx - 1]
                + frac * (curve.thresholds[idx] - curve.thresholds[idx - 1]))
    return eer_val, thr


def eer(curve: ErrorCurve) -> float:
    return eer_point(curve)[0]


def roc_auc(curve: ErrorCurve) -> float:
    """Trapezoidal area under TPR (= 1 - FRR) versus FPR (= FAR), anchored at
    (0,0) and (1,1)."""
    fpr = np.concatenate([[0.0], curve.far, [1.0]])
    tpr = np.concatenate([[0.0], 1.0 - curve.frr, [1.0]])
    order = np.lexsort((tpr, fpr))
    fpr, tpr = fpr[order], tpr[order]
    return float(np.sum((fpr[1:] - fpr[:-1]) * (tpr[1:] + tpr[:-1]) / 2.0))


def pca3(vectors):
    """Project row vectors onto their top three principal directions.

    Returns (projections n x 3, explained variance fractions of the three
    components). Component signs are fixed so the largest-magnitude loading
    is positive.
    """
    X = np.asarray(vectors, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 4:
        raise TooFewSamples("PCA needs at least 4 vectors")
    centered = X - X.mean(axis=0)
    _, svals, vt = np.linalg.svd(centered, full_matrices=False)
    comps = vt[:3].copy()
    for i in range(comps.shape[0]):
        j = int(np.argmax(np.abs(comps[i])))
        if comps[i, j] < 0:
            comps[i] = -comps[i]
    proj = centered @ comps.T
    total = float((svals ** 2).sum())
    if total == 0.0:
        explained = np.zeros(3)
    else:
        explained = (svals[:3] ** 2) / total
    if proj.shape[1] < 3:
        pad = 3 - proj.shape[1]
        proj = np.hstack([proj, np.zeros((proj.shape[0], pad))])
        explained = np.concatenate([explained, np.zeros(pad)])
    return proj, explained


def skilled_rejection_rate(trials, threshold: float) -> float:
    """Fraction of skilled-forgery trials rejected at the given threshold."""
    skilled = [t for t in trials if t.truth == SKILLED_FORGERY]
    if not skilled:
        raise OneSidedTrials("no skilled-forgery trials")
    return float(np.mean([not accepted(t, threshold) for t in skilled]))


def evaluate_model(model: MlpModel, test_rows, forged_rows=()):
    """Full verification report for a trained model.

    `test_rows` are held-out genuine feature rows; `forged_rows` (optional)
    are skilled forgeries. The error curve, EER and AUC come from the
    random-forgery protocol; accuracy_sf is the skilled rejection rate at
    the EER operating threshold (absent without forgeries).
    Returns (EvalReport, ErrorCurve).
    """
    genuine_test = [r for r in test_rows if r.label == "genuine"]
    accuracy_rf = classification_accuracy(model, genuine_test)
    curve = far_frr(make_trials(model, genuine_test, "random"))
    eer_value, eer_thr = eer_point(curve)
    auc = roc_auc(curve)
    accuracy_sf = None
    if forged_rows:
        skilled = make_trials(model, forged_rows, "skilled")
        accuracy_sf = skilled_rejection_rate(skilled, eer_thr)
    per_writer = {}
    for writer in sorted({r.writer for r in genuine_test}):
        subset = [r for r in genuine_test if r.writer == writer]
        per_writer[writer] = classification_accuracy(model, subset)
    report = EvalReport(accuracy_rf=accuracy_rf, accuracy_sf=accuracy_sf,
                        eer=eer_value, eer_threshold=eer_thr, auc=auc,
                        per_writer=per_writer)
    return report, curve
