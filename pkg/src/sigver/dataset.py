"""Corpus scanning, deterministic splits, feature CSV persistence and a
synthetic signature generator.

Corpus layout on disk:

    root/<writer>/genuine/*.pgm
    root/<writer>/forged/*.pgm      (optional)

The generator draws smooth multi-stroke "signatures" from a per-writer style
so the pipeline can be exercised end to end without licensed corpora. It
makes no claim of realism beyond: samples of one writer resemble each other,
writers differ, and forgeries are noisier copies of the target's style.
Everything is a pure function of the seeds.
"""

import csv
import io
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .errors import (
    EmptyCorpus,
    IOFailure,
    MalformedCsv,
    TooFewSamples,
    WriterWithoutGenuine,
    WrongColumnCount,
)
from .features import VECTOR_LENGTH
from .preprocess import PreprocessMode
from .raster import save_gray

SYNTH_HEIGHT = 300
SYNTH_WIDTH = 400


class Entry(NamedTuple):
    path: str      # POSIX-style, relative to the corpus root
    writer: str
    label: str     # "genuine" | "forged"


@dataclass(frozen=True)
class Manifest:
    root: str
    entries: tuple
    mode: PreprocessMode = PreprocessMode.OFFLINE

    @property
    def writers(self):
        return tuple(sorted({e.writer for e in self.entries}))


@dataclass(frozen=True)
class Split:
    train: tuple
    val: tuple
    test: tuple
    seed: int


def scan_corpus(root, mode: PreprocessMode = PreprocessMode.OFFLINE) -> Manifest:
    """Deterministic manifest of the corpus under `root`."""
    root = Path(root)
    writers = sorted(p.name for p in root.iterdir() if p.is_dir()) if root.is_dir() else []
    if not writers:
        raise EmptyCorpus(f"no writer directories under {root}")
    entries = []
    for writer in writers:
        genuine = sorted((root / writer / "genuine").glob("*.pgm"))
        if not genuine:
            raise WriterWithoutGenuine(f"writer {writer!r} has no genuine samples")
        for f in genuine:
            entries.append(Entry(f"{writer}/genuine/{f.name}", writer, "genuine"))
        for f in sorted((root / writer / "forged").glob("*.pgm")):
            entries.append(Entry(f"{writer}/forged/{f.name}", writer, "forged"))
    entries.sort(key=lambda e: e.path)
    return Manifest(root=str(root), entries=tuple(entries), mode=mode)


def split(manifest: Manifest, seed: int, fractions=(0.70, 0.15, 0.15)) -> Split:
    """Stratified per-writer split of the genuine samples; forged samples go
    to the test side only.

    Per writer the seeded shuffle is cut as [train | val | test] with
    n_val = floor(val_fraction * n) and n_test = ceil(test_fraction * n);
    the remainder stays in train.
    """
    _, val_frac, test_frac = fractions
    train, val, test = [], [], []
    writers = manifest.writers
    for widx, writer in enumerate(writers):
        genuine = sorted(e for e in manifest.entries
                         if e.writer == writer and e.label == "genuine")
        n = len(genuine)
        if n < 3:
            raise TooFewSamples(f"writer {writer!r} has {n} genuine samples, needs 3")
        n_val = int(val_frac * n)
        n_test = int(np.ceil(test_frac * n))
        n_train = n - n_val - n_test
        if n_train < 1:
            raise TooFewSamples(f"fractions leave writer {writer!r} without training samples")
        rng = np.random.default_rng([seed, widx])
        perm = rng.permutation(n)
        train.extend(genuine[i] for i in perm[:n_train])
        val.extend(genuine[i] for i in perm[n_train:n_train + n_val])
        test.extend(genuine[i] for i in perm[n_train + n_val:])
    test.extend(e for e in manifest.entries if e.label == "forged")
    key = lambda e: e.path
    return Split(tuple(sorted(train, key=key)), tuple(sorted(val, key=key)),
                 tuple(sorted(test, key=key)), seed)


@dataclass(frozen=True)
class WriterStyle:
    """Seeded per-writer drawing parameters."""
    strokes: tuple          # per stroke: (m, 2) control points in unit coords
    thickness: tuple        # per stroke: stamp radius in pixels
    ink: tuple              # per stroke: ink intensity 0..80
    jitter: float           # control-point jitter amplitude, unit coords
    slant: float            # horizontal shear factor
    scale: float            # fraction of the drawable box used
    dot_prob: float
    dots: tuple             # candidate dot positions, unit coords

    @staticmethod
    def from_seed(corpus_seed: int, writer_index: int) -> "WriterStyle":
        # styles come from a deliberately narrow family: like real signatures,
        # writers resemble each other, so the classifier has to work near its
        # decision boundaries instead of memorizing far-apart clusters
        rng = np.random.default_rng([corpus_seed, writer_index])
        n_strokes = int(rng.integers(3, 5))
        strokes, thickness, ink = [], [], []
        baseline = rng.uniform(0.45, 0.55)
        for _ in range(n_strokes):
            m = int(rng.integers(3, 6))
            x0 = rng.uniform(0.05, 0.35)
            span = rng.uniform(0.4, min(0.95 - x0, 0.6))
            xs = np.sort(rng.uniform(x0, x0 + span, size=m))
            ys = np.clip(baseline + rng.normal(0.0, 0.10, size=m), 0.02, 0.98)
            strokes.append(np.column_stack([xs, ys]))
            thickness.append(int(rng.integers(1, 4)))
            ink.append(int(rng.integers(5, 70)))
        return WriterStyle(
            strokes=tuple(strokes),
            thickness=tuple(thickness),
            ink=tuple(ink),
            jitter=float(rng.uniform(0.008, 0.016)),
            slant=float(rng.uniform(-0.08, 0.08)),
            scale=float(rng.uniform(0.74, 0.80)),
            dot_prob=float(rng.uniform(0.0, 0.5)),
            dots=tuple(map(tuple, rng.uniform(0.1, 0.9, size=(int(rng.integers(0, 4)), 2)))),
        )


def _smooth_path(pts):
    """Dense samples along a quadratic Bezier chain through the control
    points (anchors at the first/last point and at segment midpoints)."""
    pts = np.asarray(pts, dtype=np.float64)
    if pts.shape[0] == 1:
        return pts
    if pts.shape[0] == 2:
        t = np.linspace(0.0, 1.0, 32)[:, None]
        return pts[0] * (1 - t) + pts[1] * t
    anchors = [pts[0]]
    anchors.extend((pts[i] + pts[i + 1]) / 2.0 for i in range(1, pts.shape[0] - 2))
    anchors.append(pts[-1])
    out = []
    for i in range(len(anchors) - 1):
        a, c, b = anchors[i], pts[i + 1], anchors[i + 1]
        t = np.linspace(0.0, 1.0, 48)[:, None]
        out.append((1 - t) ** 2 * a + 2 * (1 - t) * t * c + t ** 2 * b)
    return np.vstack(out)


def _stamp(canvas, points_px, radius, value):
    """Darken disks of `radius` at each point; ink never lightens a pixel."""
    h, w = canvas.shape
    rows = np.clip(np.rint(points_px[:, 1]).astype(np.int64), 0, h - 1)
    cols = np.clip(np.rint(points_px[:, 0]).astype(np.int64), 0, w - 1)
    for di in range(-radius, radius + 1):
        for dj in range(-radius, radius + 1):
            if di * di + dj * dj > radius * radius:
                continue
            rr = np.clip(rows + di, 0, h - 1)
            cc = np.clip(cols + dj, 0, w - 1)
            np.minimum.at(canvas, (rr, cc), value)


def render_sample(style: WriterStyle, rng: np.random.Generator, forged: bool) -> np.ndarray:
    """One grayscale sample of the writer's style.

    Forged samples double the control-point jitter and botch the longest
    stroke (displaced, rescaled and roughened): the overall shape survives
    but its geometry is off, the way a practiced copy differs from the hand
    that owns it.
    """
    canvas = np.full((SYNTH_HEIGHT, SYNTH_WIDTH), 255, dtype=np.uint8)
    jitter = style.jitter * (2.0 if forged else 1.0)
    bad_stroke = -1
    if forged:
        spans = [pts[:, 0].max() - pts[:, 0].min() for pts in style.strokes]
        bad_stroke = int(np.argmax(spans))
    shift = rng.normal(0.0, 0.015, size=2)
    for s_idx, pts in enumerate(style.strokes):
        pts = pts + rng.normal(0.0, jitter, size=pts.shape) + shift
        if s_idx == bad_stroke:
            center = pts.mean(axis=0)
            pts = center + (pts - center) * rng.uniform(0.35, 1.9)
            pts = pts + rng.normal(0.0, 0.25, size=2)
            pts = pts + rng.normal(0.0, 0.07, size=pts.shape)
        # shear, then scale into the drawable box
        xs = pts[:, 0] + style.slant * (pts[:, 1] - 0.5)
        ys = pts[:, 1]
        margin_x = (1.0 - style.scale) / 2.0 + 0.05
        margin_y = (1.0 - style.scale) / 2.0 + 0.05
        px = (margin_x + np.clip(xs, -0.2, 1.2) * style.scale) * (SYNTH_WIDTH - 1)
        py = (margin_y + np.clip(ys, -0.2, 1.2) * style.scale) * (SYNTH_HEIGHT - 1)
        path = _smooth_path(np.column_stack([px, py]))
        _stamp(canvas, path, style.thickness[s_idx], style.ink[s_idx])
    for dot in style.dots:
        if rng.uniform() < style.dot_prob:
            dx = (0.075 + dot[0] * 0.85) * (SYNTH_WIDTH - 1)
            dy = (0.075 + dot[1] * 0.85) * (SYNTH_HEIGHT - 1)
            _stamp(canvas, np.array([[dx, dy]]), 2, 30)
    # acquisition artifacts: a handful of salt/pepper specks (the median
    # filter is expected to remove the isolated ones)
    n_specks = int(rng.integers(0, 25))
    if n_specks:
        rr = rng.integers(0, SYNTH_HEIGHT, size=n_specks)
        cc = rng.integers(0, SYNTH_WIDTH, size=n_specks)
        vals = rng.integers(0, 40, size=n_specks).astype(np.uint8)
        canvas[rr, cc] = vals
    return canvas


def generate_synthetic(seed: int, n_writers: int, genuine_per_writer: int,
                       forged_per_writer: int, out_dir) -> Manifest:
    """Write a synthetic corpus under `out_dir` and return its manifest.
    Regenerating with the same arguments is byte-identical."""
    if n_writers < 2:
        raise TooFewSamples("need at least 2 writers")
    if genuine_per_writer < 1:
        raise TooFewSamples("need at least 1 genuine sample per writer")
    out_dir = Path(out_dir)
    width = max(2, len(str(n_writers - 1)))
    try:
        for widx in range(n_writers):
            writer = f"w{widx:0{width}d}"
            style = WriterStyle.from_seed(seed, widx)
            gdir = out_dir / writer / "genuine"
            gdir.mkdir(parents=True, exist_ok=True)
            for sidx in range(genuine_per_writer):
                rng = np.random.default_rng([seed, widx, 1, sidx])
                img = render_sample(style, rng, forged=False)
                (gdir / f"g{sidx:03d}.pgm").write_bytes(save_gray(img))
            if forged_per_writer > 0:
                fdir = out_dir / writer / "forged"
                fdir.mkdir(parents=True, exist_ok=True)
                for sidx in range(forged_per_writer):
                    rng = np.random.default_rng([seed, widx, 2, sidx])
                    img = render_sample(style, rng, forged=True)
                    (fdir / f"f{sidx:03d}.pgm").write_bytes(save_gray(img))
    except OSError as exc:
        raise IOFailure(f"cannot write corpus: {exc}") from exc
    manifest = scan_corpus(out_dir)
    try:
        write_manifest(out_dir / "manifest.tsv", manifest)
    except OSError as exc:
        raise IOFailure(f"cannot write manifest: {exc}") from exc
    return manifest


def write_manifest(path, manifest: Manifest) -> None:
    lines = [f"{e.path}\t{e.writer}\t{e.label}" for e in manifest.entries]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


class FeatureRow(NamedTuple):
    path: str
    writer: str
    label: str
    values: np.ndarray


FEATURE_HEADER = ["path", "writer", "label"] + [f"f{i:03d}" for i in range(VECTOR_LENGTH)]


def write_features(path, rows) -> None:
    """CSV of (entry, vector) pairs; floats as shortest round-trip decimals."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(FEATURE_HEADER)
    for entry, vec in rows:
        vec = np.asarray(vec, dtype=np.float64)
        if vec.shape != (VECTOR_LENGTH,):
            raise WrongColumnCount(f"vector for {entry.path} has length {vec.size}")
        writer.writerow([entry.path, entry.writer, entry.label]
                        + [repr(float(v)) for v in vec])
    Path(path).write_text(buf.getvalue(), encoding="utf-8")


def read_features(path) -> list:
    """Rows of a feature CSV; values round-trip exactly."""
    text = Path(path).read_text(encoding="utf-8")
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise MalformedCsv("empty feature file") from None
    if header != FEATURE_HEADER:
        raise MalformedCsv("unexpected feature CSV header")
    rows = []
    for lineno, rec in enumerate(reader, start=2):
        if not rec:
            continue
        if len(rec) != len(FEATURE_HEADER):
            raise WrongColumnCount(f"line {lineno}: {len(rec)} columns")
        p, writer, label = rec[0], rec[1], rec[2]
        if label not in ("genuine", "forged"):
            raise MalformedCsv(f"line {lineno}: bad label {label!r}")
        try:
            values = np.array([float(v) for v in rec[3:]], dtype=np.float64)
        except ValueError:
            raise MalformedCsv(f"line {lineno}: non-numeric feature") from None
        rows.append(FeatureRow(p, writer, label, values))
    return rows
