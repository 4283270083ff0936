"""Command-line front end: synth, extract, train, eval, verify.

Exit codes: 0 success, 1 usage error, 2 data error. Results go to files or
stdout; diagnostics go to stderr. All randomness hangs off explicit --seed
flags, so identical invocations produce byte-identical outputs.
"""

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import ann, dataset, evaluate, features
from .errors import SigverError
from .preprocess import PreprocessMode, preprocess
from .raster import load_gray


def _say(msg):
    print(msg, file=sys.stderr)


def extract_features(manifest: dataset.Manifest, jobs: int = 1):
    """(entry, vector) pairs in manifest order, regardless of worker count."""
    root = Path(manifest.root)

    def one(entry):
        img = load_gray((root / entry.path).read_bytes())
        return features.extract(preprocess(img, manifest.mode))

    if jobs <= 1:
        vecs = [one(e) for e in manifest.entries]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            vecs = list(pool.map(one, manifest.entries))
    return list(zip(manifest.entries, vecs))


def _manifest_from_rows(rows):
    entries = tuple(dataset.Entry(r.path, r.writer, r.label) for r in rows)
    return dataset.Manifest(root="", entries=entries)


def _cmd_synth(args):
    manifest = dataset.generate_synthetic(
        args.seed, args.writers, args.genuine, args.forged, args.out)
    for e in manifest.entries:
        print(f"{e.path}\t{e.writer}\t{e.label}")
    _say(f"wrote {len(manifest.entries)} images for "
         f"{len(manifest.writers)} writers under {args.out}")
    return 0


def _cmd_extract(args):
    mode = PreprocessMode(args.mode)
    manifest = dataset.scan_corpus(args.corpus, mode)
    rows = extract_features(manifest, jobs=args.jobs)
    dataset.write_features(args.out, rows)
    _say(f"extracted {len(rows)} feature vectors -> {args.out}")
    return 0


def _training_rows(rows, seed):
    """Genuine rows of the train+val side of the deterministic split."""
    sp = dataset.split(_manifest_from_rows(rows), seed)
    keep = {e.path for e in sp.train} | {e.path for e in sp.val}
    return [r for r in rows if r.path in keep and r.label == "genuine"]


def _cmd_train(args):
    rows = dataset.read_features(args.features)
    train_rows = _training_rows(rows, args.seed)
    labels = sorted({r.writer for r in train_rows})
    stats = features.fit_normalizer([r.values for r in train_rows])
    X = features.apply_normalizer(stats, np.array([r.values for r in train_rows]))
    y = np.array([labels.index(r.writer) for r in train_rows], dtype=np.int64)
    model = ann.init_model(len(labels), args.seed, n_inputs=X.shape[1])
    model = replace(model, class_labels=tuple(labels),
                    norm_mean=stats.mean, norm_std=stats.std)
    trained, history = ann.scg_train(model, X, y, ann.TrainOptions(seed=args.seed))
    Path(args.out).write_bytes(ann.save_model(trained))
    last_acc = history.val_accuracy[-1] if history.val_accuracy else float("nan")
    _say(f"trained {X.shape[1]}->{trained.n_hidden}->{len(labels)} on "
         f"{X.shape[0]} samples, {len(history.train_loss)} iterations, "
         f"stop={history.stop_reason}, val_acc={last_acc:.4f} -> {args.out}")
    return 0


def _fmt_float(v):
    return repr(float(v))


def _cmd_eval(args):
    rows = dataset.read_features(args.features)
    model = ann.load_model(Path(args.model).read_bytes())
    sp = dataset.split(_manifest_from_rows(rows), model.seed)
    test_paths = {e.path for e in sp.test}
    test_rows = [r for r in rows if r.path in test_paths and r.label == "genuine"]
    forged_rows = [r for r in rows if r.label == "forged"]
    report, curve = evaluate.evaluate_model(model, test_rows, forged_rows)

    norm = features.Normalizer(model.norm_mean, model.norm_std)
    all_vecs = features.apply_normalizer(norm, np.array([r.values for r in rows]))
    proj, explained = evaluate.pca3(all_vecs)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    lines = [f"accuracy_rf={_fmt_float(report.accuracy_rf)}"]
    if report.accuracy_sf is not None:
        lines.append(f"accuracy_sf={_fmt_float(report.accuracy_sf)}")
    lines.append(f"auc={_fmt_float(report.auc)}")
    lines.append(f"eer={_fmt_float(report.eer)}")
    lines.append(f"eer_threshold={_fmt_float(report.eer_threshold)}")
    for i in range(3):
        lines.append(f"pca_explained_{i + 1}={_fmt_float(explained[i])}")
    for writer, acc in report.per_writer.items():
        lines.append(f"writer_accuracy.{writer}={_fmt_float(acc)}")
    (out / "report.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")

    roc_lines = ["threshold,far,frr"]
    roc_lines.extend(
        f"{_fmt_float(t)},{_fmt_float(fa)},{_fmt_float(fr)}"
        for t, fa, fr in zip(curve.thresholds, curve.far, curve.frr))
    (out / "roc.csv").write_text("\n".join(roc_lines) + "\n", encoding="utf-8")

    pca_lines = ["writer,label,pc1,pc2,pc3"]
    pca_lines.extend(
        f"{r.writer},{r.label},{_fmt_float(p[0])},{_fmt_float(p[1])},{_fmt_float(p[2])}"
        for r, p in zip(rows, proj))
    (out / "pca3.csv").write_text("\n".join(pca_lines) + "\n", encoding="utf-8")

    _say(f"accuracy_rf={report.accuracy_rf:.4f} eer={report.eer:.4f} "
         f"auc={report.auc:.4f}"
         + (f" accuracy_sf={report.accuracy_sf:.4f}"
            if report.accuracy_sf is not None else "")
         + f" -> {out}")
    return 0


def _cmd_verify(args):
    model = ann.load_model(Path(args.model).read_bytes())
    img = load_gray(Path(args.image).read_bytes())
    vec = features.extract(preprocess(img, PreprocessMode.OFFLINE))
    norm = features.Normalizer(model.norm_mean, model.norm_std)
    label, score = ann.predict(model, features.apply_normalizer(norm, vec))
    if args.claim not in model.class_labels:
        _say(f"warning: claimed writer {args.claim!r} unknown to the model")
    ok = label == args.claim and score >= args.threshold
    print(f"{'ACCEPT' if ok else 'REJECT'} {_fmt_float(score)}")
    return 0


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="sigver",
        description="Offline signature verification with block-geometric features")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic corpus")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--writers", type=int, required=True)
    p.add_argument("--genuine", type=int, required=True)
    p.add_argument("--forged", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("extract", help="preprocess a corpus and write feature CSV")
    p.add_argument("--corpus", required=True)
    p.add_argument("--mode", choices=["offline", "online"], default="offline")
    p.add_argument("--out", required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=_cmd_extract)

    p = sub.add_parser("train", help="train the classifier on extracted features")
    p.add_argument("--features", required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("eval", help="evaluate a trained model")
    p.add_argument("--features", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("verify", help="verify one image against a claimed writer")
    p.add_argument("--model", required=True)
    p.add_argument("--image", required=True)
    p.add_argument("--claim", required=True)
    p.add_argument("--threshold", type=float, required=True)
    p.set_defaults(func=_cmd_verify)
    return parser


def run(argv) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        return args.func(args)
    except SigverError as exc:
        _say(f"error: {exc}")
        return 2
    except OSError as exc:
        _say(f"error: {exc}")
        return 2


def main():
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
