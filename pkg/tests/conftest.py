import time

import pytest

from sigver.cli import run

# the full synthetic benchmark: seeds and sizes are fixed, so every artifact
# below is a pure function of the code
E2E_SYNTH = ["synth", "--seed", "7", "--writers", "20", "--genuine", "20",
             "--forged", "10"]
E2E_TRAIN_SEED = "1"


def run_pipeline(base):
    """synth -> extract -> train -> eval under `base`; returns paths."""
    corpus = base / "corpus"
    feats = base / "feats.csv"
    model = base / "model.txt"
    report = base / "report"
    assert run(E2E_SYNTH + ["--out", str(corpus)]) == 0
    assert run(["extract", "--corpus", str(corpus), "--mode", "offline",
                "--out", str(feats)]) == 0
    assert run(["train", "--features", str(feats), "--seed", E2E_TRAIN_SEED,
                "--out", str(model)]) == 0
    assert run(["eval", "--features", str(feats), "--model", str(model),
                "--out", str(report)]) == 0
    return {"corpus": corpus, "feats": feats, "model": model, "report": report}


@pytest.fixture(scope="session")
def e2e(tmp_path_factory):
    """One full pipeline run shared by the acceptance criteria."""
    base = tmp_path_factory.mktemp("e2e")
    t0 = time.perf_counter()
    paths = run_pipeline(base)
    paths["elapsed"] = time.perf_counter() - t0
    return paths
