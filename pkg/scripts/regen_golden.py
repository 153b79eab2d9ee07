#!/usr/bin/env python3
"""Regenerate the committed golden pipeline outputs under tests/golden/stage1.

Run from the repo root after any intentional change to sampling, learning,
fitting, or report formats:

    python3 scripts/regen_golden.py

The end-to-end determinism test compares fresh pipeline runs byte-for-byte
against these files, so regenerate deliberately and review the diff.
"""

import shutil
import sys
from importlib import resources
from pathlib import Path

from cpscausal.cli import main

GOLDEN = Path(__file__).parent.parent / "tests" / "golden" / "stage1"


def run(argv: list[str]) -> None:
    code = main(argv)
    if code != 0:
        sys.exit(f"golden pipeline step failed ({code}): {argv}")


def pipeline(outdir: Path) -> None:
    outdir.mkdir(parents=True, exist_ok=True)
    attacks = resources.files("cpscausal").joinpath("data/attacks/stage1.json")
    with resources.as_file(attacks) as attacks_path:
        run(["sample", "--fixture", "stage1", "--n", "5000", "--seed", "7",
             "--out", str(outdir / "sample.csv"), "--spec-out", str(outdir / "stage1.vspec")])
        run(["discretize", "--input", str(outdir / "sample.csv"),
             "--spec", str(outdir / "stage1.vspec"), "--out", str(outdir / "dataset.json")])
        run(["learn", "--dataset", str(outdir / "dataset.json"), "--algo", "pc",
             "--alpha", "0.01", "--out", str(outdir / "graph.json")])
        run(["fit", "--dataset", str(outdir / "dataset.json"), "--graph", str(outdir / "graph.json"),
             "--estimator", "mle", "--out", str(outdir / "net.json")])
        run(["impact", "--net", str(outdir / "net.json"), "--attacks", str(attacks_path),
             "--theta", "0.9", "--out", str(outdir / "impact.json")])


if __name__ == "__main__":
    if GOLDEN.exists():
        shutil.rmtree(GOLDEN)
    pipeline(GOLDEN)
    print(f"golden files regenerated under {GOLDEN}")
