"""Print sentence attributions for a handful of screened articles.

Needs a bundle produced by run_experiment.py (or the CLI). Picks the first
few suspect predictions from a fresh synthetic corpus and shows which
sentences pushed the score, strongest first.

    python3 scripts/explain_examples.py --bundle results/bundle
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from litscreen.corpus import Label, generate_synthetic_corpus
from litscreen.explain import ExplanationMode, explain_prediction
from litscreen.models.bundle import load_bundle
from litscreen.pipeline import ScreeningEngine


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--bundle", default="results/bundle")
    ap.add_argument("--seed", type=int, default=11)
    ap.add_argument("--count", type=int, default=3)
    args = ap.parse_args()

    bundle = load_bundle(args.bundle)
    engine = ScreeningEngine(bundle)
    corpus = generate_synthetic_corpus(200, 0.3, seed=args.seed)

    shown = 0
    for item in corpus:
        doc, prediction = engine.screen(item.article)
        if prediction.label is not Label.SUSPECT_ADVERSE:
            continue
        explanation = explain_prediction(
            doc, bundle, mode=ExplanationMode.SAMPLED_LIME, sample_count=256
        )
        print(f"== {item.article.id} ({prediction.fired_rule.value}) "
              f"score_a={prediction.score_a:.3f} base={explanation.base_score:.3f}")
        for attr in explanation.attributions[: args.count]:
            sentence = doc.text[attr.span.start : attr.span.end]
            print(f"  {attr.influence:+.3f}  {sentence}")
        shown += 1
        if shown >= args.count:
            break
    if not shown:
        print("no suspect predictions in the sample")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
