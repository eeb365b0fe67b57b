"""Update-incremental vs restart-incremental, side by side.

The Bayesian path folds each word into a running posterior it never
recomputes; the classifier path reclassifies the whole prefix on every
edit. Both see the same words. This prints how each one's top intent and
confidence move as an utterance grows.

Usage: python demos/compare_strategies.py [--data data/snips_train.json]
"""

import argparse

from incnlu import EditType, default_config, load_dataset, train_pipeline

SIUM = "intent_sium"
BOW = "intent_classifier_bow"


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--data", default="data/snips_train.json")
    parser.add_argument("--utterance", default="will it rain in chicago tomorrow")
    args = parser.parse_args()

    print(f"training on {args.data} ...")
    interp = train_pipeline(default_config(), load_dataset(args.data))
    print()

    words = args.utterance.split()
    print(f"{'prefix':34s} {'update-incremental':28s} restart-incremental")
    interp.new_utterance()
    for i, word in enumerate(words):
        interp.parse_incremental(EditType.ADD, word)
        sium = interp.component_result(SIUM)
        bow = interp.component_result(BOW)
        prefix = " ".join(words[: i + 1])
        left = f"{sium.intent} {sium.intent_ranking[0][1]:.3f}"
        right = f"{bow.intent} {bow.intent_ranking[0][1]:.3f}"
        print(f"{prefix:34s} {left:28s} {right}")
    print()
    final = interp.current_result()
    print(f"final entities: {[(e.type, e.value) for e in final.entities]}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
