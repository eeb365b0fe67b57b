"""Restart-incremental intent classification over prefix count vectors.

Multinomial logistic regression, trained by mini-batch gradient descent from
a zero initialization (the objective is convex, so the start point is not a
modelling choice). The classifier keeps no state between edits: every edit
reclassifies the current prefix vector as if it were a finished utterance,
which is exactly what makes its final incremental output equal the
non-incremental one.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .components import Component, TrainingContext, read_params, write_params
from .data import TrainingDataset
from .errors import ConfigError, ConsistencyError, DataError
from .features import Vocabulary, count_vector, tokenize
from .iu import COUNT_VECTOR, INTENT_DISTRIBUTION, Blackboard
from .results import rank_distribution

log = logging.getLogger(__name__)


@dataclass
class LinearIntentModel:
    intents: list[str]
    weights: np.ndarray  # (vocab size + 1, intent count); last row is the bias
    hyperparameters: dict


def _log_softmax(scores: np.ndarray) -> np.ndarray:
    shifted = scores - scores.max(axis=1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


def softmax(scores: np.ndarray) -> np.ndarray:
    return np.exp(_log_softmax(scores))


def loss_and_grad(
    weights: np.ndarray, inputs: np.ndarray, labels: np.ndarray, l2: float
) -> tuple[float, np.ndarray]:
    """Mean cross-entropy plus L2 on everything but the bias row.

    inputs already carry the constant-1 bias column. Shared by training and
    by the finite-difference check, so the gradient under test is the
    gradient actually descended.
    """
    n = inputs.shape[0]
    logp = _log_softmax(inputs @ weights)
    loss = -float(logp[np.arange(n), labels].mean())
    probs = np.exp(logp)
    probs[np.arange(n), labels] -= 1.0
    grad = inputs.T @ probs / n
    penalty = weights.copy()
    penalty[-1, :] = 0.0
    loss += 0.5 * l2 * float((penalty ** 2).sum())
    grad += l2 * penalty
    return loss, grad


def _augment(matrix: np.ndarray) -> np.ndarray:
    ones = np.ones((matrix.shape[0], 1), dtype=np.float64)
    return np.concatenate([matrix.astype(np.float64), ones], axis=1)


def train_classifier(
    dataset: TrainingDataset,
    vocab: Vocabulary,
    epochs: int = 50,
    lr: float = 0.1,
    l2: float = 1e-4,
    seed: int = 7,
    batch_size: int = 32,
) -> LinearIntentModel:
    if not dataset.examples:
        raise DataError("cannot train on an empty dataset")
    intents = dataset.intents
    if len(intents) < 2:
        log.warning("training an intent classifier on a single class %r", intents)
    label_index = {intent: i for i, intent in enumerate(intents)}

    rows = [
        count_vector(vocab, tokenize(ex.text, lowercase=vocab.lowercase))
        for ex in dataset.examples
    ]
    inputs = _augment(np.stack(rows))
    labels = np.array([label_index[ex.intent] for ex in dataset.examples], dtype=np.int64)

    weights = np.zeros((len(vocab) + 1, len(intents)), dtype=np.float64)
    rng = np.random.default_rng(seed)
    n = inputs.shape[0]
    for _ in range(epochs):
        order = rng.permutation(n)
        for lo in range(0, n, batch_size):
            batch = order[lo:lo + batch_size]
            _, grad = loss_and_grad(weights, inputs[batch], labels[batch], l2)
            weights = weights - lr * grad

    return LinearIntentModel(
        intents=intents,
        weights=weights,
        hyperparameters={
            "epochs": epochs, "lr": lr, "l2": l2, "seed": seed, "batch_size": batch_size,
        },
    )


def predict(model: LinearIntentModel, vec: np.ndarray) -> list[tuple[str, float]]:
    """Descending (intent, probability) ranking for one count vector."""
    if vec.shape != (model.weights.shape[0] - 1,):
        raise ConsistencyError(
            f"count vector of length {vec.shape[0]} against vocabulary of "
            f"{model.weights.shape[0] - 1}"
        )
    scores = _augment(vec[None, :]) @ model.weights
    probs = softmax(scores)[0]
    return rank_distribution(model.intents, probs)


class BowIntentClassifier(Component):
    """Stateless per-edit reclassification of the prefix count vector."""

    name = "intent_classifier_bow"
    provides = (INTENT_DISTRIBUTION,)
    requires = (COUNT_VECTOR,)
    defaults = {"epochs": 50, "lr": 0.1, "l2": 1e-4, "seed": 7, "batch_size": 32}

    def __init__(self, params=None) -> None:
        super().__init__(params)
        self.model: LinearIntentModel | None = None

    def train(self, dataset, ctx: TrainingContext) -> None:
        if ctx.vocabulary is None:
            raise ConfigError(
                "intent_classifier_bow needs featurizer_count_vectors earlier in the pipeline"
            )
        self.model = train_classifier(
            dataset,
            ctx.vocabulary,
            epochs=self.params["epochs"],
            lr=self.params["lr"],
            l2=self.params["l2"],
            seed=self.params["seed"],
            batch_size=self.params["batch_size"],
        )

    def process(self, board: Blackboard, edit=None, word=None) -> None:
        if self.model is None:
            raise ConsistencyError("intent_classifier_bow used before training or loading")
        vec = board.annotations.get(COUNT_VECTOR)
        if vec is None:
            raise ConfigError(
                "no count vector on the blackboard; is featurizer_count_vectors "
                "ahead of intent_classifier_bow?"
            )
        board.write(self.name, INTENT_DISTRIBUTION, predict(self.model, np.asarray(vec)))

    def new_utterance(self) -> None:
        pass

    def persist(self, directory: Path) -> None:
        write_params(directory, self.params)
        model = self.model
        if model is None:
            raise ConsistencyError("cannot persist an untrained intent_classifier_bow")
        lines = ["\t".join(model.intents)]
        for row in model.weights:
            lines.append("\t".join(repr(float(v)) for v in row))
        (directory / "weights.tsv").write_text("\n".join(lines) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, directory: Path, params) -> "BowIntentClassifier":
        comp = cls(read_params(directory))
        lines = (directory / "weights.tsv").read_text(encoding="utf-8").splitlines()
        intents = lines[0].split("\t")
        weights = np.array(
            [[float(v) for v in line.split("\t")] for line in lines[1:] if line],
            dtype=np.float64,
        )
        if weights.shape[1] != len(intents):
            raise ConsistencyError("weight matrix width does not match intents header")
        comp.model = LinearIntentModel(
            intents=intents,
            weights=weights,
            hyperparameters={k: comp.params[k] for k in cls.defaults},
        )
        return comp
