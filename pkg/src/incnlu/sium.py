"""Update-incremental Bayesian intent understanding.

Each incoming word multiplies per-intent word likelihoods into a running
posterior, kept in log space. The model never reprocesses the prefix on an
add; a revoke rebuilds the accumulator by refolding the surviving token
history with the same left-to-right additions a clean run would perform, so
an add/revoke pair leaves state bit-identical to never having added at all.

Entities are read off per token: a word whose entity-class posterior clears
a confidence threshold is labelled with its argmax class, and adjacent
same-class words merge into one span.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .components import Component, TrainingContext, read_params, write_params
from .data import NO_ENTITY, TrainingDataset, token_entity_classes
from .errors import ConsistencyError, DataError, ParameterError
from .features import tokenize
from .iu import ENTITIES, INTENT_DISTRIBUTION, TOKENS, Blackboard, EditType
from .results import EntitySpan, rank_distribution

OOV = "__OOV__"


@dataclass
class SiumModel:
    """Smoothed count model over words, conditioned on intent and entity class.

    Likelihood tables hold one row per training word plus a final row for
    unseen words; probabilities are add-alpha smoothed against the training
    vocabulary size so every row is strictly positive.
    """

    intents: list[str]
    entity_classes: list[str]
    word_index: dict[str, int]
    alpha: float
    entity_threshold: float
    lowercase: bool
    log_word_given_intent: np.ndarray
    log_word_given_entity: np.ndarray
    log_intent_prior: np.ndarray
    log_entity_prior: np.ndarray

    def row(self, word: str) -> int:
        if self.lowercase:
            word = word.lower()
        return self.word_index.get(word, len(self.word_index))

    def intent_loglik(self, word: str) -> np.ndarray:
        return self.log_word_given_intent[self.row(word)]

    def entity_posterior(self, word: str) -> np.ndarray:
        """Normalized class posterior from this single word."""
        score = self.log_entity_prior + self.log_word_given_entity[self.row(word)]
        score = score - score.max()
        probs = np.exp(score)
        return probs / probs.sum()


def _smoothed_log_table(
    counts: dict[str, dict[str, int]],
    labels: list[str],
    word_index: dict[str, int],
    alpha: float,
) -> np.ndarray:
    """Rows are words (last row unseen), columns labels, entries log probs."""
    n_rows = len(word_index) + 1
    table = np.zeros((n_rows, len(labels)), dtype=np.float64)
    for col, label in enumerate(labels):
        label_counts = counts.get(label, {})
        total = sum(label_counts.values())
        denom = total + alpha * (len(word_index) + 1)
        for word, idx in word_index.items():
            table[idx, col] = math.log((label_counts.get(word, 0) + alpha) / denom)
        table[n_rows - 1, col] = math.log(alpha / denom)
    return table


def train_sium(
    dataset: TrainingDataset,
    alpha: float = 1.0,
    entity_threshold: float = 0.6,
    lowercase: bool = True,
) -> SiumModel:
    if alpha <= 0:
        raise ParameterError(f"smoothing alpha must be positive, got {alpha}")
    if not 0.0 <= entity_threshold <= 1.0:
        raise ParameterError(f"entity_threshold must be in [0, 1], got {entity_threshold}")
    if not dataset.examples:
        raise DataError("cannot train on an empty dataset")

    word_index: dict[str, int] = {}
    intent_counts: dict[str, dict[str, int]] = defaultdict(lambda: defaultdict(int))
    entity_counts: dict[str, dict[str, int]] = defaultdict(lambda: defaultdict(int))
    for ex in dataset.examples:
        tokens, classes = token_entity_classes(ex.text, ex.entities, lowercase=lowercase)
        for token, cls in zip(tokens, classes):
            if token not in word_index:
                word_index[token] = len(word_index)
            intent_counts[ex.intent][token] += 1
            entity_counts[cls][token] += 1

    intents = dataset.intents
    entity_classes = dataset.entity_types + [NO_ENTITY]
    model = SiumModel(
        intents=intents,
        entity_classes=entity_classes,
        word_index=word_index,
        alpha=alpha,
        entity_threshold=entity_threshold,
        lowercase=lowercase,
        log_word_given_intent=_smoothed_log_table(intent_counts, intents, word_index, alpha),
        log_word_given_entity=_smoothed_log_table(entity_counts, entity_classes, word_index, alpha),
        log_intent_prior=np.full(len(intents), -math.log(len(intents))),
        log_entity_prior=np.full(len(entity_classes), -math.log(len(entity_classes))),
    )
    for table, labels in (
        (model.log_word_given_intent, intents),
        (model.log_word_given_entity, entity_classes),
    ):
        sums = np.exp(table).sum(axis=0)
        if not np.allclose(sums, 1.0, atol=1e-9):
            raise ConsistencyError(
                f"likelihood table for {labels} does not normalize: {sums}"
            )
    return model


@dataclass
class SiumState:
    """Running posterior over one utterance."""

    model: SiumModel
    tokens: list[str] = field(default_factory=list)
    log_scores: np.ndarray = None
    entity_probs: list[np.ndarray] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.log_scores is None:
            self.log_scores = self.model.log_intent_prior.copy()

    def add(self, word: str) -> None:
        if self.model.lowercase:
            word = word.lower()
        self.tokens.append(word)
        self.log_scores = self.log_scores + self.model.intent_loglik(word)
        self.entity_probs.append(self.model.entity_posterior(word))

    def revoke(self, word: str) -> None:
        if not self.tokens:
            raise ConsistencyError("revoke with no accumulated words")
        if self.model.lowercase:
            word = word.lower()
        top = self.tokens.pop()
        if top != word:
            raise ConsistencyError(f"revoke of {word!r} but last accumulated word was {top!r}")
        self.entity_probs.pop()
        # Refold instead of subtracting: float subtraction is not an exact
        # inverse of addition, and the accumulator must match a clean run bit
        # for bit.
        scores = self.model.log_intent_prior.copy()
        for token in self.tokens:
            scores = scores + self.model.intent_loglik(token)
        self.log_scores = scores

    def reset(self) -> None:
        self.tokens = []
        self.log_scores = self.model.log_intent_prior.copy()
        self.entity_probs = []


def classify(state: SiumState) -> np.ndarray:
    """Posterior over intents, normalized to sum to one."""
    scores = state.log_scores - state.log_scores.max()
    probs = np.exp(scores)
    return probs / probs.sum()


def batch_posterior(model: SiumModel, words: list[str]) -> np.ndarray:
    """Whole-utterance posterior, folding words the same way the state does."""
    state = SiumState(model)
    for word in words:
        state.add(word)
    return classify(state)


def sium_entities(state: SiumState, threshold: float | None = None) -> list[EntitySpan]:
    """Threshold the per-word class posteriors and merge adjacent matches.

    A word is labelled only when its best non-null class is strictly above
    the threshold; a span's confidence is its weakest word.
    """
    model = state.model
    if threshold is None:
        threshold = model.entity_threshold
    picks: list[tuple[str, float] | None] = []
    for probs in state.entity_probs:
        best = int(np.argmax(probs))
        cls = model.entity_classes[best]
        conf = float(probs[best])
        if cls == NO_ENTITY or conf <= threshold:
            picks.append(None)
        else:
            picks.append((cls, conf))

    spans = []
    i = 0
    while i < len(picks):
        if picks[i] is None:
            i += 1
            continue
        cls = picks[i][0]
        j = i
        conf = picks[i][1]
        while j + 1 < len(picks) and picks[j + 1] is not None and picks[j + 1][0] == cls:
            j += 1
            conf = min(conf, picks[j][1])
        spans.append(
            EntitySpan(
                type=cls,
                value=" ".join(state.tokens[i:j + 1]),
                start=i,
                end=j + 1,
                confidence=conf,
            )
        )
        i = j + 1
    return spans


class SiumIntent(Component):
    """Update-incremental intent and entity component."""

    name = "intent_sium"
    provides = (INTENT_DISTRIBUTION, ENTITIES)
    requires = (TOKENS,)
    defaults = {"alpha": 1.0, "entity_threshold": 0.6, "lowercase": True}

    def __init__(self, params=None) -> None:
        super().__init__(params)
        if self.params["alpha"] <= 0:
            raise ParameterError(f"smoothing alpha must be positive, got {self.params['alpha']}")
        if not 0.0 <= self.params["entity_threshold"] <= 1.0:
            raise ParameterError(
                f"entity_threshold must be in [0, 1], got {self.params['entity_threshold']}"
            )
        self.model: SiumModel | None = None
        self._state: SiumState | None = None

    def train(self, dataset, ctx: TrainingContext) -> None:
        self.model = train_sium(
            dataset,
            alpha=self.params["alpha"],
            entity_threshold=self.params["entity_threshold"],
            lowercase=self.params["lowercase"],
        )

    def _require_state(self) -> SiumState:
        if self.model is None:
            raise ConsistencyError("intent_sium used before training or loading")
        if self._state is None:
            self._state = SiumState(self.model)
        return self._state

    def posterior(self) -> np.ndarray:
        """Current normalized intent posterior, aligned to model.intents."""
        return classify(self._require_state())

    def process(self, board: Blackboard, edit=None, word=None) -> None:
        state = self._require_state()
        if edit is EditType.ADD:
            state.add(word)
        elif edit is EditType.REVOKE:
            state.revoke(word)
        else:
            state.reset()
            for token in board.annotations.get(TOKENS, []):
                state.add(token)
        probs = classify(state)
        board.write(self.name, INTENT_DISTRIBUTION, rank_distribution(self.model.intents, probs))
        board.write(self.name, ENTITIES, sium_entities(state))

    def new_utterance(self) -> None:
        # Reassign rather than reset in place: fresh() shallow-copies the
        # component, and the copy must not clobber the original's state.
        self._state = None

    # -- persistence ---------------------------------------------------

    def persist(self, directory: Path) -> None:
        write_params(directory, self.params)
        model = self.model
        if model is None:
            raise ConsistencyError("cannot persist an untrained intent_sium")
        lines = ["[intents]"]
        lines.extend(model.intents)
        lines.append("[entity_classes]")
        lines.extend(model.entity_classes)
        lines.append("[vocabulary]")
        lines.extend(f"{w}\t{i}" for w, i in sorted(model.word_index.items()))
        lines.append("[word_given_intent]")
        lines.extend(self._table_lines(model.log_word_given_intent, model.intents, model))
        lines.append("[word_given_entity]")
        lines.extend(self._table_lines(model.log_word_given_entity, model.entity_classes, model))
        (directory / "model.tsv").write_text("\n".join(lines) + "\n", encoding="utf-8")

    @staticmethod
    def _table_lines(table: np.ndarray, labels: list[str], model: SiumModel) -> list[str]:
        rows = {idx: word for word, idx in model.word_index.items()}
        rows[len(model.word_index)] = OOV
        out = []
        for col, label in enumerate(labels):
            for idx in range(table.shape[0]):
                out.append(f"{label}\t{rows[idx]}\t{float(table[idx, col])!r}")
        return out

    @classmethod
    def load(cls, directory: Path, params) -> "SiumIntent":
        comp = cls(read_params(directory))
        text = (directory / "model.tsv").read_text(encoding="utf-8")
        sections: dict[str, list[str]] = {}
        current = None
        for line in text.splitlines():
            if line.startswith("[") and line.endswith("]"):
                current = line[1:-1]
                sections[current] = []
            elif line:
                sections[current].append(line)
        intents = sections["intents"]
        entity_classes = sections["entity_classes"]
        word_index = {}
        for line in sections["vocabulary"]:
            word, _, idx = line.partition("\t")
            word_index[word] = int(idx)

        def read_table(name: str, labels: list[str]) -> np.ndarray:
            table = np.zeros((len(word_index) + 1, len(labels)), dtype=np.float64)
            cols = {label: i for i, label in enumerate(labels)}
            for line in sections[name]:
                label, word, value = line.split("\t")
                idx = len(word_index) if word == OOV else word_index[word]
                table[idx, cols[label]] = float(value)
            return table

        comp.model = SiumModel(
            intents=intents,
            entity_classes=entity_classes,
            word_index=word_index,
            alpha=comp.params["alpha"],
            entity_threshold=comp.params["entity_threshold"],
            lowercase=comp.params["lowercase"],
            log_word_given_intent=read_table("word_given_intent", intents),
            log_word_given_entity=read_table("word_given_entity", entity_classes),
            log_intent_prior=np.full(len(intents), -math.log(len(intents))),
            log_entity_prior=np.full(len(entity_classes), -math.log(len(entity_classes))),
        )
        return comp
