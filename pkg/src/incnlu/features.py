"""Whitespace tokenization and the incremental bag-of-words count vector.

The count vector is updated exactly: an add increments one word count, a
revoke decrements it, so after any balanced edit sequence the vector equals
a from-scratch recount of the surviving hypothesis. Out-of-vocabulary words
contribute nothing to the vector but still occupy a buffer position.
"""

from __future__ import annotations

import re
from pathlib import Path
from typing import Iterable

import numpy as np

from .components import Component, TrainingContext, read_params, write_params
from .errors import ConfigError, ConsistencyError, DataError
from .iu import COUNT_VECTOR, TOKENS, Blackboard, EditType

_TOKEN_RE = re.compile(r"\S+")


def tokenize(text: str, lowercase: bool = True) -> list[str]:
    """Split on whitespace runs; empty input gives an empty list."""
    tokens = _TOKEN_RE.findall(text)
    if lowercase:
        tokens = [t.lower() for t in tokens]
    return tokens


def tokenize_with_spans(text: str, lowercase: bool = True) -> list[tuple[str, int, int]]:
    """Tokens plus their character offsets in the original text."""
    out = []
    for match in _TOKEN_RE.finditer(text):
        token = match.group(0)
        if lowercase:
            token = token.lower()
        out.append((token, match.start(), match.end()))
    return out


class Vocabulary:
    """Frozen word-to-index map built from training data.

    Indices are dense and assigned in first-occurrence order, so fitting is
    deterministic for a fixed corpus.
    """

    def __init__(self, index: dict[str, int], lowercase: bool = True) -> None:
        self.index = index
        self.lowercase = lowercase

    @classmethod
    def fit(cls, token_lists: Iterable[list[str]], lowercase: bool = True) -> "Vocabulary":
        index: dict[str, int] = {}
        empty = True
        for tokens in token_lists:
            empty = False
            for token in tokens:
                if lowercase:
                    token = token.lower()
                if token not in index:
                    index[token] = len(index)
        if empty:
            raise DataError("cannot fit a vocabulary on an empty corpus")
        return cls(index, lowercase=lowercase)

    def index_of(self, token: str) -> int | None:
        if self.lowercase:
            token = token.lower()
        return self.index.get(token)

    def __len__(self) -> int:
        return len(self.index)

    def __contains__(self, token: str) -> bool:
        return self.index_of(token) is not None

    def to_lines(self) -> list[str]:
        return [f"{word}\t{idx}" for word, idx in sorted(self.index.items())]

    @classmethod
    def from_lines(cls, lines: Iterable[str], lowercase: bool = True) -> "Vocabulary":
        index: dict[str, int] = {}
        for line in lines:
            if not line:
                continue
            word, _, raw_idx = line.partition("\t")
            index[word] = int(raw_idx)
        if sorted(index.values()) != list(range(len(index))):
            raise DataError("vocabulary indices are not a dense permutation")
        return cls(index, lowercase=lowercase)


def fit_vocabulary(dataset, lowercase: bool = True) -> Vocabulary:
    """Fit a vocabulary over every utterance in a training dataset."""
    if not dataset.examples:
        raise DataError("cannot fit a vocabulary on an empty corpus")
    return Vocabulary.fit(
        (tokenize(ex.text, lowercase=lowercase) for ex in dataset.examples),
        lowercase=lowercase,
    )


def count_vector(vocab: Vocabulary, tokens: Iterable[str]) -> np.ndarray:
    """Batch word-count vector of a token sequence."""
    vec = np.zeros(len(vocab), dtype=np.int64)
    for token in tokens:
        idx = vocab.index_of(token)
        if idx is not None:
            vec[idx] += 1
    return vec


def vector_apply(vec: np.ndarray, vocab: Vocabulary, token: str, edit: EditType) -> np.ndarray:
    """Apply one edit to a count vector in place and return it.

    Out-of-vocabulary tokens are a no-op either way. A revoke that would
    drive a count negative means the vector no longer tracks the buffer.
    """
    idx = vocab.index_of(token)
    if idx is None:
        return vec
    if edit is EditType.ADD:
        vec[idx] += 1
    else:
        if vec[idx] < 1:
            raise ConsistencyError(
                f"revoke of {token!r} would drive its count below zero"
            )
        vec[idx] -= 1
    return vec


class WhitespaceTokenizer(Component):
    """Maintains the token sequence of the surviving hypothesis.

    Incremental adds carry exactly one token each (the buffer rejects
    whitespace in payloads), so an add appends and a revoke pops.
    """

    name = "tokenizer_whitespace"
    provides = (TOKENS,)
    defaults = {"lowercase": True}

    def __init__(self, params=None) -> None:
        super().__init__(params)
        self._tokens: list[str] = []

    def _norm(self, word: str) -> str:
        return word.lower() if self.params["lowercase"] else word

    def train(self, dataset, ctx: TrainingContext) -> None:
        lowercase = self.params["lowercase"]
        ctx.tokens = [tokenize(ex.text, lowercase=lowercase) for ex in dataset.examples]
        ctx.token_spans = [
            [(s, e) for _, s, e in tokenize_with_spans(ex.text, lowercase=lowercase)]
            for ex in dataset.examples
        ]

    def process(self, board: Blackboard, edit=None, word=None) -> None:
        if edit is EditType.ADD:
            self._tokens.append(self._norm(word))
        elif edit is EditType.REVOKE:
            if not self._tokens:
                raise ConsistencyError("token list empty on revoke")
            self._tokens.pop()
        else:
            self._tokens = [self._norm(w) for w in board.buffer.hypothesis()]
        board.write(self.name, TOKENS, self._tokens)

    def new_utterance(self) -> None:
        self._tokens = []

    def persist(self, directory: Path) -> None:
        write_params(directory, self.params)

    @classmethod
    def load(cls, directory: Path, params) -> "WhitespaceTokenizer":
        return cls(read_params(directory))


class CountVectorsFeaturizer(Component):
    """Bag-of-words featurizer with exact add/revoke updates."""

    name = "featurizer_count_vectors"
    provides = (COUNT_VECTOR,)
    requires = (TOKENS,)
    defaults = {"lowercase": True}

    def __init__(self, params=None) -> None:
        super().__init__(params)
        self.vocabulary: Vocabulary | None = None
        self._vec: np.ndarray | None = None

    def train(self, dataset, ctx: TrainingContext) -> None:
        if ctx.tokens is None:
            raise ConfigError("featurizer_count_vectors needs a tokenizer earlier in the pipeline")
        lowercase = self.params["lowercase"]
        self.vocabulary = Vocabulary.fit(ctx.tokens, lowercase=lowercase)
        ctx.vocabulary = self.vocabulary

    def _require_vocab(self) -> Vocabulary:
        if self.vocabulary is None:
            raise ConsistencyError("featurizer used before training or loading")
        return self.vocabulary

    def process(self, board: Blackboard, edit=None, word=None) -> None:
        vocab = self._require_vocab()
        if self._vec is None:
            self._vec = np.zeros(len(vocab), dtype=np.int64)
        if edit is not None:
            vector_apply(self._vec, vocab, word, edit)
        else:
            self._vec = count_vector(vocab, board.annotations.get(TOKENS, []))
        board.write(self.name, COUNT_VECTOR, self._vec)

    def new_utterance(self) -> None:
        self._vec = None

    def persist(self, directory: Path) -> None:
        write_params(directory, self.params)
        vocab = self._require_vocab()
        (directory / "vocabulary.tsv").write_text(
            "\n".join(vocab.to_lines()) + "\n", encoding="utf-8"
        )

    @classmethod
    def load(cls, directory: Path, params) -> "CountVectorsFeaturizer":
        comp = cls(read_params(directory))
        lines = (directory / "vocabulary.tsv").read_text(encoding="utf-8").splitlines()
        comp.vocabulary = Vocabulary.from_lines(lines, lowercase=comp.params["lowercase"])
        return comp
