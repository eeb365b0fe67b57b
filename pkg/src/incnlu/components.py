"""Base contract every pipeline component implements.

Components are trained once, sequentially, each seeing what earlier
components derived from the training data (via :class:`TrainingContext`).
At parse time they run in lock-step: each edit is pushed through every
component, in pipeline order, before the next edit enters the pipeline.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Any

from .errors import ConfigError
from .iu import Blackboard, EditType

if TYPE_CHECKING:  # pragma: no cover
    from .data import TrainingDataset
    from .features import Vocabulary


@dataclass
class TrainingContext:
    """Carries one component's training output forward to the next.

    The tokenizer fills ``tokens`` and ``token_spans``; the featurizer fills
    ``vocabulary``. ``seed`` drives every stochastic training step so runs
    are reproducible.
    """

    dataset: "TrainingDataset"
    seed: int
    tokens: list[list[str]] | None = None
    token_spans: list[list[tuple[int, int]]] | None = None
    vocabulary: "Vocabulary | None" = None
    extras: dict[str, Any] = field(default_factory=dict)


class Component:
    """One stage of the incremental pipeline.

    Subclasses set ``name`` (the registry key), ``provides`` (annotation
    keys they write), ``requires`` (annotation keys that must be written by
    an earlier component), and ``defaults`` (parameter defaults). Parameters
    given at construction are validated against ``defaults``.

    ``process`` is called once per edit with the edit type and the raw word
    involved (the added word, or the word just revoked). A call with
    ``edit=None`` asks the component to recompute its annotations from the
    current hypothesis without consuming an edit; the interpreter uses this
    to produce a result for the empty utterance.

    After ``new_utterance`` a component must behave exactly like a freshly
    loaded instance.
    """

    name: str = ""
    provides: tuple[str, ...] = ()
    requires: tuple[str, ...] = ()
    defaults: dict[str, Any] = {}

    def __init__(self, params: dict[str, Any] | None = None) -> None:
        params = dict(params or {})
        unknown = set(params) - set(self.defaults)
        if unknown:
            raise ConfigError(
                f"component {self.name!r} does not accept parameter(s): "
                + ", ".join(sorted(unknown))
            )
        self.params: dict[str, Any] = {**self.defaults, **params}

    def train(self, dataset: "TrainingDataset", ctx: TrainingContext) -> None:
        pass

    def process(
        self, board: Blackboard, edit: EditType | None = None, word: str | None = None
    ) -> None:
        raise NotImplementedError

    def new_utterance(self) -> None:
        pass

    def persist(self, directory: Path) -> None:
        raise NotImplementedError

    @classmethod
    def load(cls, directory: Path, params: dict[str, Any]) -> "Component":
        raise NotImplementedError

    def fresh(self) -> "Component":
        """A state-free copy sharing this component's trained model."""
        clone = copy.copy(self)
        clone.new_utterance()
        return clone


def write_params(directory: Path, params: dict[str, Any]) -> None:
    lines = [f"{key}\t{params[key]!r}" for key in sorted(params)]
    (directory / "params.tsv").write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_params(directory: Path) -> dict[str, Any]:
    import ast

    path = directory / "params.tsv"
    params: dict[str, Any] = {}
    for line in path.read_text(encoding="utf-8").splitlines():
        if not line:
            continue
        key, _, raw = line.partition("\t")
        params[key] = ast.literal_eval(raw)
    return params
