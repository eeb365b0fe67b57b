"""The closed set of pipeline components a config may name."""

from __future__ import annotations

from .components import Component
from .errors import ConfigError
from .features import CountVectorsFeaturizer, WhitespaceTokenizer
from .intent_bow import BowIntentClassifier
from .sium import SiumIntent
from .tagging import SequenceEntityTagger

REGISTRY: dict[str, type[Component]] = {
    cls.name: cls
    for cls in (
        WhitespaceTokenizer,
        CountVectorsFeaturizer,
        SequenceEntityTagger,
        SiumIntent,
        BowIntentClassifier,
    )
}


def create(name: str, params: dict | None = None) -> Component:
    cls = REGISTRY.get(name)
    if cls is None:
        known = ", ".join(sorted(REGISTRY))
        raise ConfigError(f"unknown component {name!r}; registered components: {known}")
    return cls(params)
