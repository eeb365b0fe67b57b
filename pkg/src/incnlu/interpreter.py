"""The incremental interpreter: train, stream edits, persist, reload.

One interpreter is one utterance session over a trained component chain.
Every edit is pushed through all components in pipeline order before the
next edit is accepted, so downstream components always see upstream
annotations for the current hypothesis, never a stale one.
"""

from __future__ import annotations

import hashlib
import json
import time
from pathlib import Path

from .components import Component, TrainingContext
from .config import PipelineConfig, build_components, config_text, key_owners, parse_config
from .data import TrainingDataset
from .errors import BundleError, DataError
from .features import tokenize
from .iu import Blackboard, EditType
from .registry import REGISTRY
from .results import NluResult, result_from_annotations

SCHEMA_VERSION = 1
MANIFEST_NAME = "manifest.json"
CONFIG_NAME = "config.yml"


def _bundle_checksum(root: Path) -> str:
    """Digest over every persisted file except the manifest itself."""
    digest = hashlib.sha256()
    for path in sorted(root.rglob("*")):
        if path.is_dir() or path.name == MANIFEST_NAME:
            continue
        digest.update(str(path.relative_to(root)).encode("utf-8"))
        digest.update(b"\0")
        digest.update(path.read_bytes())
        digest.update(b"\0")
    return digest.hexdigest()


class IncrementalInterpreter:
    """Lock-step pipeline runner over a blackboard."""

    def __init__(self, config: PipelineConfig, components: list[Component] | None = None) -> None:
        self.config = config
        self.components = components if components is not None else build_components(config)
        self.board = Blackboard()
        self.board.set_owners(key_owners(self.components))
        self.is_trained = False
        self.training_timings: list[tuple[str, float]] = []
        self.training_info: dict = {}

    # -- training ------------------------------------------------------

    def train(self, dataset: TrainingDataset, seed: int = 13) -> None:
        if not dataset.examples:
            raise DataError("cannot train on an empty dataset")
        ctx = TrainingContext(dataset=dataset, seed=seed)
        self.training_timings = []
        for comp in self.components:
            started = time.perf_counter()
            comp.train(dataset, ctx)
            self.training_timings.append((comp.name, time.perf_counter() - started))
        self.is_trained = True
        self.training_info = {
            "examples": len(dataset.examples),
            "intents": dataset.intents,
            "seed": seed,
        }

    # -- parsing -------------------------------------------------------

    def parse_incremental(self, edit: EditType, word: str | None = None) -> NluResult:
        """Apply one edit, run every component on it, return the result."""
        unit = self.board.apply_edit(edit, word)
        self.board.begin_cycle()
        for comp in self.components:
            # On REVOKE the affected word is the revoked unit's, not the
            # caller's (REVOKE takes no payload).
            comp.process(self.board, edit, unit.word)
        return self.current_result()

    def new_utterance(self) -> None:
        self.board.clear()
        for comp in self.components:
            comp.new_utterance()

    def parse_full(self, utterance: str) -> NluResult:
        """Non-incremental reference path: stream all words of a fresh utterance."""
        self.new_utterance()
        words = tokenize(utterance, lowercase=False)
        if not words:
            return self.refresh()
        result = None
        for word in words:
            result = self.parse_incremental(EditType.ADD, word)
        return result

    def refresh(self) -> NluResult:
        """Recompute annotations from the current hypothesis, consuming no edit."""
        self.board.begin_cycle()
        for comp in self.components:
            comp.process(self.board)
        return self.current_result()

    def current_result(self) -> NluResult:
        return result_from_annotations(self.board.annotations)

    def component_result(self, name: str) -> NluResult:
        """One component's own view, regardless of annotation ownership."""
        return result_from_annotations(self.board.component_view(name))

    def fresh_copy(self) -> "IncrementalInterpreter":
        """New session over the same trained models, no shared mutable state."""
        clone = IncrementalInterpreter(self.config, [c.fresh() for c in self.components])
        clone.is_trained = self.is_trained
        clone.training_info = dict(self.training_info)
        return clone

    # -- persistence ---------------------------------------------------

    def persist(self, path: str | Path) -> Path:
        if not self.is_trained:
            raise BundleError("refusing to persist an untrained pipeline")
        root = Path(path)
        root.mkdir(parents=True, exist_ok=True)
        (root / CONFIG_NAME).write_text(config_text(self.config), encoding="utf-8")
        for comp in self.components:
            sub = root / comp.name
            sub.mkdir(exist_ok=True)
            comp.persist(sub)
        manifest = {
            "schema_version": SCHEMA_VERSION,
            "language": self.config.language,
            "components": [comp.name for comp in self.components],
            "training": self.training_info,
            "checksum": _bundle_checksum(root),
        }
        (root / MANIFEST_NAME).write_text(
            json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
        return root


def load(path: str | Path) -> IncrementalInterpreter:
    """Load a persisted bundle, verifying schema version and file integrity."""
    root = Path(path)
    manifest_path = root / MANIFEST_NAME
    if not manifest_path.exists():
        raise BundleError(f"no {MANIFEST_NAME} in {root}")
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise BundleError(f"{manifest_path}: not valid JSON ({exc})") from exc
    version = manifest.get("schema_version")
    if version != SCHEMA_VERSION:
        raise BundleError(
            f"bundle schema version {version!r}, expected {SCHEMA_VERSION}"
        )
    stored = manifest.get("checksum")
    actual = _bundle_checksum(root)
    if stored != actual:
        raise BundleError(f"bundle files do not match manifest checksum in {root}")

    config = parse_config((root / CONFIG_NAME).read_text(encoding="utf-8"))
    names = [spec.name for spec in config.components]
    if names != manifest.get("components"):
        raise BundleError("manifest component list does not match bundle config")
    components = []
    for spec in config.components:
        if spec.name not in REGISTRY:
            raise BundleError(f"bundle config names unknown component {spec.name!r}")
        sub = root / spec.name
        if not sub.is_dir():
            raise BundleError(f"bundle is missing component directory {spec.name!r}")
        components.append(REGISTRY[spec.name].load(sub, spec.params))
    interp = IncrementalInterpreter(config, components)
    interp.is_trained = True
    interp.training_info = dict(manifest.get("training", {}))
    return interp


def train_pipeline(config: PipelineConfig, dataset: TrainingDataset, seed: int = 13) -> IncrementalInterpreter:
    interp = IncrementalInterpreter(config)
    interp.train(dataset, seed=seed)
    return interp
