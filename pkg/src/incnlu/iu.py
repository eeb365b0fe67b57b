"""Incremental units, the add/revoke buffer, and the blackboard message bus.

A word entering the system becomes an :class:`IncrementalUnit`. Units are
only ever appended; revoking flags the most recently added surviving unit
instead of deleting it, so the full edit history stays reconstructible.
Components communicate through a :class:`Blackboard` that carries the unit
buffer plus named annotations (tokens, count vector, entities, intent
distribution).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any

from .errors import BufferUnderflowError, ConsistencyError, InvalidPayloadError

# Annotation keys components agree on. Each key has exactly one writer per
# pipeline; see Blackboard.write for how ownership is enforced.
TOKENS = "tokens"
COUNT_VECTOR = "count_vector"
ENTITIES = "entities"
INTENT_DISTRIBUTION = "intent_distribution"
UTTERANCE_COMPLETE = "utterance_complete"


class EditType(Enum):
    ADD = "ADD"
    REVOKE = "REVOKE"


@dataclass
class IncrementalUnit:
    """One word-level edit event.

    ``position`` is the 0-based index among surviving units at the time the
    unit was added; it is not updated when later units are revoked.
    """

    id: int
    word: str
    position: int
    revoked: bool = False


def _check_word(word: Any) -> str:
    if not isinstance(word, str) or not word:
        raise InvalidPayloadError("unit payload must be a non-empty string")
    if any(ch.isspace() for ch in word):
        raise InvalidPayloadError(f"unit payload may not contain whitespace: {word!r}")
    return word


class IuBuffer:
    """Append-only unit store with last-in-first-out revocation."""

    def __init__(self) -> None:
        self.units: list[IncrementalUnit] = []
        self._live: list[int] = []  # indices of surviving units, in add order
        self._next_id = 0

    def add(self, word: str) -> IncrementalUnit:
        word = _check_word(word)
        unit = IncrementalUnit(id=self._next_id, word=word, position=len(self._live))
        self._next_id += 1
        self._live.append(len(self.units))
        self.units.append(unit)
        return unit

    def revoke(self) -> IncrementalUnit:
        """Flag the most recently added surviving unit and return it."""
        if not self._live:
            raise BufferUnderflowError("revoke on an empty hypothesis")
        unit = self.units[self._live.pop()]
        unit.revoked = True
        return unit

    def hypothesis(self) -> list[str]:
        """Surviving words in add order."""
        return [self.units[i].word for i in self._live]

    def __len__(self) -> int:
        return len(self._live)


class Blackboard:
    """Shared per-utterance state bus.

    Annotations live in two layers: ``component_annotations`` keeps every
    component's output under ``(component, key)``, while ``annotations``
    holds the pipeline-level value for each key, written only by that key's
    owning component. Ownership is configured once per pipeline via
    :meth:`set_owners`; with no owners configured every writer passes
    through.
    """

    def __init__(self) -> None:
        self.buffer = IuBuffer()
        self.annotations: dict[str, Any] = {}
        self.component_annotations: dict[tuple[str, str], Any] = {}
        self.last_edit: EditType | None = None
        self.edit_log: list[tuple[int, EditType, str]] = []
        self._owners: dict[str, str] = {}
        self._cycle_writers: dict[str, str] = {}

    def set_owners(self, owners: dict[str, str]) -> None:
        self._owners = dict(owners)

    def apply_edit(self, edit: EditType, word: str | None) -> IncrementalUnit:
        """Apply one edit to the buffer and record it in the edit log."""
        if edit is EditType.ADD:
            if word is None:
                raise InvalidPayloadError("ADD requires a word")
            unit = self.buffer.add(word)
        elif edit is EditType.REVOKE:
            if word is not None:
                raise InvalidPayloadError("REVOKE does not take a word")
            unit = self.buffer.revoke()
        else:  # pragma: no cover - enum is closed
            raise InvalidPayloadError(f"unknown edit type {edit!r}")
        self.last_edit = edit
        self.edit_log.append((unit.id, edit, unit.word))
        return unit

    def begin_cycle(self) -> None:
        self._cycle_writers = {}

    def write(self, component: str, key: str, value: Any) -> None:
        """Store a component's annotation.

        The value is always recorded under ``(component, key)``. It is
        mirrored to the pipeline-level map only when ``component`` owns
        ``key``; a second owner-level write of the same key in one cycle is
        a wiring bug and raises.
        """
        self.component_annotations[(component, key)] = value
        owner = self._owners.get(key, component)
        if owner != component:
            return
        previous = self._cycle_writers.get(key)
        if previous is not None and previous != component:
            raise ConsistencyError(
                f"annotation {key!r} written by both {previous!r} and {component!r}"
            )
        self._cycle_writers[key] = component
        self.annotations[key] = value

    def component_view(self, component: str) -> dict[str, Any]:
        """All annotations a single component has written this utterance."""
        return {
            key: value
            for (name, key), value in self.component_annotations.items()
            if name == component
        }

    def clear(self) -> None:
        """Reset all per-utterance state; configured owners are kept."""
        self.buffer = IuBuffer()
        self.annotations = {}
        self.component_annotations = {}
        self.last_edit = None
        self.edit_log = []
        self._cycle_writers = {}


def format_iu_line(unit_id: int, edit: EditType, word: str) -> str:
    """Render one edit event as a log line: ``<id>\\t<ADD|REVOKE>\\t<word>``."""
    return f"{unit_id}\t{edit.value}\t{word}"


def parse_iu_line(line: str) -> tuple[int, EditType, str]:
    parts = line.rstrip("\n").split("\t")
    if len(parts) != 3:
        raise InvalidPayloadError(f"malformed unit line: {line!r}")
    raw_id, raw_edit, word = parts
    try:
        unit_id = int(raw_id)
        edit = EditType(raw_edit)
    except ValueError as exc:
        raise InvalidPayloadError(f"malformed unit line: {line!r}") from exc
    return unit_id, edit, _check_word(word)


def format_edit_log(board: Blackboard) -> str:
    """Serialize a blackboard's edit history, one line per event."""
    return "\n".join(format_iu_line(i, e, w) for i, e, w in board.edit_log)
