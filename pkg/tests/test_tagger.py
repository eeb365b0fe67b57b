import itertools
import random

import numpy as np
import pytest

from incnlu import ConsistencyError
from incnlu.data import TrainingDataset, bio_tags
from incnlu.iu import ENTITIES, TOKENS, Blackboard, EditType
from incnlu.tagging import (
    SequenceEntityTagger,
    TaggerModel,
    decode,
    extract_entities,
    train_tagger,
)

from conftest import make_example, toy_rows


def _dataset(rows):
    return TrainingDataset([make_example(*r) for r in rows])


def _is_valid_bio(tags):
    prev = "O"
    for tag in tags:
        if tag.startswith("I-") and prev not in (f"B-{tag[2:]}", f"I-{tag[2:]}"):
            return False
        prev = tag
    return True


def test_tag_set_is_o_first_then_sorted_types(toy_dataset):
    model = train_tagger(toy_dataset, epochs=1)
    assert model.tags == [
        "O",
        "B-city", "I-city",
        "B-genre", "I-genre",
        "B-party_size", "I-party_size",
    ]


def test_learns_an_unambiguous_cue_word():
    rows = [
        ("rain tomorrow", "W", [("tomorrow", "date")]),
        ("sunny tomorrow", "W", [("tomorrow", "date")]),
        ("snow tomorrow", "W", [("tomorrow", "date")]),
    ]
    model = train_tagger(_dataset(rows), epochs=5)
    assert decode(model, ["rain", "tomorrow"]) == ["O", "B-date"]
    # the cue generalizes past an unseen first word
    assert decode(model, ["hail", "tomorrow"]) == ["O", "B-date"]


def test_fits_most_of_the_toy_corpus(toy_dataset):
    model = train_tagger(toy_dataset)
    hits = 0
    for ex in toy_dataset.examples:
        tokens, gold = bio_tags(ex.text, ex.entities)
        if decode(model, tokens) == gold:
            hits += 1
    assert hits >= len(toy_dataset) - 2


def test_decoded_sequences_never_violate_bio(toy_dataset):
    model = train_tagger(toy_dataset)
    rng = random.Random(77)
    words = [w for row in toy_rows() for w in row[0].split()] + ["zubat", "qux"]
    for _ in range(300):
        tokens = [rng.choice(words) for _ in range(rng.randrange(1, 9))]
        assert _is_valid_bio(decode(model, tokens))


def test_empty_prefix_decodes_to_nothing(toy_dataset):
    model = train_tagger(toy_dataset, epochs=1)
    assert decode(model, []) == []


def test_entity_free_dataset_yields_the_trivial_tagger():
    rows = [("hello there", "Greet", []), ("good morning", "Greet", [])]
    model = train_tagger(_dataset(rows))
    assert model.tags == ["O"]
    assert decode(model, ["hello", "unseen"]) == ["O", "O"]


def test_same_seed_reproduces_identical_weights(toy_dataset):
    a = train_tagger(toy_dataset, seed=13)
    b = train_tagger(toy_dataset, seed=13)
    assert set(a.weights) == set(b.weights)
    for feat in a.weights:
        assert np.array_equal(a.weights[feat], b.weights[feat])


def test_viterbi_agrees_with_exhaustive_search():
    """On random small models the decoded path must score as high as the
    best path found by brute-force enumeration over all valid sequences."""
    rng = np.random.default_rng(92)
    tags = ["O", "B-x", "I-x"]
    words = ["a", "b", "c", "d"]
    for _ in range(25):
        weights = {f"w={w}": rng.normal(size=3) for w in words}
        weights["pt=<s>"] = rng.normal(size=3)
        for t in tags:
            weights[f"pt={t}"] = rng.normal(size=3)
        model = TaggerModel(tags=tags, weights=weights)
        tokens = [words[i] for i in rng.integers(0, len(words), size=4)]
        init, pair = model.transition_matrix()
        em = np.array([weights[f"w={t}"] for t in tokens])

        def score(path):
            total = init[path[0]] + em[0, path[0]]
            for i in range(1, len(path)):
                total += pair[path[i - 1], path[i]] + em[i, path[i]]
            return total

        best = max(score(p) for p in itertools.product(range(3), repeat=len(tokens)))
        decoded = [tags.index(t) for t in decode(model, tokens)]
        assert score(decoded) == pytest.approx(best, rel=1e-12)
        assert np.isfinite(score(decoded))


class TestExtractEntities:
    def test_multi_token_span(self):
        spans = extract_entities(["O", "B-city", "I-city"], ["in", "new", "york"])
        assert len(spans) == 1
        s = spans[0]
        assert (s.type, s.value, s.start, s.end, s.confidence) == ("city", "new york", 1, 3, 1.0)

    def test_adjacent_b_tags_stay_separate(self):
        spans = extract_entities(["B-a", "B-a"], ["x", "y"])
        assert [(s.value, s.start, s.end) for s in spans] == [("x", 0, 1), ("y", 1, 2)]

    def test_orphan_inside_tag_opens_a_span(self):
        spans = extract_entities(["O", "I-city"], ["to", "boston"])
        assert [(s.type, s.value) for s in spans] == [("city", "boston")]

    def test_type_change_closes_the_span(self):
        spans = extract_entities(["B-a", "I-a", "B-b"], ["x", "y", "z"])
        assert [(s.type, s.start, s.end) for s in spans] == [("a", 0, 2), ("b", 2, 3)]

    def test_length_mismatch_is_a_caller_bug(self):
        with pytest.raises(ConsistencyError):
            extract_entities(["O"], ["two", "words"])


class TestTaggerComponent:
    def _trained(self, dataset):
        comp = SequenceEntityTagger()
        comp.train(dataset, ctx=None)
        return comp

    def _board_with(self, tokens):
        board = Blackboard()
        board.begin_cycle()
        board.write("tokenizer_whitespace", TOKENS, tokens)
        return board

    def test_redecode_depends_only_on_current_tokens(self, toy_dataset):
        # Restart semantics: however the prefix was reached, the output is a
        # pure function of it.
        comp = self._trained(toy_dataset)
        board = self._board_with(["weather", "in", "boston"])
        comp.process(board, EditType.ADD, "boston")
        via_edits = board.annotations[ENTITIES]
        board2 = self._board_with(["weather", "in", "boston"])
        comp2 = comp.fresh()
        comp2.process(board2)
        assert board2.annotations[ENTITIES] == via_edits
        assert any(s.type == "city" and s.value == "boston" for s in via_edits)

    def test_untrained_component_refuses_to_run(self):
        comp = SequenceEntityTagger()
        with pytest.raises(ConsistencyError):
            comp.process(self._board_with(["x"]), EditType.ADD, "x")

    def test_persist_load_round_trip(self, toy_dataset, tmp_path):
        comp = self._trained(toy_dataset)
        comp.persist(tmp_path)
        loaded = SequenceEntityTagger.load(tmp_path, {})
        assert loaded.model.tags == comp.model.tags
        rng = random.Random(5)
        words = [w for row in toy_rows() for w in row[0].split()]
        for _ in range(40):
            tokens = [rng.choice(words) for _ in range(rng.randrange(1, 8))]
            assert decode(loaded.model, tokens) == decode(comp.model, tokens)

    def test_persisted_file_has_tag_header_and_no_zero_cells(self, toy_dataset, tmp_path):
        comp = self._trained(toy_dataset)
        comp.persist(tmp_path)
        lines = (tmp_path / "model.tsv").read_text(encoding="utf-8").splitlines()
        assert lines[0].startswith("#tags\tO\t")
        for line in lines[1:]:
            feat, tag, value = line.rsplit("\t", 2)
            assert tag in comp.model.tags
            assert float(value) != 0.0
