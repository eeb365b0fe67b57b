import pytest

from incnlu import TrainingDataset, TrainingExample, EntityAnnotation, default_config, train_pipeline

# Small three-intent corpus for unit tests; entity values are single words
# placed by substring search so spans always align to token boundaries.
_TOY_ROWS = [
    ("play some jazz", "PlayMusic", [("jazz", "genre")]),
    ("play some blues", "PlayMusic", [("blues", "genre")]),
    ("play rock now", "PlayMusic", [("rock", "genre")]),
    ("put on some jazz", "PlayMusic", [("jazz", "genre")]),
    ("play some jazz tonight", "PlayMusic", [("jazz", "genre")]),
    ("some jazz please", "PlayMusic", [("jazz", "genre")]),
    ("weather in boston", "GetWeather", [("boston", "city")]),
    ("weather in denver", "GetWeather", [("denver", "city")]),
    ("will it rain in boston", "GetWeather", [("boston", "city")]),
    ("forecast for denver today", "GetWeather", [("denver", "city")]),
    ("book a table for two", "BookRestaurant", [("two", "party_size")]),
    ("book a table for four", "BookRestaurant", [("four", "party_size")]),
    ("book a spot for six", "BookRestaurant", [("six", "party_size")]),
    ("reserve a table for two", "BookRestaurant", [("two", "party_size")]),
]


def make_example(text: str, intent: str, entities) -> TrainingExample:
    spans = []
    for value, etype in entities:
        start = text.index(value)
        spans.append(EntityAnnotation(start=start, end=start + len(value), value=value, type=etype))
    return TrainingExample(text=text, intent=intent, entities=spans)


def toy_rows():
    return list(_TOY_ROWS)


@pytest.fixture()
def toy_dataset() -> TrainingDataset:
    return TrainingDataset([make_example(*row) for row in _TOY_ROWS])


@pytest.fixture(scope="session")
def toy_interp():
    """Default pipeline trained once on the toy corpus; treat as read-only
    for assertions on models, or use fresh_copy() for parsing."""
    dataset = TrainingDataset([make_example(*row) for row in _TOY_ROWS])
    return train_pipeline(default_config(), dataset, seed=13)
