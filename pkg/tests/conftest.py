"""Shared fixtures: a small two-category corpus and ready-made sessions."""

import pytest

from tabforge import (
    AnnotationSession,
    DatasetTag,
    Hypothesis,
    InitPolicy,
    Label,
    Section,
    Table,
    ValueCell,
    ValueProvenance,
    build_category_map,
    build_value_pool,
    init_session,
)

# (table_id, tag, category, [(key, [values...])]) for six tables across two
# categories; every source-class combination has at least one candidate
CORPUS_SPEC = [
    (
        "P1",
        "test",
        "person",
        [
            ("Born", ["May 3, 1923"]),
            ("Died", ["June 7, 1999"]),
            ("Spouse", ["Ada Norton"]),
            ("Country", ["Norway"]),
            ("Occupation", ["composer and arranger"]),
        ],
    ),
    (
        "P2",
        "test",
        "person",
        [
            ("Born", ["March 14, 1931"]),
            ("Died", ["April 2, 2004"]),
            ("Spouse", ["Ben Okafor"]),
            ("Country", ["Ghana"]),
            ("Occupation", ["field botanist"]),
        ],
    ),
    (
        "P3",
        "train",
        "person",
        [
            ("Born", ["July 21, 1950"]),
            ("Spouse", ["Chie Tanaka"]),
            ("Country", ["Japan"]),
            ("Occupation", ["marine engineer"]),
        ],
    ),
    (
        "A1",
        "test",
        "album",
        [
            ("Released", ["August 1, 1977"]),
            ("Recorded", ["February 11, 1977"]),
            ("Length", ["41 minutes"]),
            ("Producer", ["Dana Reyes"]),
            ("Country", ["Canada"]),
        ],
    ),
    (
        "A2",
        "train",
        "album",
        [
            ("Released", ["October 9, 1983"]),
            ("Recorded", ["May 30, 1983"]),
            ("Length", ["36 minutes"]),
            ("Producer", ["Eli Brandt"]),
            ("Country", ["Brazil"]),
        ],
    ),
    (
        "A3",
        "train",
        "album",
        [
            ("Released", ["January 16, 1991"]),
            ("Recorded", ["September 4, 1990"]),
            ("Length", ["52 minutes"]),
            ("Producer", ["Farah Khan"]),
            ("Country", ["India"]),
        ],
    ),
]


def make_table(table_id, category, sections, title=None):
    return Table(
        table_id=table_id,
        title=title or table_id.replace("_", " "),
        category=category,
        sections=[
            Section(key=key, values=[ValueCell(v, ValueProvenance()) for v in values])
            for key, values in sections
        ],
    )


def make_corpus():
    return [
        (make_table(tid, category, sections), DatasetTag.from_name(tag))
        for tid, tag, category, sections in CORPUS_SPEC
    ]


def make_hypotheses():
    return [
        Hypothesis("h1", "The subject outlived their spouse.", Label.ENTAIL),
        Hypothesis("h2", "The subject was born after 1950.", Label.CONTRADICT,
                   relevant_keys=["Born"]),
        Hypothesis("h3", "The subject had two children.", Label.NEUTRAL),
    ]


@pytest.fixture
def corpus():
    return make_corpus()


@pytest.fixture
def pool(corpus):
    return build_value_pool(corpus)


@pytest.fixture
def cmap(corpus):
    return build_category_map([table for table, _ in corpus])


@pytest.fixture
def policy():
    return InitPolicy(perturb_probability=0.7, seed=11)


@pytest.fixture
def session(corpus, pool, cmap, policy) -> AnnotationSession:
    original = corpus[0][0]
    return init_session(original, make_hypotheses(), pool, cmap, policy)
