import pytest

from sessionkit import fixtures

CORPUS = fixtures.corpus()


def test_corpus_is_big_enough():
    assert len(CORPUS) >= 15
    assert len({f["name"] for f in CORPUS}) == len(CORPUS)


@pytest.mark.parametrize("f", CORPUS, ids=lambda f: f["name"])
def test_fixture(f):
    r = fixtures.run_fixture(f)
    assert r["ok"], r["details"]
