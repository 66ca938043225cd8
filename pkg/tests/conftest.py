from pathlib import Path

import pytest

from lingraph.formats import load_grammar

GRAMMARS = Path(__file__).resolve().parent.parent / "grammars"
DATA = Path(__file__).resolve().parent.parent / "data"


@pytest.fixture(scope="session")
def grammar():
    cache = {}

    def get(name):
        if name not in cache:
            cache[name] = load_grammar(GRAMMARS / f"{name}.0lg")
        return cache[name]

    return get
