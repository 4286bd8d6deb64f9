from pathlib import Path

import pytest

from tools.data_loader import JsonlDataLoader, SyntheticDataLoader, load_tagset
from utility.dialogue import DAUnit, Dialogue, EntityMention, Role, Turn

DATA_DIR = Path(__file__).parent / "data"
FIG1_CORPUS = DATA_DIR / "fig1.jsonl"
FIG1_TAGSET = DATA_DIR / "fig1_tagset.json"

@pytest.fixture
def fig1_tagset():
    return load_tagset(FIG1_TAGSET)

@pytest.fixture
def fig1_corpus():
    return JsonlDataLoader(FIG1_CORPUS, FIG1_TAGSET).load_data().get_data()

@pytest.fixture
def fig1_dialogue(fig1_corpus):
    return fig1_corpus.get("fig1")

@pytest.fixture(scope="session")
def synthetic_corpus():
    return SyntheticDataLoader(n_dialogues=40, seed=0).load_data().get_data()

def make_dialogue(dialogue_id, turns, tagset_id="swbd-damsl-fig1"):
    """turns: list of turns, each a list of (da_tag, [(entity, role), ...])"""
    return Dialogue(dialogue_id, tuple(
        Turn("AB"[i % 2], tuple(DAUnit(tag, "", tuple(EntityMention(e, Role(r)) for e, r in mentions))
                                for tag, mentions in units))
        for i, units in enumerate(turns)), tagset_id)
