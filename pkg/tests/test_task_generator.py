import pytest

from conftest import make_dialogue
from tools.feature_extractor import FeatureSpec
from tools.task_generator import (build_training_pairs, generate_insertions, generate_permutations,
                                  generate_task_sets, read_bundle_config, read_insertion_bundle,
                                  read_permutation_bundle, write_insertion_bundle, write_permutation_bundle)
from utility.dialogue import Corpus
from utility.errors import TaskError

def long_dialogue(dialogue_id, n_turns):
    return make_dialogue(dialogue_id, [[("sd", [])] for _ in range(n_turns)])

def test_two_turns_have_one_permutation():
    p = generate_permutations(long_dialogue("d", 2), k=20)
    assert p.permutations == ((1, 0),)
    assert p.capped

def test_short_dialogue_uses_all_orders():
    p = generate_permutations(long_dialogue("d", 3), k=20)
    assert len(p) == 5
    assert len(set(p.permutations)) == 5
    assert (0, 1, 2) not in p.permutations

@pytest.mark.parametrize("n_turns", [6, 12, 109])
def test_permutations_are_distinct_bijections(n_turns):
    p = generate_permutations(long_dialogue("d", n_turns), k=20)
    assert len(p) == 20 and not p.capped
    assert len(set(p.permutations)) == 20
    for order in p.permutations:
        assert sorted(order) == list(range(n_turns))
        assert order != tuple(range(n_turns))

def test_permutations_depend_on_id_and_seed():
    d = long_dialogue("d", 10)
    assert generate_permutations(d, seed=1) == generate_permutations(d, seed=1)
    assert generate_permutations(d, seed=1).permutations != generate_permutations(d, seed=2).permutations
    other = long_dialogue("e", 10)
    assert generate_permutations(d).permutations != generate_permutations(other).permutations

def test_one_turn_dialogue_is_rejected():
    with pytest.raises(TaskError):
        generate_permutations(long_dialogue("d", 1))
    with pytest.raises(TaskError):
        generate_insertions(long_dialogue("d", 1))

def test_task_sets_ignore_corpus_order(synthetic_corpus):
    reversed_corpus = Corpus(tuple(reversed(synthetic_corpus.dialogues)), synthetic_corpus.tagset)
    perms, insertions = generate_task_sets(synthetic_corpus, k=5)
    perms_r, insertions_r = generate_task_sets(reversed_corpus, k=5)
    assert perms == perms_r
    assert insertions == insertions_r

def test_task_sets_skip_single_turn_dialogues(fig1_tagset):
    corpus = Corpus((long_dialogue("one", 1), long_dialogue("two", 2)), fig1_tagset)
    perms, insertions = generate_task_sets(corpus)
    assert list(perms) == ["two"] and list(insertions) == ["two"]

def test_five_turn_insertions():
    instances = generate_insertions(long_dialogue("d", 5))
    assert [i.removed_turn_index for i in instances] == [0, 1, 2, 3, 4]
    assert all(i.candidate_positions == (0, 1, 2, 3, 4) for i in instances)

def test_long_dialogue_insertions():
    instances = generate_insertions(long_dialogue("d", 86), seed=3)
    assert len(instances) == 10
    assert len({i.removed_turn_index for i in instances}) == 10
    for i in instances:
        assert len(i.candidate_positions) == 10
        assert i.removed_turn_index in i.candidate_positions
        assert list(i.candidate_positions) == sorted(set(i.candidate_positions))
        assert all(0 <= s < 86 for s in i.candidate_positions)

def test_reinsertion_preserves_turns(fig1_dialogue):
    for index in range(5):
        assert fig1_dialogue.insert_turn(index, index) == fig1_dialogue
        for slot in range(5):
            moved = fig1_dialogue.insert_turn(index, slot)
            assert sorted(map(repr, moved.turns)) == sorted(map(repr, fig1_dialogue.turns))
            assert moved.turns[slot] == fig1_dialogue.turns[index]

def test_training_pairs(fig1_corpus, fig1_tagset):
    perms, _ = generate_task_sets(fig1_corpus, k=20)
    spec = FeatureSpec("T-Grid:role", tagset=fig1_tagset)
    pairs = build_training_pairs(fig1_corpus, perms, spec)
    assert len(pairs) == 20
    assert all(p.group_id == "fig1" for p in pairs)
    assert all(p.preferred == pairs[0].preferred for p in pairs)

def test_training_pairs_count(synthetic_corpus):
    perms, _ = generate_task_sets(synthetic_corpus, k=20)
    pairs = build_training_pairs(synthetic_corpus, perms, FeatureSpec("Only-DAs", tagset=synthetic_corpus.tagset))
    assert len(pairs) == 20 * len(synthetic_corpus)

def test_palindromic_das_give_a_degenerate_pair(fig1_tagset):
    d = make_dialogue("pal", [[("qy", [])], [("na", [])], [("qy", [])]])
    corpus = Corpus((d,), fig1_tagset)
    perms, _ = generate_task_sets(corpus, k=20)
    pairs = build_training_pairs(corpus, perms, FeatureSpec("Only-DAs", tagset=fig1_tagset))
    # every non-identity order of three turns is used, and each one gives a pair
    assert len(pairs) == 5
    flags = {p: pair.degenerate for p, pair in zip(perms["pal"].permutations, pairs)}
    assert flags[(2, 1, 0)]
    assert sum(flags.values()) == 1

def test_training_pairs_need_every_set(fig1_corpus, fig1_tagset):
    with pytest.raises(TaskError):
        build_training_pairs(fig1_corpus, {}, FeatureSpec("Only-DAs", tagset=fig1_tagset))

def test_bundles(tmp_path, synthetic_corpus):
    perms, insertions = generate_task_sets(synthetic_corpus, k=3, n_turns=2, n_positions=4)
    write_permutation_bundle(perms, tmp_path / "permutations.jsonl", {"seed": 0})
    write_insertion_bundle(insertions, tmp_path / "insertions.jsonl", {"seed": 0})
    lines = (tmp_path / "permutations.jsonl").read_text().splitlines()
    assert lines[0] == '{"type":"config","config":{"seed":0}}'
    assert len(lines) == len(synthetic_corpus) + 1
    assert read_permutation_bundle(tmp_path / "permutations.jsonl") == perms
    assert read_insertion_bundle(tmp_path / "insertions.jsonl") == insertions
    with pytest.raises(TaskError):
        read_permutation_bundle(tmp_path / "insertions.jsonl")
    assert read_bundle_config(tmp_path / "permutations.jsonl") == {"seed": 0}

def test_malformed_bundle_records(tmp_path):
    path = tmp_path / "permutations.jsonl"
    path.write_text('{"type":"config","config":{}}\n{"type":"permutations","dialogue_id":"d"}\n')
    with pytest.raises(TaskError, match="malformed"):
        read_permutation_bundle(path)
    path.write_text('{"type":"insertion","dialogue_id":"d","seed":0}\n')
    with pytest.raises(TaskError, match="malformed"):
        read_insertion_bundle(path)
    with pytest.raises(TaskError, match="config record"):
        read_bundle_config(path)

def test_bad_orders_are_task_errors(fig1_dialogue):
    with pytest.raises(TaskError):
        fig1_dialogue.reorder([0, 0, 1, 2, 3])
    with pytest.raises(TaskError):
        fig1_dialogue.insert_turn(9, 0)
    with pytest.raises(TaskError):
        fig1_dialogue.insert_turn(0, 5)
