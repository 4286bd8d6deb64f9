import io
import itertools

import numpy as np
import pytest
from joblib import parallel_backend

from conftest import make_dialogue
from tools.feature_extractor import (FeatureExtractor, FeatureSpec, extract_features,
                                     featurize_dialogue, featurize_dialogues, read_feature_dump,
                                     to_dense, transition_vocabulary, write_feature_dump)
from tools.grid_builder import CellVocab, Grid, build_grid, make_grid_spec
from utility.dialogue import Tagset
from utility.errors import ConfigError, FeatureError
import config as cfg

def brute_force(g: Grid, symbols, n, saliency):
    """Materializes every window of every salient column"""
    counts, total = {}, 0
    for j in range(len(g.columns)):
        column = [row[j] for row in g.cells]
        if "-" in symbols and sum(c != "-" for c in column) < saliency:
            continue
        if "-" not in symbols and len(column) < saliency:
            continue
        for i in range(len(column) - n + 1):
            window = tuple(column[i:i + n])
            counts[window] = counts.get(window, 0) + 1
            total += 1
    return [counts.get(t, 0) / total if total else 0.0 for t in itertools.product(symbols, repeat=n)]

def random_grid(rng, spec, symbols):
    n_rows, n_columns = rng.integers(1, 9), rng.integers(0, 7)
    cells = tuple(tuple(symbols[rng.integers(len(symbols))] for _ in range(n_columns)) for _ in range(n_rows))
    return Grid(tuple(f"r{i}" for i in range(n_rows)), tuple(f"e{j}" for j in range(n_columns)), cells, spec)

def test_role_vocabulary_order():
    vocab = transition_vocabulary(CellVocab.ROLE, 2)
    assert vocab.size == 16
    assert vocab.transitions[:4] == [("S", "S"), ("S", "O"), ("S", "X"), ("S", "-")]
    assert vocab.index(("-", "-")) == 15

def test_presence_vocabulary():
    vocab = transition_vocabulary(CellVocab.PRESENCE, 2)
    assert vocab.transitions == [("X", "X"), ("X", "-"), ("-", "X"), ("-", "-")]

def test_da_vocabulary_size():
    tagset = Tagset("swbd", tuple(f"tag{i}" for i in range(42)))
    assert transition_vocabulary(CellVocab.DA, 2, tagset).size == 1849
    assert transition_vocabulary(CellVocab.DA, 2, tagset, only_das=True).size == 1764
    with pytest.raises(ConfigError):
        transition_vocabulary(CellVocab.DA, 2)

def test_fig1_entity_grid_features(fig1_dialogue, fig1_tagset):
    v = featurize_dialogue(fig1_dialogue, FeatureSpec("T-Grid:role", tagset=fig1_tagset))
    vocab = transition_vocabulary(CellVocab.ROLE, 2)
    # 4 windows x 5 columns
    assert v.values[vocab.index(("-", "-"))] == pytest.approx(9 / 20)
    assert v.values[vocab.index(("X", "-"))] == pytest.approx(2 / 20)
    assert v.values[vocab.index(("S", "X"))] == pytest.approx(1 / 20)
    assert v.values.sum() == pytest.approx(1.0, abs=1e-9)

def test_fig1_only_das_features(fig1_dialogue, fig1_tagset):
    v = featurize_dialogue(fig1_dialogue, FeatureSpec("Only-DAs", tagset=fig1_tagset))
    vocab = transition_vocabulary(CellVocab.DA, 2, fig1_tagset, only_das=True)
    for transition in [("sd^e", "sd"), ("qo", "nn"), ("nn", "sd^e")]:
        assert v.values[vocab.index(transition)] == pytest.approx(1 / 7)
    assert np.count_nonzero(v.values) == 7

def test_combination_concatenates(fig1_dialogue, fig1_tagset):
    v = featurize_dialogue(fig1_dialogue, FeatureSpec("T-Grid:presence + Only DAs", tagset=fig1_tagset))
    assert len(v) == 4 + len(fig1_tagset) ** 2
    presence = featurize_dialogue(fig1_dialogue, FeatureSpec("T-Grid:presence", tagset=fig1_tagset))
    only_das = featurize_dialogue(fig1_dialogue, FeatureSpec("Only-DAs", tagset=fig1_tagset))
    assert np.array_equal(v.values, np.concatenate([presence.values, only_das.values]))
    assert v.values.sum() == pytest.approx(2.0, abs=2e-9)

def test_single_grid_example():
    spec = FeatureSpec("T-Grid:role")
    g = Grid(("t1", "t2"), ("a",), (("S",), ("-",)), spec.grid_spec)
    v = extract_features(g, spec)
    assert v.values[transition_vocabulary(CellVocab.ROLE, 2).index(("S", "-"))] == 1.0
    assert v.values.sum() == 1.0

def test_degenerate_inputs_give_zero_vectors(fig1_dialogue, fig1_tagset):
    short = make_dialogue("short", [[("qy", [("a", "S")])]])
    for model_name in cfg.MODEL_NAMES.values():
        v = featurize_dialogue(short, FeatureSpec(model_name, tagset=fig1_tagset))
        assert not v.values.any()
    v = featurize_dialogue(fig1_dialogue, FeatureSpec("T-Grid:role", saliency=1000, tagset=fig1_tagset))
    assert not v.values.any()

@pytest.mark.parametrize("model_name, symbols", [
    ("T-Grid:role", ("S", "O", "X", "-")),
    ("D-Grid:DA", ("qy", "na", "sd", "-")),
])
def test_matches_brute_force(model_name, symbols):
    rng = np.random.default_rng(0)
    tagset = Tagset("t", ("qy", "na", "sd"))
    for _ in range(500):
        n, saliency = int(rng.integers(2, 4)), int(rng.integers(1, 4))
        spec = FeatureSpec(model_name, n, saliency, tagset)
        vocab_symbols = spec.grid_spec.tagset.tags + ("-",) if model_name == "D-Grid:DA" else symbols
        g = random_grid(rng, spec.grid_spec, symbols)
        v = extract_features(g, spec)
        assert np.allclose(v.values, brute_force(g, vocab_symbols, n, saliency), atol=1e-12)
        if v.values.any():
            assert v.values.sum() == pytest.approx(1.0, abs=1e-9)

def test_column_permutation_invariance():
    rng = np.random.default_rng(1)
    spec = FeatureSpec("T-Grid:role")
    for _ in range(50):
        g = random_grid(rng, spec.grid_spec, ("S", "O", "X", "-"))
        order = rng.permutation(len(g.columns))
        permuted = Grid(g.rows, tuple(g.columns[j] for j in order),
                        tuple(tuple(row[j] for j in order) for row in g.cells), g.spec)
        assert extract_features(permuted, spec) == extract_features(g, spec)

def test_saliency_is_monotone(fig1_dialogue, fig1_tagset):
    nonzero = [np.count_nonzero(featurize_dialogue(fig1_dialogue, FeatureSpec("T-Grid:role", 2, s, fig1_tagset)).values)
               for s in (1, 2, 3)]
    # saliency 2 keeps company and drugs, saliency 3 keeps drugs only
    assert nonzero[2] <= nonzero[1] <= nonzero[0]

def test_not_lexicalized(fig1_tagset):
    a = make_dialogue("a", [[("qy", [("cat", "S")])], [("sd", [("cat", "O"), ("dog", "X")])]])
    b = make_dialogue("b", [[("qy", [("car", "S")])], [("sd", [("car", "O"), ("bus", "X")])]])
    for model_name in cfg.MODEL_NAMES.values():
        spec = FeatureSpec(model_name, tagset=fig1_tagset)
        assert featurize_dialogue(a, spec) == featurize_dialogue(b, spec)

def test_fingerprints_are_distinct(fig1_tagset):
    fingerprints = {FeatureSpec(m, tagset=fig1_tagset).fingerprint for m in cfg.MODEL_NAMES.values()}
    assert len(fingerprints) == 7
    assert FeatureSpec("Only-DAs", 3, tagset=fig1_tagset).fingerprint != \
        FeatureSpec("Only-DAs", 2, tagset=fig1_tagset).fingerprint

def test_vocabulary_mismatch_is_rejected(fig1_dialogue, fig1_tagset):
    g = build_grid(fig1_dialogue, make_grid_spec("T-Grid:presence", fig1_tagset))
    with pytest.raises(FeatureError):
        extract_features(g, FeatureSpec("T-Grid:role", tagset=fig1_tagset))

def test_invalid_specs():
    with pytest.raises(ConfigError):
        FeatureSpec("Entity-Graph")
    with pytest.raises(ConfigError):
        FeatureSpec("T-Grid:role", n=1)
    with pytest.raises(ConfigError):
        FeatureSpec("T-Grid:role", saliency=0)

def test_extractor_matrix(synthetic_corpus):
    extractor = FeatureExtractor("Only-DAs")
    with pytest.raises(FeatureError):
        extractor.transform(synthetic_corpus.dialogues)
    X = extractor.fit_transform(synthetic_corpus)
    assert X.shape == (len(synthetic_corpus), len(synthetic_corpus.tagset) ** 2)
    assert np.allclose(X.sum(axis=1), 1.0)

def test_parallel_featurization_keeps_order(synthetic_corpus):
    spec = FeatureSpec("D-Grid:DA", tagset=synthetic_corpus.tagset)
    dialogues = list(synthetic_corpus.dialogues[:10])
    with parallel_backend("threading"):
        parallel = featurize_dialogues(dialogues, spec, n_jobs=2)
    assert parallel == featurize_dialogues(dialogues, spec, n_jobs=1)

def test_feature_dump(fig1_dialogue, fig1_tagset):
    spec = FeatureSpec("Only-DAs", tagset=fig1_tagset)
    v = featurize_dialogue(fig1_dialogue, spec)
    stream = io.StringIO()
    write_feature_dump([("fig1", v)], stream)
    line = stream.getvalue()
    assert line.startswith(f"fig1\tOnly-DAs\t{spec.fingerprint}\t")
    assert "0.142857142857" in line
    [(dialogue_id, model_name, fingerprint, values)] = read_feature_dump(io.StringIO(line))
    assert np.allclose(to_dense(values, spec).values, v.values, atol=1e-12)
    with pytest.raises(FeatureError):
        read_feature_dump(io.StringIO("fig1\tOnly-DAs\n"))
