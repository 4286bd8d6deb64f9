"""
feature_extractor.py
====================================
Transition-probability feature vectors over grid columns.
"""

import hashlib
import itertools
import json
import logging
from dataclasses import dataclass
from typing import IO, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed
from numpy.lib.stride_tricks import sliding_window_view

from tools.grid_builder import CellVocab, Grid, GridSpec, build_grid, make_grid_spec
from utility.dialogue import ABSENT, Corpus, Dialogue, Role, Tagset
from utility.errors import ConfigError, FeatureError
import config as cfg

logger = logging.getLogger(__name__)

ROLE_SYMBOLS = (Role.S.value, Role.O.value, Role.X.value, ABSENT)
PRESENCE_SYMBOLS = (Role.X.value, ABSENT)

def _digest(payload) -> str:
    return hashlib.sha256(json.dumps(payload, ensure_ascii=False).encode('utf-8')).hexdigest()[:16]

@dataclass(frozen=True)
class TransitionVocabulary:
    """All length-n transitions over an ordered symbol set, in lexicographic
    order of the declared symbol order"""
    symbols: Tuple[str, ...]
    n: int

    @property
    def size(self) -> int:
        return len(self.symbols) ** self.n

    def __len__(self) -> int:
        return self.size

    @property
    def transitions(self) -> List[Tuple[str, ...]]:
        return list(itertools.product(self.symbols, repeat=self.n))

    def index(self, transition: Sequence[str]) -> int:
        position = {s: i for i, s in enumerate(self.symbols)}
        idx = 0
        for symbol in transition:
            idx = idx * len(self.symbols) + position[symbol]
        return idx

    @property
    def fingerprint(self) -> str:
        return _digest({"symbols": list(self.symbols), "n": self.n})

def transition_vocabulary(cell_vocab: CellVocab, n: int, tagset: Optional[Tagset] = None,
                          only_das: bool = False) -> TransitionVocabulary:
    if n < 2:
        raise ConfigError(f"Transition length must be at least 2, got {n}")
    if cell_vocab == CellVocab.ROLE:
        return TransitionVocabulary(ROLE_SYMBOLS, n)
    elif cell_vocab == CellVocab.PRESENCE:
        return TransitionVocabulary(PRESENCE_SYMBOLS, n)
    if tagset is None:
        raise ConfigError("DA transitions need a tagset")
    if only_das:
        return TransitionVocabulary(tuple(tagset.tags), n)
    return TransitionVocabulary(tuple(tagset.tags) + (ABSENT,), n)

def grid_vocabulary(spec: GridSpec, n: int) -> TransitionVocabulary:
    return transition_vocabulary(spec.cell_vocab, n, spec.tagset, spec.only_das)

@dataclass(frozen=True)
class FeatureSpec:
    model_name: str
    n: int = 2
    saliency: int = 1
    tagset: Optional[Tagset] = None

    def __post_init__(self):
        if self.model_name not in cfg.MODEL_NAMES.values():
            raise ConfigError(f"Unknown model {self.model_name!r}")
        if self.n < 2:
            raise ConfigError(f"Transition length must be at least 2, got {self.n}")
        if self.saliency < 1:
            raise ConfigError(f"Saliency must be at least 1, got {self.saliency}")

    @property
    def tagset_id(self) -> Optional[str]:
        return self.tagset.tagset_id if self.tagset is not None else None

    @property
    def is_combination(self) -> bool:
        return self.model_name in cfg.COMBINATION_MODELS

    @property
    def components(self) -> List["FeatureSpec"]:
        """Single-grid specs making up this model"""
        if not self.is_combination:
            return [self]
        return [FeatureSpec(name, self.n, self.saliency, self.tagset)
                for name in cfg.COMBINATION_MODELS[self.model_name]]

    @property
    def grid_spec(self) -> GridSpec:
        if self.is_combination:
            raise ConfigError(f"{self.model_name!r} concatenates two grids")
        return make_grid_spec(self.model_name, self.tagset)

    @property
    def size(self) -> int:
        return sum(grid_vocabulary(c.grid_spec, c.n).size for c in self.components)

    @property
    def fingerprint(self) -> str:
        return model_fingerprint(self)

def model_fingerprint(spec: FeatureSpec) -> str:
    """Hash of the model name and the vocabularies generating its vectors"""
    vocabularies = [grid_vocabulary(c.grid_spec, c.n).fingerprint for c in spec.components]
    return _digest({"model": spec.model_name, "vocabularies": vocabularies})

@dataclass(frozen=True, eq=False)
class FeatureVector:
    values: np.ndarray
    vocab_fingerprint: str
    model_name: str

    def __len__(self) -> int:
        return len(self.values)

    def __eq__(self, other) -> bool:
        if not isinstance(other, FeatureVector):
            return NotImplemented
        return (self.vocab_fingerprint == other.vocab_fingerprint
                and self.model_name == other.model_name
                and np.array_equal(self.values, other.values))

    __hash__ = None

def _cell_codes(g: Grid, vocab: TransitionVocabulary) -> np.ndarray:
    position = {s: i for i, s in enumerate(vocab.symbols)}
    codes = np.empty(g.shape, dtype=np.int64)
    for r, row in enumerate(g.cells):
        for c, cell in enumerate(row):
            try:
                codes[r, c] = position[cell]
            except KeyError:
                raise FeatureError(f"Cell {cell!r} at ({g.rows[r]}, {g.columns[c]}) "
                                   f"is not in the transition vocabulary") from None
    return codes

def count_transitions(g: Grid, vocab: TransitionVocabulary, saliency: int = 1) -> Tuple[np.ndarray, int]:
    """
    Counts every window of n consecutive cells in the salient columns
    :return: counts indexed like the vocabulary, and the number of windows
    """
    codes = _cell_codes(g, vocab)
    if ABSENT in vocab.symbols:
        frequency = (codes != vocab.symbols.index(ABSENT)).sum(axis=0)
    else:
        frequency = np.full(codes.shape[1], codes.shape[0])
    codes = codes[:, frequency >= saliency]
    n_rows, n_columns = codes.shape
    if n_rows < vocab.n or n_columns == 0:
        return np.zeros(vocab.size, dtype=np.int64), 0
    windows = sliding_window_view(codes, vocab.n, axis=0)
    weights = len(vocab.symbols) ** np.arange(vocab.n - 1, -1, -1, dtype=np.int64)
    idx = windows @ weights
    return np.bincount(idx.ravel(), minlength=vocab.size), idx.size

def extract_features(g: Grid, spec: FeatureSpec) -> FeatureVector:
    """
    Transition probabilities of a single grid; all zeros when the grid has
    no window of length n in a salient column
    """
    expected = grid_vocabulary(spec.grid_spec, spec.n)
    vocab = grid_vocabulary(g.spec, spec.n)
    if vocab.fingerprint != expected.fingerprint:
        raise FeatureError(f"Grid vocabulary {vocab.fingerprint} does not match "
                           f"{spec.model_name} ({expected.fingerprint})")
    counts, total = count_transitions(g, vocab, spec.saliency)
    values = counts / total if total else np.zeros(vocab.size)
    return FeatureVector(values, model_fingerprint(spec), spec.model_name)

def featurize_dialogue(d: Dialogue, spec: FeatureSpec) -> FeatureVector:
    """
    Feature vector of a dialogue. Combination models concatenate the
    separately normalized vectors of their two grids.
    """
    parts = [extract_features(build_grid(d, c.grid_spec), c).values for c in spec.components]
    return FeatureVector(np.concatenate(parts), model_fingerprint(spec), spec.model_name)

def featurize_dialogues(dialogues: Sequence[Dialogue], spec: FeatureSpec, n_jobs: int = 1) -> List[FeatureVector]:
    """Featurizes dialogues in input order, in parallel when n_jobs != 1"""
    if n_jobs == 1:
        return [featurize_dialogue(d, spec) for d in dialogues]
    return Parallel(n_jobs=n_jobs)(delayed(featurize_dialogue)(d, spec) for d in dialogues)

class FeatureExtractor:
    """
    Featurizes whole corpora for one model. The tagset is taken from the
    corpus the extractor is fitted on.
    """
    def __init__(self, model_name: str, n: int = 2, saliency: int = 1, n_jobs: int = 1):
        self.model_name = model_name
        self.n = n
        self.saliency = saliency
        self.n_jobs = n_jobs
        self.fitted = False

    def fit(self, corpus: Corpus):
        self.spec = FeatureSpec(self.model_name, self.n, self.saliency, corpus.tagset)
        self.fitted = True
        return self

    def vectors(self, dialogues: Iterable[Dialogue]) -> List[FeatureVector]:
        if not self.fitted:
            raise FeatureError(f"{self.model_name} extractor is not fitted yet")
        return featurize_dialogues(list(dialogues), self.spec, self.n_jobs)

    def transform(self, dialogues: Iterable[Dialogue]) -> np.ndarray:
        vectors = self.vectors(dialogues)
        if not vectors:
            return np.zeros((0, self.spec.size))
        return np.stack([v.values for v in vectors])

    def fit_transform(self, corpus: Corpus) -> np.ndarray:
        return self.fit(corpus).transform(corpus.dialogues)

def write_feature_dump(records: Iterable[Tuple[str, FeatureVector]], stream: IO[str]) -> None:
    """One line per dialogue: id, model, fingerprint and sparse index:value pairs"""
    for dialogue_id, vector in records:
        pairs = " ".join(f"{i}:{vector.values[i]:.12g}" for i in np.flatnonzero(vector.values))
        stream.write(f"{dialogue_id}\t{vector.model_name}\t{vector.vocab_fingerprint}\t{pairs}\n")

def read_feature_dump(stream: IO[str]) -> List[Tuple[str, str, str, Dict[int, float]]]:
    records = []
    for line_no, line in enumerate(stream, start=1):
        line = line.rstrip("\n")
        if not line:
            continue
        fields = line.split("\t")
        if len(fields) != 4:
            raise FeatureError(f"line {line_no}: expected 4 tab-separated fields")
        dialogue_id, model_name, fingerprint, pairs = fields
        try:
            values = {int(i): float(v) for i, v in (p.split(":") for p in pairs.split())}
        except ValueError as e:
            raise FeatureError(f"line {line_no}: bad index:value pair ({e})") from e
        records.append((dialogue_id, model_name, fingerprint, values))
    return records

def to_dense(values: Dict[int, float], spec: FeatureSpec) -> FeatureVector:
    dense = np.zeros(spec.size)
    for i, v in values.items():
        dense[i] = v
    return FeatureVector(dense, spec.fingerprint, spec.model_name)
