import hashlib
import json
import logging
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np
from sklearn.utils import shuffle

from tools.data_loader import BaseDataLoader, JsonlDataLoader, SyntheticDataLoader
from utility.dialogue import SPLIT_NAMES, Corpus, validate_corpus
from utility.errors import ConfigError, CorpusError

logger = logging.getLogger(__name__)

def make_rng(seed: int, *keys: Union[str, int]) -> np.random.Generator:
    """
    Random generator that depends only on the seed and the given keys, so a
    dialogue's task instances do not change with corpus order or models
    """
    digest = hashlib.sha256(":".join(str(k) for k in (seed,) + keys).encode('utf-8')).digest()
    return np.random.default_rng(int.from_bytes(digest[:8], 'big'))

def check_ratios(ratios: Sequence[float]) -> None:
    if len(ratios) != 3 or any(r < 0 for r in ratios):
        raise ConfigError(f"Split ratios must be three non-negative fractions, got {list(ratios)}")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ConfigError(f"Split ratios must sum to 1, got {sum(ratios)}")

def split_corpus(c: Corpus, ratios: Sequence[float], seed: int, override: bool = False) -> Corpus:
    """
    Seeded train/test/dev partition by dialogue count
    :param c: corpus
    :param ratios: train, test and dev fractions summing to 1
    :param seed: shuffle seed
    :param override: replace an existing split
    :return: the corpus carrying the split
    """
    check_ratios(ratios)
    if len(c) == 0:
        raise CorpusError("Cannot split an empty corpus")
    if c.split is not None and not override:
        raise ConfigError("Corpus already has a split; pass override to replace it")

    ids = c.ids
    n = len(ids)
    n_train = int(round(ratios[0] * n))
    n_test = min(int(round(ratios[1] * n)), n - n_train)
    shuffled = shuffle(ids, random_state=seed)
    position = {dialogue_id: i for i, dialogue_id in enumerate(ids)}
    parts = (shuffled[:n_train], shuffled[n_train:n_train + n_test], shuffled[n_train + n_test:])
    split = {name: tuple(sorted(part, key=position.get)) for name, part in zip(SPLIT_NAMES, parts)}
    logger.info("Split %d dialogues into %s", n, {name: len(part) for name, part in split.items()})
    return Corpus(c.dialogues, c.tagset, split)

def with_split(c: Corpus, split: dict) -> Corpus:
    corpus = Corpus(c.dialogues, c.tagset, {name: tuple(ids) for name, ids in split.items()})
    violations = [v for v in validate_corpus(corpus) if v.code.startswith(("SPLIT", "UNKNOWN_SPLIT"))]
    if violations:
        raise CorpusError(f"Invalid split: {violations[0]}")
    return corpus

def get_data_loader(dataset_name: str, corpus_path: Optional[str] = None,
                    tagset_path: Optional[str] = None, seed: int = 0) -> BaseDataLoader:
    if corpus_path is not None:
        return JsonlDataLoader(corpus_path, tagset_path)
    elif dataset_name.lower() == "synthetic":
        return SyntheticDataLoader(seed=seed)
    else:
        raise ConfigError(f"No corpus file given for dataset {dataset_name!r}")

def write_split(c: Corpus, path: Union[str, Path], config: Optional[dict] = None) -> None:
    if c.split is None:
        raise CorpusError("Corpus has no split to write")
    record = {"split": {name: list(ids) for name, ids in c.split.items()}}
    if config is not None:
        record["config"] = config
    with open(path, 'w', encoding='utf-8', newline='\n') as stream:
        json.dump(record, stream, indent=1)
        stream.write("\n")

def read_split(path: Union[str, Path]) -> dict:
    try:
        with open(path, 'r', encoding='utf-8') as stream:
            return json.load(stream)["split"]
    except (OSError, ValueError, KeyError, TypeError) as e:
        raise CorpusError(f"{path}: unreadable split file ({e})") from e
