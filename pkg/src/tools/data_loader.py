import io
import json
import logging
from abc import ABC, abstractmethod
from pathlib import Path
from typing import IO, Dict, Iterable, Iterator, List, Optional, Tuple, Union

import numpy as np

from utility.dialogue import (ABSENT, Corpus, DAUnit, Dialogue, EntityMention, Role,
                              Tagset, Turn, normalize_entity, validate_dialogue)
from utility.errors import CorpusError
import config as cfg

logger = logging.getLogger(__name__)

CorpusInput = Union[bytes, str, IO, Iterable]

class BaseDataLoader(ABC):
    """
    Base class for corpus loaders.
    """
    def __init__(self):
        self.corpus: Corpus = None

    @abstractmethod
    def load_data(self) -> "BaseDataLoader":
        """Loads the corpus at startup"""

    def get_data(self) -> Corpus:
        """
        This method returns the loaded corpus
        :return: corpus
        """
        return self.corpus

    def prepare_data(self, ratios: Tuple[float, float, float] = (0.64, 0.20, 0.16),
                     seed: int = 0) -> Tuple[Corpus, Corpus, Corpus]:
        """
        This method splits the corpus and returns the train, test and dev parts
        :param ratios: train, test and dev fractions
        :param seed: split seed
        :return: three corpora
        """
        from utility.training import split_corpus
        corpus = split_corpus(self.corpus, ratios, seed, override=True)
        return corpus.subset("train"), corpus.subset("test"), corpus.subset("dev")

class JsonlDataLoader(BaseDataLoader):
    """
    Data loader for JSON Lines corpora with a tagset sidecar file
    """
    def __init__(self, corpus_path: Union[str, Path], tagset_path: Optional[Union[str, Path]] = None):
        super().__init__()
        self.corpus_path = Path(corpus_path)
        self.tagset_path = Path(tagset_path) if tagset_path is not None else None

    def load_data(self):
        tagset = load_tagset(self.tagset_path) if self.tagset_path is not None else None
        with open(self.corpus_path, 'rb') as stream:
            self.corpus = parse_corpus(stream, tagset)
        logger.info("Loaded %d dialogues from %s", len(self.corpus), self.corpus_path)
        return self

class SyntheticDataLoader(BaseDataLoader):
    """
    Data loader generating dialogues whose only coherence signal is a
    first-order Markov chain over DA tags. Entity mentions are drawn
    independently of position, so turn order carries no entity information.
    """
    def __init__(self, n_dialogues: int = 200, min_turns: int = 10, max_turns: int = 16,
                 n_entities: int = 8, markov_strength: float = 0.9, seed: int = 0):
        super().__init__()
        if min_turns < 2 or max_turns < min_turns:
            raise CorpusError(f"Invalid turn range [{min_turns}, {max_turns}]")
        self.n_dialogues = n_dialogues
        self.min_turns = min_turns
        self.max_turns = max_turns
        self.n_entities = n_entities
        self.markov_strength = markov_strength
        self.seed = seed

    def load_data(self):
        rng = np.random.default_rng(self.seed)
        tagset = Tagset(cfg.SYNTHETIC_TAGSET_ID, tuple(cfg.SYNTHETIC_SUCCESSORS))
        dialogues = [self._make_dialogue(f"syn_{i:04d}", tagset, rng) for i in range(self.n_dialogues)]
        self.corpus = Corpus(tuple(dialogues), tagset)
        return self

    def _next_tag(self, tag: str, tags: List[str], rng: np.random.Generator) -> str:
        if rng.random() < self.markov_strength:
            successors = cfg.SYNTHETIC_SUCCESSORS[tag]
            return successors[rng.integers(len(successors))]
        return tags[rng.integers(len(tags))]

    def _make_mentions(self, rng: np.random.Generator) -> Tuple[EntityMention, ...]:
        mentions = []
        for _ in range(rng.integers(0, 3)):
            entity = f"entity{rng.integers(self.n_entities)}"
            role = (Role.S, Role.O, Role.X)[rng.integers(3)]
            mentions.append(EntityMention(entity, role, entity))
        return tuple(mentions)

    def _make_dialogue(self, dialogue_id: str, tagset: Tagset, rng: np.random.Generator) -> Dialogue:
        tags = list(tagset.tags)
        n_turns = int(rng.integers(self.min_turns, self.max_turns + 1))
        tag = tags[rng.integers(len(tags))]
        turns = []
        for t in range(n_turns):
            units = []
            for _ in range(rng.integers(1, 3)):
                units.append(DAUnit(tag, f"{tag} utterance", self._make_mentions(rng)))
                tag = self._next_tag(tag, tags, rng)
            turns.append(Turn("AB"[t % 2], tuple(units)))
        return Dialogue(dialogue_id, tuple(turns), tagset.tagset_id)

def load_tagset(path: Union[str, Path]) -> Tagset:
    """
    Loads a tagset sidecar file {"tagset_id": str, "tags": [str, ...]}
    :param path: file path
    :return: the tagset
    """
    try:
        with open(path, 'r', encoding='utf-8') as stream:
            raw = json.load(stream)
        tagset_id, tags = str(raw["tagset_id"]), [str(t) for t in raw["tags"]]
    except (OSError, ValueError, KeyError, TypeError) as e:
        raise CorpusError(f"{path}: unreadable tagset file ({e})") from e
    if not tags:
        raise CorpusError(f"{path}: tagset {tagset_id!r} is empty")
    if ABSENT in tags:
        raise CorpusError(f"{path}: {ABSENT!r} is reserved for absent grid cells")
    if len(set(tags)) != len(tags):
        raise CorpusError(f"{path}: tagset {tagset_id!r} lists duplicate tags")
    return Tagset(tagset_id, tuple(tags))

def write_tagset(tagset: Tagset, path: Union[str, Path]) -> None:
    with open(path, 'w', encoding='utf-8', newline='\n') as stream:
        stream.write(_dumps({"tagset_id": tagset.tagset_id, "tags": list(tagset.tags)}) + "\n")

def _require(raw: dict, key: str, kind: type, line_no: int):
    if not isinstance(raw, dict) or key not in raw:
        raise CorpusError(f"line {line_no}: missing field {key!r}")
    value = raw[key]
    if not isinstance(value, kind):
        raise CorpusError(f"line {line_no}: field {key!r} must be {kind.__name__}")
    return _encodable(value, key, line_no) if kind is str else value

def _encodable(value: str, key: str, line_no: int) -> str:
    # JSON escapes can carry lone surrogates that UTF-8 cannot write back
    try:
        value.encode("utf-8")
    except UnicodeEncodeError as e:
        raise CorpusError(f"line {line_no}: field {key!r} is not encodable as UTF-8 ({e.reason})") from e
    return value

def _optional(raw: dict, key: str, line_no: int) -> str:
    return _encodable(str(raw.get(key, "")), key, line_no)

def _mention_from_record(raw: dict, line_no: int) -> EntityMention:
    entity = _require(raw, "entity", str, line_no)
    role = _require(raw, "role", str, line_no)
    try:
        role = Role(role)
    except ValueError:
        raise CorpusError(f"line {line_no}: invalid role {role!r}") from None
    return EntityMention(normalize_entity(entity), role, _optional(raw, "surface", line_no))

def dialogue_from_record(raw: dict, line_no: int = 0) -> Dialogue:
    turns = []
    for turn in _require(raw, "turns", list, line_no):
        units = []
        for unit in _require(turn, "units", list, line_no):
            mentions = tuple(_mention_from_record(m, line_no) for m in _require(unit, "mentions", list, line_no))
            units.append(DAUnit(_require(unit, "da_tag", str, line_no), _optional(unit, "text", line_no), mentions))
        turns.append(Turn(_optional(turn, "speaker", line_no), tuple(units)))
    return Dialogue(_require(raw, "dialogue_id", str, line_no), tuple(turns),
                    _require(raw, "tagset_id", str, line_no))

def dialogue_to_record(d: Dialogue) -> dict:
    return {
        "dialogue_id": d.dialogue_id,
        "tagset_id": d.tagset_id,
        "turns": [{
            "speaker": turn.speaker,
            "units": [{
                "da_tag": unit.da_tag,
                "text": unit.text,
                "mentions": [{"entity": m.entity_id, "role": m.role.value, "surface": m.surface}
                             for m in unit.mentions],
            } for unit in turn.units],
        } for turn in d.turns],
    }

def _lines(stream: CorpusInput) -> Iterator[str]:
    if isinstance(stream, (bytes, str)):
        stream = io.BytesIO(stream) if isinstance(stream, bytes) else io.StringIO(stream)
    for line_no, line in enumerate(stream, start=1):
        if isinstance(line, bytes):
            try:
                line = line.decode('utf-8')
            except UnicodeDecodeError as e:
                raise CorpusError(f"line {line_no}: invalid UTF-8 ({e.reason})") from e
        yield line

def iter_dialogues(stream: CorpusInput) -> Iterator[Tuple[int, Dialogue]]:
    """
    Parses a JSONL corpus line by line without tagset validation
    :param stream: bytes, text or a (binary or text) file object
    :return: (line number, dialogue) pairs
    """
    for line_no, line in enumerate(_lines(stream), start=1):
        if not line.strip():
            continue
        try:
            raw = json.loads(line)
        except json.JSONDecodeError as e:
            raise CorpusError(f"line {line_no}: malformed JSON ({e.msg})") from e
        yield line_no, dialogue_from_record(raw, line_no)

def infer_tagset(dialogues: List[Dialogue]) -> Tagset:
    """Tagset made of the tags in order of first appearance"""
    tagset_ids = {d.tagset_id for d in dialogues}
    if len(tagset_ids) > 1:
        raise CorpusError(f"Corpus mixes tagsets {sorted(tagset_ids)}; pass a tagset file")
    tags = {}
    for d in dialogues:
        for tag in d.da_tags:
            tags.setdefault(tag, None)
    return Tagset(tagset_ids.pop() if tagset_ids else "", tuple(tags))

def parse_corpus(stream: CorpusInput, tagset: Optional[Tagset] = None) -> Corpus:
    """
    Parses and validates a JSONL corpus. Without a tagset, the tagset is
    inferred from the tags present in the corpus.
    :param stream: UTF-8 JSON Lines input
    :param tagset: declared tag inventory
    :return: a validated corpus
    """
    dialogues, line_numbers = [], {}
    for line_no, dialogue in iter_dialogues(stream):
        if dialogue.dialogue_id in line_numbers:
            raise CorpusError(f"line {line_no}: duplicate dialogue_id {dialogue.dialogue_id!r} "
                              f"(first on line {line_numbers[dialogue.dialogue_id]})")
        line_numbers[dialogue.dialogue_id] = line_no
        dialogues.append(dialogue)
    if tagset is None:
        tagset = infer_tagset(dialogues)
    for dialogue in dialogues:
        violations = validate_dialogue(dialogue, tagset)
        if violations:
            raise CorpusError(f"line {line_numbers[dialogue.dialogue_id]}: {violations[0]}")
    return Corpus(tuple(dialogues), tagset)

def _dumps(record: dict) -> str:
    return json.dumps(record, ensure_ascii=False, separators=(",", ":"))

def serialize_corpus(c: Corpus) -> bytes:
    """Canonical JSONL form: fixed key order, no insignificant whitespace, LF endings"""
    return "".join(_dumps(dialogue_to_record(d)) + "\n" for d in c.dialogues).encode('utf-8')

def write_corpus(c: Corpus, path: Union[str, Path]) -> None:
    with open(path, 'wb') as stream:
        stream.write(serialize_corpus(c))

def corpus_statistics(c: Corpus) -> Dict[str, float]:
    """
    Dataset-shape statistics: DA tag count, average tokens per turn, average
    turns per dialogue and split sizes
    """
    n_turns = sum(len(d.turns) for d in c.dialogues)
    n_tokens = sum(len(unit.text.split()) for d in c.dialogues for unit in d.units)
    stats = {
        "n_dialogues": len(c.dialogues),
        "n_da_tags": len(c.tagset),
        "avg_tokens_per_turn": n_tokens / n_turns if n_turns else 0.0,
        "avg_turns_per_dialogue": n_turns / len(c.dialogues) if c.dialogues else 0.0,
    }
    if c.split is not None:
        for name, ids in c.split.items():
            stats[f"n_{name}"] = len(ids)
    return stats

def check_corpus_profile(stats: Dict[str, float], dataset_name: str) -> List[str]:
    """
    Compares corpus statistics with the known shape of a dataset. Values
    outside the profile's sanity range are returned and logged as warnings.
    """
    profile = cfg.DATASET_PROFILES.get(dataset_name.lower())
    if profile is None:
        return []
    warnings = []
    for key, (low, high) in profile.items():
        value = stats.get(key)
        if value is not None and not low <= value <= high:
            warnings.append(f"{key}={value:.2f} outside the {dataset_name} range [{low}, {high}]")
    for warning in warnings:
        logger.warning(warning)
    return warnings
