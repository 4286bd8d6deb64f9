"""
task_generator.py
====================================
Discrimination and insertion task instances with frozen randomness, task
bundle files and preference pairs for training.
"""

import itertools
import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

from tqdm import tqdm

from tools.feature_extractor import FeatureSpec, featurize_dialogue, featurize_dialogues
from tools.ranker_trainer import PreferencePair
from utility.dialogue import Corpus, Dialogue
from utility.errors import TaskError
from utility.training import make_rng

logger = logging.getLogger(__name__)

# Up to this many turns every permutation is enumerated and sampled without
# replacement; longer dialogues use rejection sampling
ENUMERATION_LIMIT = 7

@dataclass(frozen=True)
class PermutationSet:
    dialogue_id: str
    permutations: Tuple[Tuple[int, ...], ...]
    seed: int
    k: int = 20

    def __len__(self) -> int:
        return len(self.permutations)

    @property
    def capped(self) -> bool:
        return len(self.permutations) < self.k

@dataclass(frozen=True)
class InsertionInstance:
    dialogue_id: str
    removed_turn_index: int
    candidate_positions: Tuple[int, ...]
    seed: int

def _check_length(d: Dialogue) -> int:
    n = len(d.turns)
    if n < 2:
        raise TaskError(f"{d.dialogue_id}: needs at least 2 turns, has {n}")
    return n

def max_distinct_permutations(n_turns: int, k: int) -> int:
    """min(k, n! - 1) without computing huge factorials"""
    if n_turns > 20:
        return k
    return min(k, math.factorial(n_turns) - 1)

def generate_permutations(d: Dialogue, k: int = 20, seed: int = 0) -> PermutationSet:
    """
    Distinct non-identity turn orders of a dialogue, fixed by dialogue id
    and seed
    :param d: dialogue with at least 2 turns
    :param k: number of permutations wanted
    :param seed: task seed
    :return: the permutation set, capped for short dialogues
    """
    n = _check_length(d)
    rng = make_rng(seed, d.dialogue_id, "permutations")
    target = max_distinct_permutations(n, k)
    identity = tuple(range(n))
    if n <= ENUMERATION_LIMIT:
        candidates = [p for p in itertools.permutations(range(n)) if p != identity]
        chosen = rng.choice(len(candidates), size=target, replace=False)
        permutations = [candidates[i] for i in chosen]
    else:
        permutations, seen = [], {identity}
        while len(permutations) < target:
            p = tuple(int(i) for i in rng.permutation(n))
            if p not in seen:
                seen.add(p)
                permutations.append(p)
    if target < k:
        logger.debug("%s: %d turns allow only %d permutations", d.dialogue_id, n, target)
    return PermutationSet(d.dialogue_id, tuple(permutations), seed, k)

def generate_insertions(d: Dialogue, n_turns: int = 10, n_positions: int = 10,
                        seed: int = 0) -> List[InsertionInstance]:
    """
    Picks up to n_turns turns and, for each, up to n_positions insertion
    slots including the turn's original slot. Removing one of n turns
    leaves n slots.
    """
    n = _check_length(d)
    rng = make_rng(seed, d.dialogue_id, "insertions")
    removed = sorted(int(i) for i in rng.choice(n, size=min(n_turns, n), replace=False))
    instances = []
    for index in removed:
        others = [slot for slot in range(n) if slot != index]
        picked = rng.choice(others, size=min(n_positions, n) - 1, replace=False)
        slots = tuple(sorted([index] + [int(s) for s in picked]))
        instances.append(InsertionInstance(d.dialogue_id, index, slots, seed))
    return instances

def eligible_dialogues(corpus: Corpus) -> List[Dialogue]:
    eligible = [d for d in corpus if len(d.turns) >= 2]
    if len(eligible) < len(corpus):
        logger.warning("Skipping %d dialogues with fewer than 2 turns", len(corpus) - len(eligible))
    return eligible

def generate_task_sets(corpus: Corpus, k: int = 20, n_turns: int = 10, n_positions: int = 10,
                       seed: int = 0) -> Tuple[Dict[str, PermutationSet], Dict[str, List[InsertionInstance]]]:
    perms, insertions = {}, {}
    for d in eligible_dialogues(corpus):
        perms[d.dialogue_id] = generate_permutations(d, k, seed)
        insertions[d.dialogue_id] = generate_insertions(d, n_turns, n_positions, seed)
    capped = sum(p.capped for p in perms.values())
    if capped:
        logger.warning("%d dialogues are too short for %d distinct permutations", capped, k)
    return perms, insertions

def build_training_pairs(corpus: Corpus, perms: Mapping[str, PermutationSet], spec: FeatureSpec,
                         n_jobs: int = 1, verbose: bool = False) -> List[PreferencePair]:
    """
    One (original, permuted) preference pair per permutation of every
    dialogue that can be permuted
    """
    pairs = []
    for d in tqdm(eligible_dialogues(corpus), disable=not verbose, desc=spec.model_name):
        if d.dialogue_id not in perms:
            raise TaskError(f"No permutation set for dialogue {d.dialogue_id}")
        original = featurize_dialogue(d, spec)
        permuted = featurize_dialogues([d.reorder(p) for p in perms[d.dialogue_id].permutations], spec, n_jobs)
        pairs.extend(PreferencePair(original, v, d.dialogue_id) for v in permuted)
    degenerate = sum(pair.degenerate for pair in pairs)
    if degenerate:
        logger.info("%s: %d of %d pairs are degenerate", spec.model_name, degenerate, len(pairs))
    return pairs

def _dumps(record: dict) -> str:
    return json.dumps(record, ensure_ascii=False, separators=(",", ":"))

def write_permutation_bundle(perms: Mapping[str, PermutationSet], path: Union[str, Path],
                             config: Optional[dict] = None) -> None:
    with open(path, 'w', encoding='utf-8', newline='\n') as stream:
        stream.write(_dumps({"type": "config", "config": config or {}}) + "\n")
        for p in perms.values():
            record = {"type": "permutations", "dialogue_id": p.dialogue_id, "seed": p.seed, "k": p.k,
                      "permutations": [list(q) for q in p.permutations]}
            if p.capped:
                record["note"] = f"capped at {len(p)} distinct permutations"
            stream.write(_dumps(record) + "\n")

def write_insertion_bundle(insertions: Mapping[str, Sequence[InsertionInstance]], path: Union[str, Path],
                           config: Optional[dict] = None) -> None:
    with open(path, 'w', encoding='utf-8', newline='\n') as stream:
        stream.write(_dumps({"type": "config", "config": config or {}}) + "\n")
        for instances in insertions.values():
            for i in instances:
                stream.write(_dumps({"type": "insertion", "dialogue_id": i.dialogue_id, "seed": i.seed,
                                     "removed_turn_index": i.removed_turn_index,
                                     "candidate_positions": list(i.candidate_positions)}) + "\n")

def _read_records(path: Union[str, Path], record_type: str) -> List[dict]:
    records = []
    try:
        with open(path, 'r', encoding='utf-8') as stream:
            for line_no, line in enumerate(stream, start=1):
                if not line.strip():
                    continue
                raw = json.loads(line)
                if not isinstance(raw, dict):
                    raise TaskError(f"{path}:{line_no}: record must be a JSON object")
                if raw.get("type") == record_type:
                    records.append(raw)
                elif raw.get("type") != "config":
                    raise TaskError(f"{path}:{line_no}: unexpected record type {raw.get('type')!r}")
    except (OSError, json.JSONDecodeError) as e:
        raise TaskError(f"{path}: unreadable task bundle ({e})") from e
    return records

def read_bundle_config(path: Union[str, Path]) -> dict:
    """Run configuration echoed in a bundle's header record"""
    try:
        with open(path, 'r', encoding='utf-8') as stream:
            header = json.loads(stream.readline() or "{}")
    except (OSError, json.JSONDecodeError) as e:
        raise TaskError(f"{path}: unreadable task bundle ({e})") from e
    if not isinstance(header, dict) or header.get("type") != "config":
        raise TaskError(f"{path}: bundle does not start with a config record")
    return header.get("config") or {}

def read_permutation_bundle(path: Union[str, Path]) -> Dict[str, PermutationSet]:
    perms = {}
    for raw in _read_records(path, "permutations"):
        try:
            perms[raw["dialogue_id"]] = PermutationSet(raw["dialogue_id"],
                                                       tuple(tuple(p) for p in raw["permutations"]),
                                                       raw["seed"], raw.get("k", 20))
        except (KeyError, TypeError) as e:
            raise TaskError(f"{path}: malformed permutation record ({e!r})") from e
    return perms

def read_insertion_bundle(path: Union[str, Path]) -> Dict[str, List[InsertionInstance]]:
    insertions = {}
    for raw in _read_records(path, "insertion"):
        try:
            insertions.setdefault(raw["dialogue_id"], []).append(
                InsertionInstance(raw["dialogue_id"], raw["removed_turn_index"],
                                  tuple(raw["candidate_positions"]), raw["seed"]))
        except (KeyError, TypeError) as e:
            raise TaskError(f"{path}: malformed insertion record ({e!r})") from e
    return insertions
