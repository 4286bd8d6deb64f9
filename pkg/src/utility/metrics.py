import logging
from typing import Dict, List, NamedTuple, Sequence

import numpy as np
from scipy.stats import binomtest

from utility.errors import TaskError
from utility.model import rank_scores

logger = logging.getLogger(__name__)

def rank_of(scores: Sequence[float], target: int) -> int:
    """1-based rank of a candidate under the stable descending order"""
    return 1 + [entry.index for entry in rank_scores(scores)].index(target)

class DiscriminationMetric:
    """Accuracy, MRR and P@1 of the original document against its permutations."""
    def __init__(self) -> None:
        self.reset_states()

    def reset_states(self) -> None:
        """Clear the buffer of collected values."""
        self._data = {
            "dialogue_ids": [],
            "pair_wins": [],
            "reciprocal_ranks": [],
            "p_at_1": [],
        }

    def update_state(self, dialogue_id: str, scores: Sequence[float], true_index: int) -> None:
        scores = np.asarray(scores, dtype=float)
        others = np.delete(scores, true_index)
        rank = rank_of(scores, true_index)
        self._data["dialogue_ids"].append(dialogue_id)
        self._data["pair_wins"].extend(bool(w) for w in scores[true_index] > others)
        self._data["reciprocal_ranks"].append(1.0 / rank)
        self._data["p_at_1"].append(rank == 1)

    def outcomes(self) -> Dict[str, List]:
        return {k: list(v) for k, v in self._data.items()}

    def result(self) -> Dict[str, float]:
        """Percentages; accuracy is averaged over pairs, the rest over dialogues"""
        if not self._data["dialogue_ids"]:
            raise TaskError("No discrimination instances were scored")
        return {
            "accuracy": 100.0 * float(np.mean(self._data["pair_wins"])),
            "mrr": 100.0 * float(np.mean(self._data["reciprocal_ranks"])),
            "p_at_1": 100.0 * float(np.mean(self._data["p_at_1"])),
        }

class InsertionMetric:
    """Per-dialogue average P@1 of the original slot, averaged over dialogues."""
    def __init__(self) -> None:
        self.reset_states()

    def reset_states(self) -> None:
        self._hits: Dict[str, List[bool]] = {}

    def update_state(self, dialogue_id: str, scores: Sequence[float], true_index: int) -> None:
        self._hits.setdefault(dialogue_id, []).append(rank_of(scores, true_index) == 1)

    def per_dialogue(self) -> Dict[str, float]:
        return {k: float(np.mean(v)) for k, v in self._hits.items()}

    def outcomes(self) -> Dict[str, List]:
        per_dialogue = self.per_dialogue()
        return {"dialogue_ids": list(per_dialogue), "p_at_1": list(per_dialogue.values()),
                "n_instances": sum(len(v) for v in self._hits.values())}

    def result(self) -> Dict[str, float]:
        if not self._hits:
            raise TaskError("No insertion instances were scored")
        return {"avg_p_at_1": 100.0 * float(np.mean(list(self.per_dialogue().values())))}

class SignificanceResult(NamedTuple):
    statistic: float
    p_value: float

def mcnemar_test(a: Sequence[bool], b: Sequence[bool]) -> SignificanceResult:
    """
    Exact McNemar test on paired binary outcomes of two systems. The
    statistic is the smaller discordant count.
    """
    a, b = np.asarray(a, dtype=bool), np.asarray(b, dtype=bool)
    if a.shape != b.shape:
        raise TaskError(f"Paired outcomes differ in length ({len(a)} vs {len(b)})")
    only_a = int(np.sum(a & ~b))
    only_b = int(np.sum(~a & b))
    if only_a + only_b == 0:
        return SignificanceResult(0.0, 1.0)
    p_value = binomtest(min(only_a, only_b), only_a + only_b, 0.5).pvalue
    return SignificanceResult(float(min(only_a, only_b)), float(min(p_value, 1.0)))

def fisher_randomization_test(a: Sequence[float], b: Sequence[float],
                              n_rounds: int = 10000, seed: int = 0) -> SignificanceResult:
    """
    Paired approximate randomization test on the mean difference. Each round
    swaps the two systems' values on a random subset of instances.
    """
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise TaskError(f"Paired outcomes differ in length ({len(a)} vs {len(b)})")
    diffs = a - b
    observed = abs(float(np.mean(diffs))) if len(diffs) else 0.0
    if observed == 0.0:
        return SignificanceResult(0.0, 1.0)
    rng = np.random.default_rng(seed)
    at_least, chunk = 0, 1000
    for start in range(0, n_rounds, chunk):
        size = min(chunk, n_rounds - start)
        signs = rng.choice((-1.0, 1.0), size=(size, len(diffs)))
        at_least += int(np.sum(np.abs(signs @ diffs) / len(diffs) >= observed - 1e-12))
    return SignificanceResult(observed, (at_least + 1) / (n_rounds + 1))
