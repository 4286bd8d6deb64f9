"""
evaluator.py
====================================
Scorers, discrimination and insertion evaluation, and coherence reports.
"""

import itertools
import json
import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Mapping, Optional, Sequence, Union

import numpy as np
import pandas as pd
from tqdm import tqdm

from tools.feature_extractor import FeatureSpec, featurize_dialogues
from tools.task_generator import InsertionInstance, PermutationSet, eligible_dialogues
from utility.dialogue import Corpus, Dialogue
from utility.errors import ConfigError, ModelError, TaskError
from utility.metrics import (DiscriminationMetric, InsertionMetric, fisher_randomization_test,
                             mcnemar_test)
from utility.model import RankingModel, score
import config as cfg

logger = logging.getLogger(__name__)

# Candidates are listed with the original last, so a tie always ranks the
# original below the alternative it ties with
TIE_POLICY = "original-last"

class BaseScorer(ABC):
    """Scores a candidate set; higher means more coherent."""
    name = "base"

    @abstractmethod
    def score_candidates(self, candidates: Sequence[Dialogue], true_index: int) -> np.ndarray:
        """One score per candidate, in input order"""

class TrainedScorer(BaseScorer):
    name = "trained"

    def __init__(self, model: RankingModel, spec: FeatureSpec, n_jobs: int = 1):
        if model.vocab_fingerprint != spec.fingerprint:
            raise ModelError(f"Model {model.model_name} ({model.vocab_fingerprint}) does not "
                             f"match features {spec.model_name} ({spec.fingerprint})")
        self.model = model
        self.spec = spec
        self.n_jobs = n_jobs

    def score_candidates(self, candidates, true_index):
        vectors = featurize_dialogues(candidates, self.spec, self.n_jobs)
        return np.array([score(self.model, v) for v in vectors])

class RandomScorer(BaseScorer):
    """Uniform random scores from one seeded stream"""
    name = "random"

    def __init__(self, seed: int = 0):
        self.rng = np.random.default_rng(seed)

    def score_candidates(self, candidates, true_index):
        return self.rng.random(len(candidates))

class OracleScorer(BaseScorer):
    name = "oracle"

    def score_candidates(self, candidates, true_index):
        scores = np.zeros(len(candidates))
        scores[true_index] = 1.0
        return scores

def make_scorer(kind: str, model: Optional[RankingModel] = None, spec: Optional[FeatureSpec] = None,
                seed: int = 0, n_jobs: int = 1) -> BaseScorer:
    if kind == "random":
        return RandomScorer(seed)
    elif kind == "oracle":
        return OracleScorer()
    elif kind == "trained":
        if model is None or spec is None:
            raise ConfigError("The trained scorer needs a model and its feature spec")
        return TrainedScorer(model, spec, n_jobs)
    raise ConfigError(f"Scorer must be one of {cfg.SCORERS}, got {kind!r}")

class CoherenceEvaluator:
    """
    Runs a scorer over frozen task instances and collects per-instance
    outcomes alongside the aggregate metrics.
    """
    def __init__(self, scorer: BaseScorer, verbose: bool = False):
        self.scorer = scorer
        self.verbose = verbose

    def evaluate_discrimination(self, corpus: Corpus, perms: Mapping[str, PermutationSet]) -> Dict:
        metric = DiscriminationMetric()
        for d in tqdm(eligible_dialogues(corpus), disable=not self.verbose, desc="discrimination"):
            if d.dialogue_id not in perms:
                raise TaskError(f"No permutation set for dialogue {d.dialogue_id}")
            candidates = [d.reorder(p) for p in perms[d.dialogue_id].permutations] + [d]
            scores = self.scorer.score_candidates(candidates, len(candidates) - 1)
            metric.update_state(d.dialogue_id, scores, len(candidates) - 1)
        outcomes = metric.outcomes()
        return {**metric.result(), "n_dialogues": len(outcomes["dialogue_ids"]),
                "n_pairs": len(outcomes["pair_wins"]), "outcomes": outcomes}

    def evaluate_insertion(self, corpus: Corpus, insertions: Mapping[str, Sequence[InsertionInstance]]) -> Dict:
        metric = InsertionMetric()
        for d in tqdm(eligible_dialogues(corpus), disable=not self.verbose, desc="insertion"):
            if d.dialogue_id not in insertions:
                raise TaskError(f"No insertion instances for dialogue {d.dialogue_id}")
            for instance in insertions[d.dialogue_id]:
                if instance.removed_turn_index not in instance.candidate_positions:
                    raise TaskError(f"{d.dialogue_id}: candidate slots of turn "
                                    f"{instance.removed_turn_index} omit its original slot")
                slots = [s for s in instance.candidate_positions if s != instance.removed_turn_index]
                slots.append(instance.removed_turn_index)
                candidates = [d.insert_turn(instance.removed_turn_index, s) for s in slots]
                scores = self.scorer.score_candidates(candidates, len(candidates) - 1)
                metric.update_state(d.dialogue_id, scores, len(candidates) - 1)
        outcomes = metric.outcomes()
        return {**metric.result(), "n_dialogues": len(outcomes["dialogue_ids"]),
                "n_instances": outcomes.pop("n_instances"), "outcomes": outcomes}

def evaluate_discrimination(scorer: BaseScorer, corpus: Corpus, perms: Mapping[str, PermutationSet]) -> Dict:
    return CoherenceEvaluator(scorer).evaluate_discrimination(corpus, perms)

def evaluate_insertion(scorer: BaseScorer, corpus: Corpus,
                       insertions: Mapping[str, Sequence[InsertionInstance]]) -> Dict:
    return CoherenceEvaluator(scorer).evaluate_insertion(corpus, insertions)

def compare_models(result_a: Dict, result_b: Dict, seed: int = 0) -> Dict[str, Dict[str, float]]:
    """
    Significance of the difference between two models evaluated on the same
    instances: McNemar for accuracy and P@1, Fisher randomization for MRR
    and insertion P@1
    """
    tests = {}
    da, db = result_a.get("discrimination"), result_b.get("discrimination")
    if da and db:
        if da["outcomes"]["dialogue_ids"] != db["outcomes"]["dialogue_ids"]:
            raise TaskError("Discrimination results cover different dialogues")
        tests["accuracy"] = mcnemar_test(da["outcomes"]["pair_wins"], db["outcomes"]["pair_wins"])._asdict()
        tests["p_at_1"] = mcnemar_test(da["outcomes"]["p_at_1"], db["outcomes"]["p_at_1"])._asdict()
        tests["mrr"] = fisher_randomization_test(da["outcomes"]["reciprocal_ranks"],
                                                 db["outcomes"]["reciprocal_ranks"], seed=seed)._asdict()
    ia, ib = result_a.get("insertion"), result_b.get("insertion")
    if ia and ib:
        if ia["outcomes"]["dialogue_ids"] != ib["outcomes"]["dialogue_ids"]:
            raise TaskError("Insertion results cover different dialogues")
        tests["avg_p_at_1"] = fisher_randomization_test(ia["outcomes"]["p_at_1"],
                                                        ib["outcomes"]["p_at_1"], seed=seed)._asdict()
    return tests

METRIC_COLUMNS = [
    ("discrimination", "accuracy", "Acc."),
    ("discrimination", "mrr", "MRR"),
    ("discrimination", "p_at_1", "P@1"),
    ("insertion", "avg_p_at_1", "Av. P@1"),
]

@dataclass
class EvaluationReport:
    dataset: str
    results: Dict[str, Dict] = field(default_factory=dict)
    tie_policy: str = TIE_POLICY
    config: Dict = field(default_factory=dict)
    significance: Dict[str, Dict] = field(default_factory=dict)

    def add(self, model_name: str, discrimination: Optional[Dict] = None,
            insertion: Optional[Dict] = None) -> None:
        self.results[model_name] = {k: v for k, v in (("discrimination", discrimination),
                                                       ("insertion", insertion)) if v is not None}

    def add_significance(self, seed: int = 0) -> None:
        for a, b in itertools.combinations(self.results, 2):
            self.significance[f"{a} vs {b}"] = compare_models(self.results[a], self.results[b], seed)

    def to_dict(self) -> Dict:
        return {"dataset": self.dataset, "tie_policy": self.tie_policy, "config": self.config,
                "results": self.results, "significance": self.significance}

    @classmethod
    def from_dict(cls, raw: Dict) -> "EvaluationReport":
        try:
            return cls(raw["dataset"], raw["results"], raw.get("tie_policy", TIE_POLICY),
                       raw.get("config", {}), raw.get("significance", {}))
        except (KeyError, TypeError) as e:
            raise TaskError(f"Malformed report ({e})") from e

    def to_frame(self) -> pd.DataFrame:
        """Models as rows, (dataset, metric) as columns"""
        columns = pd.MultiIndex.from_tuples([(self.dataset, label) for _, _, label in METRIC_COLUMNS],
                                            names=["dataset", "metric"])
        values = [[result.get(task, {}).get(key, np.nan) for task, key, _ in METRIC_COLUMNS]
                  for result in self.results.values()]
        return pd.DataFrame(values, index=list(self.results), columns=columns, dtype=float)

    def write(self, out_dir: Union[str, Path], name: str = "report") -> Path:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        path = Path.joinpath(out_dir, f"{name}.json")
        with open(path, 'w', encoding='utf-8') as stream:
            json.dump(self.to_dict(), stream, indent=1)
        with open(Path.joinpath(out_dir, f"{name}.txt"), 'w', encoding='utf-8') as stream:
            stream.write(render_table([self]) + "\n")
        return path

def read_report(path: Union[str, Path]) -> EvaluationReport:
    try:
        with open(path, 'r', encoding='utf-8') as stream:
            return EvaluationReport.from_dict(json.load(stream))
    except (OSError, json.JSONDecodeError) as e:
        raise TaskError(f"{path}: unreadable report ({e})") from e

def render_table(reports: Sequence[EvaluationReport]) -> str:
    """Text table with models as rows and datasets side by side"""
    if not reports:
        raise TaskError("No reports to render")
    by_dataset: Dict[str, list] = {}
    for r in reports:
        by_dataset.setdefault(r.dataset, []).append(r.to_frame())
    # reports of one dataset stack as rows, datasets go side by side
    frame = pd.concat([pd.concat(frames, axis=0) for frames in by_dataset.values()], axis=1)
    lines = [frame.to_string(float_format="{:.2f}".format, na_rep="-")]
    for r in reports:
        counts = []
        for model_name, result in r.results.items():
            d, i = result.get("discrimination", {}), result.get("insertion", {})
            counts.append(f"{model_name}: {d.get('n_pairs', 0)} pairs over {d.get('n_dialogues', 0)} dialogues, "
                          f"{i.get('n_instances', 0)} insertion instances over {i.get('n_dialogues', 0)} dialogues")
        lines.append(f"[{r.dataset}] ties: {r.tie_policy}")
        lines.extend("  " + c for c in counts)
    return "\n".join(lines)
