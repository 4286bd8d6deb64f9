import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

import numpy as np
from tqdm import trange

from tools.feature_extractor import FeatureVector
from utility.config import dotdict
from utility.errors import ModelError
from utility.loss import RankingHingeLoss
from utility.model import RankingModel
import config as cfg

logger = logging.getLogger(__name__)

@dataclass(frozen=True)
class PreferencePair:
    preferred: FeatureVector
    other: FeatureVector
    group_id: str

    @property
    def difference(self) -> np.ndarray:
        return self.preferred.values - self.other.values

    @property
    def degenerate(self) -> bool:
        """Both documents map to the same feature vector"""
        return bool(np.array_equal(self.preferred.values, self.other.values))

def check_pairs(pairs: Sequence[PreferencePair]) -> None:
    if len(pairs) == 0:
        raise ModelError("Cannot train on an empty pair list")
    fingerprint, model_name = pairs[0].preferred.vocab_fingerprint, pairs[0].preferred.model_name
    for pair in pairs:
        for v in (pair.preferred, pair.other):
            if v.vocab_fingerprint != fingerprint or v.model_name != model_name:
                raise ModelError(f"Pair {pair.group_id} mixes feature spaces "
                                 f"({v.model_name}/{v.vocab_fingerprint} vs {model_name}/{fingerprint})")
            if not np.all(np.isfinite(v.values)):
                raise ModelError(f"Pair {pair.group_id} has non-finite feature values")

class Trainer:
    """
    Deterministic subgradient descent on the ranking-SVM objective with step
    learning_rate / t. The best iterate seen so far is kept: train_loss holds
    the best objective after each epoch, raw_loss the objective of the
    epoch's own iterate.
    """
    def __init__(self, pairs: Sequence[PreferencePair], c: float, epochs: int,
                 learning_rate: float, batch_size: Optional[int] = None, seed: int = 0,
                 verbose: bool = False):
        check_pairs(pairs)
        self.pairs = pairs
        self.diffs = np.stack([pair.difference for pair in pairs])
        self.degenerate = np.array([pair.degenerate for pair in pairs])
        self.loss_fn = RankingHingeLoss(c)
        self.epochs = epochs
        self.learning_rate = learning_rate
        self.batch_size = batch_size
        self.rng = np.random.default_rng(seed)
        self.verbose = verbose

        self.weights = np.zeros(self.diffs.shape[1])
        self.best_weights = self.weights.copy()
        self.initial_objective = self.loss_fn(self.weights, self.diffs)
        self.best_objective = self.initial_objective
        self.best_ep = 0
        self.step = 0
        self.train_loss: List[float] = []
        self.raw_loss: List[float] = []

    def _batches(self) -> List[np.ndarray]:
        n_pairs = len(self.diffs)
        if self.batch_size is None or self.batch_size >= n_pairs:
            return [np.arange(n_pairs)]
        order = self.rng.permutation(n_pairs)
        return [order[i:i + self.batch_size] for i in range(0, n_pairs, self.batch_size)]

    def train(self, epoch: int) -> float:
        n_pairs = len(self.diffs)
        for batch in self._batches():
            self.step += 1
            eta = self.learning_rate / self.step
            grad = self.loss_fn.subgradient(self.weights, self.diffs[batch], scale=n_pairs / len(batch))
            self.weights = self.weights - eta * grad
        objective = self.loss_fn(self.weights, self.diffs)
        if objective < self.best_objective:
            self.best_objective = objective
            self.best_weights = self.weights.copy()
            self.best_ep = epoch
        self.train_loss.append(self.best_objective)
        self.raw_loss.append(objective)
        return objective

    def train_and_evaluate(self) -> np.ndarray:
        pbar = trange(1, self.epochs + 1, disable=not self.verbose)
        for epoch in pbar:
            objective = self.train(epoch)
            pbar.set_postfix(objective=objective, best=self.best_objective)
        logger.debug("Best objective %.6f at epoch %d of %d", self.best_objective, self.best_ep, self.epochs)
        return self.best_weights

    def training_stats(self) -> Dict:
        margins = self.loss_fn.margins(self.best_weights, self.diffs)
        informative = ~self.degenerate
        violations = int(np.sum(margins[informative] <= 0))
        n_informative = int(informative.sum())
        return {
            "final_objective": float(self.best_objective),
            "pair_violations": violations,
            "pairwise_accuracy": 100.0 * (n_informative - violations) / n_informative if n_informative else 0.0,
            "n_pairs": len(self.diffs),
            "degenerate_pairs": int(self.degenerate.sum()),
            "best_epoch": self.best_ep,
        }

def train_ranker(pairs: Sequence[PreferencePair], hyperparams: Optional[Dict] = None,
                 verbose: bool = False) -> RankingModel:
    """
    Trains a linear pairwise-preference ranker
    :param pairs: preference pairs over one feature space
    :param hyperparams: c, epochs, learning_rate, batch_size and seed
    :return: the trained model; its stats hold the objective trace
    """
    params = dotdict({**cfg.RANKER_DEFAULT_PARAMS, **(hyperparams or {})})
    trainer = Trainer(pairs, params.c, params.epochs, params.learning_rate,
                      params.batch_size, params.seed, verbose)
    weights = trainer.train_and_evaluate()
    stats = trainer.training_stats()
    if stats["degenerate_pairs"]:
        logger.warning("%d of %d pairs have identical feature vectors",
                       stats["degenerate_pairs"], stats["n_pairs"])
    logger.info("Trained %s on %d pairs: objective %.4f, %d violations",
                pairs[0].preferred.model_name, stats["n_pairs"],
                stats["final_objective"], stats["pair_violations"])
    model = RankingModel(weights, pairs[0].preferred.vocab_fingerprint,
                         pairs[0].preferred.model_name, dict(params), stats)
    model.training_stats["objective_trace"] = list(trainer.train_loss)
    model.training_stats["raw_objective_trace"] = list(trainer.raw_loss)
    return model

def pairwise_accuracy(m: RankingModel, pairs: Sequence[PreferencePair]) -> float:
    """Percentage of pairs whose preferred side scores strictly higher"""
    if len(pairs) == 0:
        return 0.0
    diffs = np.stack([pair.difference for pair in pairs])
    return 100.0 * float(np.mean(diffs @ m.weights > 0))
