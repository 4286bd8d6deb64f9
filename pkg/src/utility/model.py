import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, NamedTuple, Optional, Sequence, Union

import numpy as np

from tools.feature_extractor import FeatureVector
from utility.errors import ConfigError, ModelError
import config as cfg

logger = logging.getLogger(__name__)

@dataclass(frozen=True, eq=False)
class RankingModel:
    weights: np.ndarray
    vocab_fingerprint: str
    model_name: str
    hyperparams: Dict = field(default_factory=dict)
    training_stats: Dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.weights)

class RankEntry(NamedTuple):
    index: int
    score: float
    tied: bool

def map_model_name(model_name: str) -> str:
    """Display name of a model alias; display names pass through"""
    if model_name in cfg.MODEL_NAMES:
        return cfg.MODEL_NAMES[model_name]
    elif model_name in cfg.MODEL_NAMES.values():
        return model_name
    raise ConfigError(f"Unknown model {model_name!r}; choose from {sorted(cfg.MODEL_NAMES)}")

def model_alias(model_name: str) -> str:
    display = map_model_name(model_name)
    return next(alias for alias, name in cfg.MODEL_NAMES.items() if name == display)

def _check_fingerprint(m: RankingModel, v: FeatureVector) -> None:
    if v.vocab_fingerprint != m.vocab_fingerprint:
        raise ModelError(f"Feature fingerprint {v.vocab_fingerprint} does not match "
                         f"model {m.model_name} ({m.vocab_fingerprint})")
    if len(v.values) != len(m.weights):
        raise ModelError(f"Feature vector has {len(v.values)} entries, model {m.model_name} "
                         f"has {len(m.weights)} weights")

def score(m: RankingModel, v: FeatureVector) -> float:
    """Linear coherence score; higher is more coherent"""
    _check_fingerprint(m, v)
    return float(m.weights @ v.values)

def rank_scores(scores: Sequence[float]) -> List[RankEntry]:
    """Stable descending order; equal scores keep input order and are flagged"""
    scores = [float(s) for s in scores]
    counts = {}
    for s in scores:
        counts[s] = counts.get(s, 0) + 1
    order = sorted(range(len(scores)), key=lambda i: -scores[i])
    return [RankEntry(i, scores[i], counts[scores[i]] > 1) for i in order]

def rank(m: RankingModel, candidates: Sequence[FeatureVector]) -> List[RankEntry]:
    if len(candidates) == 0:
        raise ModelError("Nothing to rank")
    return rank_scores([score(m, v) for v in candidates])

def save_model(m: RankingModel, path: Union[str, Path], config: Optional[Dict] = None) -> None:
    """
    Writes a model file: a commented header with model name, fingerprint,
    hyperparameters, seed and training statistics, then one weight per line
    """
    header = {
        "model_name": m.model_name,
        "fingerprint": m.vocab_fingerprint,
        "hyperparams": m.hyperparams,
        "seed": m.hyperparams.get("seed"),
        "training_stats": m.training_stats,
    }
    if config is not None:
        header["config"] = config
    with open(path, 'w', encoding='utf-8', newline='\n') as stream:
        for key, value in header.items():
            stream.write(f"# {key}: {json.dumps(value, sort_keys=True)}\n")
        for w in m.weights:
            stream.write(f"{w:.17g}\n")

def load_model(path: Union[str, Path], expected_fingerprint: Optional[str] = None) -> RankingModel:
    header, weights = {}, []
    try:
        with open(path, 'r', encoding='utf-8') as stream:
            for line in stream:
                if line.startswith("# "):
                    key, value = line[2:].split(": ", 1)
                    header[key] = json.loads(value)
                elif line.strip():
                    weights.append(float(line))
    except (OSError, ValueError) as e:
        raise ModelError(f"{path}: unreadable model file ({e})") from e
    for key in ("model_name", "fingerprint", "hyperparams"):
        if key not in header:
            raise ModelError(f"{path}: header lacks {key!r}")
    if expected_fingerprint is not None and header["fingerprint"] != expected_fingerprint:
        raise ModelError(f"{path}: fingerprint {header['fingerprint']} does not match "
                         f"the features ({expected_fingerprint})")
    return RankingModel(np.array(weights), header["fingerprint"], header["model_name"],
                        header["hyperparams"], header.get("training_stats", {}))
