"""
config.py
====================================
Utility config functions.
"""

from pathlib import Path
from typing import Dict, Optional, Union

import yaml

from utility.errors import ConfigError
import config as cfg
import paths as pt

class dotdict(dict):
    """dot.notation access to dictionary attributes"""
    __getattr__ = dict.get
    __setattr__ = dict.__setitem__
    __delattr__ = dict.__delitem__

def load_config(file_path: Path, file_name: str) -> dict:
    """
    Loads a YAML config file as a dict
    :param file_path: directory holding the file
    :param file_name: YAML file name
    :return: config file
    """
    try:
        with open(Path.joinpath(Path(file_path), file_name), 'r') as stream:
            settings = yaml.safe_load(stream)
    except (OSError, yaml.YAMLError) as e:
        raise ConfigError(f"Cannot read config {file_name} ({e})") from e
    if settings is None:
        return {}
    if not isinstance(settings, dict):
        raise ConfigError(f"Config {file_name} must hold a mapping")
    return settings

def load_ranker_config(dataset_name: str) -> dotdict:
    """Ranker hyperparameters for a dataset, falling back to the defaults"""
    config = dict(cfg.RANKER_DEFAULT_PARAMS)
    path = Path.joinpath(pt.RANKER_CONFIGS_DIR, f"{dataset_name.lower()}.yaml")
    if path.exists():
        settings = load_config(pt.RANKER_CONFIGS_DIR, path.name)
        unknown = set(settings) - set(config)
        if unknown:
            raise ConfigError(f"Unknown ranker keys in {path.name}: {sorted(unknown)}")
        config.update(settings)
    if config['c'] <= 0 or config['epochs'] < 1 or config['learning_rate'] <= 0:
        raise ConfigError(f"Invalid ranker hyperparameters {config}")
    return dotdict(config)

def check_run_config(config: dict) -> None:
    from utility.model import map_model_name
    from utility.training import check_ratios
    if not 2 <= config['n'] <= 4:
        raise ConfigError(f"Transition length n must be in [2, 4], got {config['n']}")
    if config['saliency'] < 1:
        raise ConfigError(f"Saliency must be at least 1, got {config['saliency']}")
    for key in ('k_permutations', 'insertion_turns', 'insertion_positions'):
        if config[key] < 1:
            raise ConfigError(f"{key} must be positive, got {config[key]}")
    if config['n_jobs'] == 0:
        raise ConfigError("n_jobs must be non-zero (-1 uses all cores)")
    if config['scorer'] not in cfg.SCORERS:
        raise ConfigError(f"Scorer must be one of {cfg.SCORERS}, got {config['scorer']!r}")
    if not config['model_names']:
        raise ConfigError("No models requested")
    for model_name in config['model_names']:
        map_model_name(model_name)
    check_ratios(config['split_ratios'])

def load_run_config(config_path: Optional[Union[str, Path]] = None,
                    overrides: Optional[Dict] = None) -> dotdict:
    """
    Effective run configuration: defaults, then the config file, then
    command-line overrides (None values are ignored)
    """
    config = dict(cfg.RUN_DEFAULT_PARAMS)
    if config_path is not None:
        config_path = Path(config_path)
        settings = load_config(config_path.parent, config_path.name)
        unknown = set(settings) - set(config)
        if unknown:
            raise ConfigError(f"Unknown config keys in {config_path.name}: {sorted(unknown)}")
        config.update(settings)
    config.update({k: v for k, v in (overrides or {}).items() if v is not None})
    check_run_config(config)
    return dotdict(config)
