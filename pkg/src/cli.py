"""
cli.py
====================================
Command-line entry point: validate, split, permute, featurize, train,
evaluate and report.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from tools.data_loader import (check_corpus_profile, corpus_statistics, infer_tagset,
                               iter_dialogues, load_tagset, write_corpus, write_tagset)
from tools.evaluator import (CoherenceEvaluator, EvaluationReport, TrainedScorer, make_scorer,
                             read_report, render_table)
from tools.feature_extractor import FeatureExtractor, FeatureSpec, write_feature_dump
from tools.ranker_trainer import train_ranker
from tools.task_generator import (build_training_pairs, generate_task_sets, read_bundle_config,
                                  read_insertion_bundle, read_permutation_bundle, write_insertion_bundle,
                                  write_permutation_bundle)
from utility.config import dotdict, load_ranker_config, load_run_config
from utility.dialogue import Corpus, validate_dialogue
from utility.errors import ConfigError, DataError
from utility.model import load_model, map_model_name, model_alias, save_model
from utility.training import get_data_loader, read_split, split_corpus, with_split, write_split

logger = logging.getLogger(__name__)

PERMUTATIONS_FILE = "permutations.jsonl"
INSERTIONS_FILE = "insertions.jsonl"
SPLIT_FILE = "split.json"
CORPUS_FILE = "corpus.jsonl"
TAGSET_FILE = "tagset.json"

# Run config keys that determine the task instances in a bundle
TASK_KEYS = ("seed", "k_permutations", "insertion_turns", "insertion_positions")

# Flag name -> run config key
OVERRIDES = {
    'corpus': 'corpus_path',
    'tagset': 'tagset_path',
    'split_file': 'split_path',
    'dataset': 'dataset',
    'models': 'model_names',
    'n': 'n',
    'saliency': 'saliency',
    'seed': 'seed',
    'k': 'k_permutations',
    'insertion_turns': 'insertion_turns',
    'insertion_positions': 'insertion_positions',
    'out': 'output_dir',
    'scorer': 'scorer',
    'n_jobs': 'n_jobs',
    'verbose': 'verbose',
}

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', type=str, default=None, help="YAML run config")
    common.add_argument('--corpus', type=str, default=None, help="JSONL corpus file")
    common.add_argument('--tagset', type=str, default=None, help="tagset sidecar file")
    common.add_argument('--split-file', type=str, default=None)
    common.add_argument('--dataset', type=str, default=None,
                        help="dataset profile: swbd, ami, oasis or synthetic")
    common.add_argument('--models', type=str, nargs='+', default=None)
    common.add_argument('--n', type=int, default=None, help="transition length")
    common.add_argument('--saliency', type=int, default=None)
    common.add_argument('--seed', type=int, default=None)
    common.add_argument('--k', type=int, default=None, help="permutations per dialogue")
    common.add_argument('--insertion-turns', type=int, default=None)
    common.add_argument('--insertion-positions', type=int, default=None)
    common.add_argument('--out', type=str, default=None, help="output directory")
    common.add_argument('--scorer', type=str, default=None, choices=["trained", "random", "oracle"])
    common.add_argument('--n-jobs', type=int, default=None)
    common.add_argument('--verbose', action='store_true', default=None)

    parser = argparse.ArgumentParser(prog="dialogue-coherence",
                                     description="Entity and dialogue-act grid coherence models")
    subparsers = parser.add_subparsers(dest='command', required=True)
    for name, help_text in (("validate", "check a corpus against its tagset"),
                            ("split", "write a seeded train/test/dev split"),
                            ("permute", "write permutation and insertion task bundles"),
                            ("featurize", "write one feature dump per model"),
                            ("train", "train one ranker per model"),
                            ("evaluate", "score the task bundles and write a report")):
        subparsers.add_parser(name, parents=[common], help=help_text)
    report = subparsers.add_parser("report", parents=[common], help="render saved reports as a table")
    report.add_argument('reports', type=str, nargs='+')
    return parser

def make_config(args: argparse.Namespace) -> dotdict:
    overrides = {key: getattr(args, flag) for flag, key in OVERRIDES.items()}
    return load_run_config(args.config, overrides)

def setup_logging(verbose: bool) -> None:
    logging.basicConfig(level=logging.DEBUG if verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)

def load_corpus(config: dotdict) -> Corpus:
    loader = get_data_loader(config.dataset, config.corpus_path, config.tagset_path, config.seed)
    corpus = loader.load_data().get_data()
    if config.split_path is not None:
        corpus = with_split(corpus, read_split(config.split_path))
    return corpus

def output_dir(config: dotdict) -> Path:
    path = Path(config.output_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path

def feature_specs(config: dotdict, corpus: Corpus) -> List[FeatureSpec]:
    return [FeatureSpec(map_model_name(m), config.n, config.saliency, corpus.tagset)
            for m in config.model_names]

def load_tasks(config: dotdict, corpus: Corpus):
    """Task bundles from the output directory, generated and written if absent"""
    out = output_dir(config)
    perm_path, ins_path = Path.joinpath(out, PERMUTATIONS_FILE), Path.joinpath(out, INSERTIONS_FILE)
    if perm_path.exists() and ins_path.exists():
        for path in (perm_path, ins_path):
            check_bundle_config(read_bundle_config(path), config, path)
        return read_permutation_bundle(perm_path), read_insertion_bundle(ins_path)
    logger.info("No task bundles in %s; generating them", out)
    return write_tasks(config, corpus)

def check_bundle_config(bundle_config: dict, config: dotdict, path: Path) -> None:
    stale = [f"{key}={bundle_config.get(key)!r} (run: {config[key]!r})"
             for key in TASK_KEYS if bundle_config.get(key) != config[key]]
    if stale:
        raise ConfigError(f"{path} was generated with " + ", ".join(stale)
                          + "; rerun permute or choose another --out")

def write_tasks(config: dotdict, corpus: Corpus):
    out = output_dir(config)
    perms, insertions = generate_task_sets(corpus, config.k_permutations, config.insertion_turns,
                                           config.insertion_positions, config.seed)
    write_permutation_bundle(perms, Path.joinpath(out, PERMUTATIONS_FILE), dict(config))
    write_insertion_bundle(insertions, Path.joinpath(out, INSERTIONS_FILE), dict(config))
    return perms, insertions

def cmd_validate(config: dotdict) -> int:
    if config.corpus_path is None:
        raise ConfigError("validate needs --corpus")
    tagset = load_tagset(config.tagset_path) if config.tagset_path is not None else None
    with open(config.corpus_path, 'rb') as stream:
        records = list(iter_dialogues(stream))
    if not records:
        print("warning: 0 dialogues")
        return 0
    if tagset is None:
        tagset = infer_tagset([d for _, d in records])
    n_violations, first_line = 0, {}
    for line_no, d in records:
        if d.dialogue_id in first_line:
            print(f"line {line_no}: DUPLICATE_ID {d.dialogue_id} (first on line {first_line[d.dialogue_id]})")
            n_violations += 1
        first_line.setdefault(d.dialogue_id, line_no)
        for violation in validate_dialogue(d, tagset):
            print(f"line {line_no}: {violation}")
            n_violations += 1
    print(f"{len(records)} dialogues, {n_violations} violations")
    return 0 if n_violations == 0 else 1

def cmd_split(config: dotdict) -> int:
    corpus = split_corpus(load_corpus(config), config.split_ratios, config.seed, override=True)
    out = output_dir(config)
    path = Path.joinpath(out, SPLIT_FILE)
    write_split(corpus, path, dict(config))
    # canonical copy of the corpus the split refers to
    write_corpus(corpus, Path.joinpath(out, CORPUS_FILE))
    write_tagset(corpus.tagset, Path.joinpath(out, TAGSET_FILE))
    stats = corpus_statistics(corpus)
    check_corpus_profile(stats, config.dataset)
    for key, value in stats.items():
        print(f"{key}: {value:.2f}" if isinstance(value, float) else f"{key}: {value}")
    print(f"Wrote {path}, {CORPUS_FILE} and {TAGSET_FILE} in {out}")
    return 0

def cmd_permute(config: dotdict) -> int:
    perms, insertions = write_tasks(config, load_corpus(config))
    print(f"{len(perms)} permutation sets, {sum(len(v) for v in insertions.values())} "
          f"insertion instances in {config.output_dir}")
    return 0

def cmd_featurize(config: dotdict) -> int:
    corpus = load_corpus(config)
    out = output_dir(config)
    for model_name in config.model_names:
        extractor = FeatureExtractor(map_model_name(model_name), config.n, config.saliency,
                                     config.n_jobs).fit(corpus)
        spec, vectors = extractor.spec, extractor.vectors(corpus.dialogues)
        path = Path.joinpath(out, f"{model_alias(spec.model_name)}.features")
        with open(path, 'w', encoding='utf-8', newline='\n') as stream:
            write_feature_dump(zip(corpus.ids, vectors), stream)
        print(f"{spec.model_name}: {len(vectors)} vectors of size {spec.size} -> {path}")
    return 0

def cmd_train(config: dotdict) -> int:
    corpus = load_corpus(config)
    perms, _ = load_tasks(config, corpus)
    if corpus.split is None:
        logger.warning("Corpus has no split; training on all %d dialogues", len(corpus))
    train = corpus.subset(config.train_split)
    hyperparams = load_ranker_config(config.dataset)
    for spec in feature_specs(config, corpus):
        pairs = build_training_pairs(train, perms, spec, config.n_jobs, config.verbose)
        model = train_ranker(pairs, hyperparams, config.verbose)
        path = Path.joinpath(output_dir(config), f"{model_alias(spec.model_name)}.model")
        save_model(model, path, dict(config))
        stats = model.training_stats
        print(f"{spec.model_name}: {stats['n_pairs']} pairs, objective {stats['final_objective']:.4f}, "
              f"pairwise accuracy {stats['pairwise_accuracy']:.2f}")
    return 0

def cmd_evaluate(config: dotdict) -> int:
    corpus = load_corpus(config)
    perms, insertions = load_tasks(config, corpus)
    if corpus.split is None:
        logger.warning("Corpus has no split; evaluating on all %d dialogues", len(corpus))
    test = corpus.subset(config.eval_split)
    report = EvaluationReport(config.dataset, config=dict(config))
    if config.scorer == "trained":
        for spec in feature_specs(config, corpus):
            path = Path.joinpath(output_dir(config), f"{model_alias(spec.model_name)}.model")
            model = load_model(path, expected_fingerprint=spec.fingerprint)
            scorer = TrainedScorer(model, spec, config.n_jobs)
            evaluator = CoherenceEvaluator(scorer, config.verbose)
            report.add(spec.model_name, evaluator.evaluate_discrimination(test, perms),
                       evaluator.evaluate_insertion(test, insertions))
    else:
        name = config.scorer.capitalize()
        discrimination = CoherenceEvaluator(make_scorer(config.scorer, seed=config.seed),
                                            config.verbose).evaluate_discrimination(test, perms)
        insertion = CoherenceEvaluator(make_scorer(config.scorer, seed=config.seed),
                                       config.verbose).evaluate_insertion(test, insertions)
        report.add(name, discrimination, insertion)
    report.add_significance(config.seed)
    path = report.write(output_dir(config))
    print(render_table([report]))
    print(f"Wrote {path}")
    return 0

def cmd_report(config: dotdict, paths: List[str]) -> int:
    print(render_table([read_report(p) for p in paths]))
    return 0

COMMANDS = {
    "validate": cmd_validate,
    "split": cmd_split,
    "permute": cmd_permute,
    "featurize": cmd_featurize,
    "train": cmd_train,
    "evaluate": cmd_evaluate,
}

def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = make_config(args)
        setup_logging(config.verbose)
        if args.command == "report":
            return cmd_report(config, args.reports)
        return COMMANDS[args.command](config)
    except ConfigError as e:
        logger.error("Configuration error: %s", e)
        return 2
    except (DataError, OSError) as e:
        logger.error("Data error: %s", e)
        return 1

if __name__ == "__main__":
    sys.exit(main())
