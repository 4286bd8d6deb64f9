MODEL_NAMES = {
    't_role': "T-Grid:role",
    't_presence': "T-Grid:presence",
    'd_role': "D-Grid:role",
    'd_da': "D-Grid:DA",
    'only_das': "Only-DAs",
    't_presence_das': "T-Grid:presence + Only DAs",
    't_role_das': "T-Grid:role + Only DAs",
}

COMBINATION_MODELS = {
    "T-Grid:presence + Only DAs": ("T-Grid:presence", "Only-DAs"),
    "T-Grid:role + Only DAs": ("T-Grid:role", "Only-DAs"),
}

SCORERS = ["trained", "random", "oracle"]

RUN_DEFAULT_PARAMS = {
    'corpus_path': None,
    'tagset_path': None,
    'split_path': None,
    'dataset': "synthetic",
    'model_names': list(MODEL_NAMES),
    'n': 2,
    'saliency': 1,
    'seed': 0,
    'k_permutations': 20,
    'insertion_turns': 10,
    'insertion_positions': 10,
    'split_ratios': [0.64, 0.20, 0.16],
    'train_split': "train",
    'eval_split': "test",
    'scorer': "trained",
    'output_dir': "results",
    'n_jobs': 1,
    'verbose': False,
    }

RANKER_DEFAULT_PARAMS = {
    'c': 1.0,
    'epochs': 300,
    'learning_rate': 1.0,
    'batch_size': None,
    'seed': 0,
    }

# Sanity ranges around the published dataset shapes (42/16/41 tags,
# 13.1/15.1/10.6 tokens per turn, 109/86.4/10.6 turns per dialogue)
DATASET_PROFILES = {
    'swbd': {
        'n_da_tags': (42, 43),
        'avg_tokens_per_turn': (6.5, 26.2),
        'avg_turns_per_dialogue': (54.5, 218.0),
    },
    'ami': {
        'n_da_tags': (15, 16),
        'avg_tokens_per_turn': (7.5, 30.2),
        'avg_turns_per_dialogue': (43.2, 172.8),
    },
    'oasis': {
        'n_da_tags': (41, 42),
        'avg_tokens_per_turn': (5.3, 21.2),
        'avg_turns_per_dialogue': (5.3, 21.2),
    },
}

SYNTHETIC_TAGSET_ID = "synthetic-damsl"

# Preferred successors of each DA tag in synthetic dialogues
SYNTHETIC_SUCCESSORS = {
    'qy': ("ny", "nn"),
    'qw': ("sd",),
    'ny': ("sd",),
    'nn': ("sd",),
    'sd': ("b", "qy", "qw"),
    'b': ("sv",),
    'sv': ("qy", "qw"),
    '%': ("sd",),
}
