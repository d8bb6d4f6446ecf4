"""Shared planted-signal experiment harness for the statistical tests.

Runs are cached per (variant, seeds, config overrides), so the example
tests and the acceptance suite reuse each other's trainings within one
pytest session.
"""

from functools import lru_cache

import numpy as np

from fusenet.graphdata import split_nodes
from fusenet.seeding import subseed
from fusenet.synthgen import SynthConfig, generate
from fusenet.textembed import ProviderConfig, embed_corpus
from fusenet.train import TrainConfig, train

SEEDS = (1, 2, 3, 4, 5)

# Ordering experiments: both signals planted, N = 300.
PLANTED = {
    "num_nodes": 300,
    "num_communities": 3,
    "intra_p": (0.30, 0.15, 0.06),
    "inter_p": 0.01,
    "prevalence": 0.3,
    "alpha": 1.0,
    "beta": 1.0,
    "noise_scale": 0.15,
    "lexicon_size": 16,
    "emission_boost": 6.0,
    "vocab_size": 200,
    "tokens_per_doc": 60,
}

# Equality/null experiments: larger test split for tighter estimates.
EQUALITY = {
    **PLANTED,
    "num_nodes": 600,
    "intra_p": (0.15, 0.075, 0.03),
    "inter_p": 0.005,
    "noise_scale": 0.1,
}

EMBED_DIM = 64


def _dataset(config_items: tuple, seed: int):
    cfg = SynthConfig(seed=seed, **dict(config_items))
    ds = generate(cfg)
    h = embed_corpus(ds.corpus, ProviderConfig(kind="hashing", dim=EMBED_DIM), ds.graph).rows
    split = split_nodes(ds.labels, seed=subseed(seed, "split"))
    return ds, h, split


@lru_cache(maxsize=None)
def test_f1s(variant: str, config_items: tuple, seeds: tuple = SEEDS) -> tuple:
    """Test-split F1 of one variant trained on each seed's dataset."""
    out = []
    for seed in seeds:
        ds, h, split = _dataset(config_items, seed)
        config = TrainConfig(seed=seed, max_epochs=300, patience=60)
        _, report = train(variant, ds.graph, h, ds.labels, split, config)
        out.append(report.test.f1)
    return tuple(out)


def median_f1(variant: str, base: dict, seeds: tuple = SEEDS, **overrides) -> float:
    return float(np.median(test_f1s(variant, freeze(base, **overrides), seeds)))


def per_seed(variant: str, base: dict, seeds: tuple = SEEDS, **overrides) -> tuple:
    return test_f1s(variant, freeze(base, **overrides), seeds)


def freeze(base: dict, **overrides) -> tuple:
    merged = {**base, **overrides}
    return tuple(sorted(merged.items()))
