"""Generator determinism, planted-signal statistics, and round-trips."""

import numpy as np
import pytest

from fusenet.errors import ConfigError
from fusenet.graphdata import load_dataset
from fusenet.synthgen import SynthConfig, describe, generate, write_dataset

import experiments


def test_same_seed_byte_identical():
    a = generate(SynthConfig(num_nodes=60, seed=42))
    b = generate(SynthConfig(num_nodes=60, seed=42))
    assert a.graph.edges == b.graph.edges
    assert a.corpus.docs == b.corpus.docs
    assert (a.labels.values == b.labels.values).all()


def test_different_seeds_differ():
    a = generate(SynthConfig(num_nodes=60, seed=1))
    b = generate(SynthConfig(num_nodes=60, seed=2))
    assert a.graph.edges != b.graph.edges or a.corpus.docs != b.corpus.docs


def test_write_then_generate_identical_files(tmp_path):
    config = SynthConfig(num_nodes=40, seed=9)
    first = write_dataset(generate(config), tmp_path / "a")
    second = write_dataset(generate(config), tmp_path / "b")
    for key in first:
        assert first[key].read_bytes() == second[key].read_bytes()


def test_label_count_exact_floor():
    ds = generate(SynthConfig(num_nodes=200, prevalence=0.3, seed=3))
    assert ds.labels.positives() == 60


def test_degenerate_prevalence_rejected():
    with pytest.raises(ConfigError, match="positive class"):
        generate(SynthConfig(num_nodes=3, prevalence=0.1, seed=0))


def test_mean_intra_degree_matches_expectation():
    # 2 communities of 100 at intra 0.2: expect (100-1) * 0.2 = 19.8
    values = []
    for seed in range(5):
        ds = generate(SynthConfig(
            num_nodes=200, num_communities=2, intra_p=0.2, inter_p=0.01, seed=seed,
        ))
        values.append(describe(ds).mean_intra_degree)
    assert abs(float(np.mean(values)) - 19.8) < 3.0


def test_lexicon_rate_higher_in_positive_class_with_text_signal():
    for seed in range(3):
        ds = generate(SynthConfig(seed=seed, **experiments.PLANTED))
        stats = describe(ds)
        assert stats.lexicon_rate_positive > stats.lexicon_rate_negative


def test_lexicon_rate_flat_without_text_signal():
    ds = generate(SynthConfig(seed=0, beta=0.0, **{
        k: v for k, v in experiments.PLANTED.items() if k != "beta"
    }))
    stats = describe(ds)
    assert abs(stats.lexicon_rate_positive - stats.lexicon_rate_negative) < 0.03


def test_round_trip_through_file_formats(tmp_path):
    ds = generate(SynthConfig(num_nodes=50, seed=13))
    paths = write_dataset(ds, tmp_path)
    loaded = load_dataset(paths["edges"], paths["labels"], paths["texts"])
    assert loaded.graph.num_nodes == ds.graph.num_nodes
    assert loaded.graph.node_ids == ds.graph.node_ids
    assert loaded.graph.adjacency == ds.graph.adjacency
    assert (loaded.labels.values == ds.labels.values).all()
    assert loaded.corpus.docs == ds.corpus.docs


def test_intra_p_length_validated():
    with pytest.raises(ConfigError, match="communities"):
        SynthConfig(num_communities=2, intra_p=(0.1, 0.2, 0.3))


def test_probability_bounds_validated():
    with pytest.raises(ConfigError):
        SynthConfig(intra_p=1.5)


# -- planted-signal statistics (5-seed medians, shared cached runs) ------------

def test_null_signal_all_variants_near_random_baseline():
    # labels independent of both modalities; random baseline F1 = prevalence
    for variant in ("full", "gcn_only", "text_only"):
        med = experiments.median_f1(
            variant, experiments.EQUALITY, alpha=0.0, beta=0.0, noise_scale=1.0,
        )
        assert abs(med - 0.3) <= 0.12, (variant, med)


def test_structure_only_signal_separates_modalities():
    # beta = 0: text cannot help, structure can
    text_med = experiments.median_f1("text_only", experiments.PLANTED, beta=0.0)
    gat_med = experiments.median_f1("gat_only", experiments.PLANTED, beta=0.0)
    assert abs(text_med - 0.3) <= 0.1
    assert gat_med - 0.3 >= 0.1
