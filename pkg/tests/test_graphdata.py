"""Loader, validation, and split tests."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fusenet.errors import DataError
from fusenet.graphdata import (
    UNKNOWN,
    LabelSet,
    load_graph,
    load_labels,
    load_texts,
    split_nodes,
)


def write(tmp_path, name, body):
    path = tmp_path / name
    path.write_text(body, encoding="utf-8")
    return path


# -- load_graph ----------------------------------------------------------------

def test_two_edge_path(tmp_path):
    g = load_graph(write(tmp_path, "e.tsv", "a\tb\nb\tc\n"))
    assert g.num_nodes == 3
    assert g.node_ids == ["a", "b", "c"]
    assert g.adjacency[1] == [0, 1, 2]


def test_duplicate_edges_collapse(tmp_path):
    g1 = load_graph(write(tmp_path, "e1.tsv", "a\tb\n"))
    g2 = load_graph(write(tmp_path, "e2.tsv", "a\tb\na\tb\n"))
    assert g1.edges == g2.edges
    assert g1.adjacency == g2.adjacency


def test_orientation_flip_collapses(tmp_path):
    g1 = load_graph(write(tmp_path, "e1.tsv", "a\tb\n"))
    g2 = load_graph(write(tmp_path, "e2.tsv", "a\tb\nb\ta\n"))
    assert g1.adjacency == g2.adjacency


def test_comments_and_blank_lines_skipped(tmp_path):
    g = load_graph(write(tmp_path, "e.tsv", "# header\na\tb\n\nb\tc\n"))
    assert g.num_nodes == 3


def test_malformed_line_reports_line_number(tmp_path):
    with pytest.raises(DataError, match=r":2:"):
        load_graph(write(tmp_path, "e.tsv", "a\tb\nbroken line\n"))


def test_empty_file_rejected(tmp_path):
    with pytest.raises(DataError, match="no edges"):
        load_graph(write(tmp_path, "e.tsv", "# nothing here\n"))


def test_missing_file_rejected(tmp_path):
    with pytest.raises(DataError, match="not found"):
        load_graph(tmp_path / "absent.tsv")


def test_random_file_adjacency_symmetric_and_self_looped(tmp_path, rng):
    n = 20
    lines = []
    edges = set()
    while len(edges) < 50:
        u, v = rng.integers(0, n, size=2)
        if u != v:
            edges.add((int(u), int(v)))
    for u, v in edges:
        lines.append(f"v{u}\tv{v}")
    g = load_graph(write(tmp_path, "e.tsv", "\n".join(lines) + "\n"))
    # brute-force membership scan
    for i in range(g.num_nodes):
        assert i in g.adjacency[i]
        for j in g.adjacency[i]:
            assert i in g.adjacency[j]
    for u, v in edges:
        ui, vi = g.index_of(f"v{u}"), g.index_of(f"v{v}")
        assert vi in g.adjacency[ui] and ui in g.adjacency[vi]


def test_node_index_round_trips_to_id(tmp_path):
    g = load_graph(write(tmp_path, "e.tsv", "x\ty\ny\tz\n"))
    for i, node_id in enumerate(g.node_ids):
        assert g.index_of(node_id) == i


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 8), st.integers(0, 8)), min_size=1, max_size=30))
def test_load_graph_idempotent_under_duplication(tmp_path_factory, pairs):
    tmp = tmp_path_factory.mktemp("graphs")
    body = "\n".join(f"n{u}\tn{v}" for u, v in pairs) + "\n"
    doubled = body + "\n".join(f"n{v}\tn{u}" for u, v in pairs) + "\n"
    g1 = load_graph(write(tmp, "a.tsv", body))
    g2 = load_graph(write(tmp, "b.tsv", doubled))
    assert g1.node_ids == g2.node_ids
    assert g1.adjacency == g2.adjacency


# -- load_labels ----------------------------------------------------------------

@pytest.fixture
def abc_graph(tmp_path):
    return load_graph(write(tmp_path, "g.tsv", "a\tb\nb\tc\n"))


def test_labels_partial(tmp_path, abc_graph):
    labels = load_labels(write(tmp_path, "l.tsv", "a\t1\n"), abc_graph)
    assert labels.values.tolist() == [1, UNKNOWN, UNKNOWN]


def test_labels_unknown_node_named(tmp_path, abc_graph):
    with pytest.raises(DataError, match="'zz'"):
        load_labels(write(tmp_path, "l.tsv", "zz\t1\n"), abc_graph)


def test_labels_bad_value_rejected(tmp_path, abc_graph):
    with pytest.raises(DataError, match="label"):
        load_labels(write(tmp_path, "l.tsv", "a\t2\n"), abc_graph)


def test_labels_positive_count_matches_line_scan(tmp_path, rng):
    n = 100
    body = "\n".join(f"m{i}\tm{(i + 1) % n}" for i in range(n)) + "\n"
    g = load_graph(write(tmp_path, "g.tsv", body))
    assigned = rng.integers(0, 2, size=n)
    label_body = "\n".join(f"m{i}\t{assigned[i]}" for i in range(n)) + "\n"
    labels = load_labels(write(tmp_path, "l.tsv", label_body), g)
    assert labels.positives() == int(assigned.sum())


# -- load_texts -------------------------------------------------------------------

def test_texts_loaded_and_missing_empty(tmp_path, abc_graph):
    corpus = load_texts(
        write(tmp_path, "t.jsonl", '{"id": "b", "text": "hello world"}\n'), abc_graph
    )
    assert corpus.docs == ["", "hello world", ""]


def test_texts_duplicate_id_concatenates(tmp_path, abc_graph):
    body = '{"id": "a", "text": "one"}\n{"id": "a", "text": "two"}\n'
    corpus = load_texts(write(tmp_path, "t.jsonl", body), abc_graph)
    assert corpus.docs[0] == "one\ntwo"


def test_texts_unknown_id_rejected(tmp_path, abc_graph):
    with pytest.raises(DataError, match="'qq'"):
        load_texts(write(tmp_path, "t.jsonl", '{"id": "qq", "text": "x"}\n'), abc_graph)


# -- split_nodes --------------------------------------------------------------------

def make_labels(n, positives=None):
    values = np.zeros(n, dtype=np.int64)
    if positives is not None:
        values[positives] = 1
    return LabelSet(values)


def test_split_100_gives_80_10_10():
    split = split_nodes(make_labels(100), seed=7)
    assert (split.train.size, split.val.size, split.test.size) == (80, 10, 10)


def test_split_10_exact_floors():
    split = split_nodes(make_labels(10), seed=7)
    assert (split.train.size, split.val.size, split.test.size) == (8, 1, 1)


def test_split_25_remainder_to_train():
    split = split_nodes(make_labels(25), seed=7)
    assert (split.train.size, split.val.size, split.test.size) == (21, 2, 2)
    union = set(split.train) | set(split.val) | set(split.test)
    assert union == set(range(25))
    assert not set(split.train) & set(split.val)
    assert not set(split.train) & set(split.test)
    assert not set(split.val) & set(split.test)


def test_split_only_labeled_nodes():
    labels = LabelSet(np.array([0, UNKNOWN, 1, UNKNOWN, 0, 1, 0, 1, 0, 1, 0, 1]))
    split = split_nodes(labels, seed=3)
    union = set(split.train) | set(split.val) | set(split.test)
    assert union == set(labels.labeled_nodes().tolist())


def test_split_deterministic_per_seed():
    a = split_nodes(make_labels(40), seed=11)
    b = split_nodes(make_labels(40), seed=11)
    assert a.train.tolist() == b.train.tolist()
    assert a.val.tolist() == b.val.tolist()
    assert a.test.tolist() == b.test.tolist()


def test_split_differs_across_seeds():
    a = split_nodes(make_labels(40), seed=11)
    b = split_nodes(make_labels(40), seed=12)
    assert a.train.tolist() != b.train.tolist()


def test_split_too_few_labeled_rejected():
    with pytest.raises(DataError, match="3 labeled"):
        split_nodes(LabelSet(np.array([1, 0, UNKNOWN])), seed=0)


def test_split_bad_ratios_rejected():
    with pytest.raises(ValueError):
        split_nodes(make_labels(10), ratios=(0.5, 0.2, 0.2), seed=0)


@settings(max_examples=30, deadline=None)
@given(st.integers(10, 200), st.integers(0, 2 ** 32 - 1))
def test_split_partition_properties(n, seed):
    split = split_nodes(make_labels(n), seed=seed)
    parts = [split.train, split.val, split.test]
    union = np.concatenate(parts)
    assert union.size == n
    assert set(union.tolist()) == set(range(n))
    assert split.val.size == n // 10
    assert split.test.size == n // 10
