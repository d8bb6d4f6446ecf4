"""Loading, validation, and splitting of the network, labels, and texts.

File formats:
  edges   -- UTF-8, one ``src<TAB>dst`` per line, ``#`` comments allowed
  labels  -- ``node_id<TAB>{0|1}`` per line
  texts   -- JSON lines, one ``{"id": ..., "text": ...}`` object per line

Edges are undirected; a self-loop is added for every node so each node
always attends to itself.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import DataError
from .seeding import rng_for

UNKNOWN = -1


@dataclass
class Graph:
    num_nodes: int
    edges: list[tuple[int, int]]
    node_ids: list[str]
    adjacency: list[list[int]]
    _att_edges: Optional[tuple[np.ndarray, np.ndarray]] = field(
        default=None, repr=False, compare=False
    )
    _gcn_norm: Optional[np.ndarray] = field(default=None, repr=False, compare=False)

    @classmethod
    def from_edges(
        cls,
        num_nodes: int,
        edges: Sequence[tuple[int, int]],
        node_ids: Optional[Sequence[str]] = None,
    ) -> "Graph":
        if node_ids is None:
            node_ids = [f"n{i:04d}" for i in range(num_nodes)]
        if len(node_ids) != num_nodes:
            raise DataError(f"{len(node_ids)} node ids for {num_nodes} nodes")
        neighbors = [{i} for i in range(num_nodes)]
        canonical: list[tuple[int, int]] = []
        seen: set[tuple[int, int]] = set()
        for u, v in edges:
            if not (0 <= u < num_nodes and 0 <= v < num_nodes):
                raise DataError(f"edge ({u},{v}) out of range for {num_nodes} nodes")
            key = (u, v) if u <= v else (v, u)
            if key not in seen:
                seen.add(key)
                canonical.append(key)
            neighbors[u].add(v)
            neighbors[v].add(u)
        adjacency = [sorted(s) for s in neighbors]
        return cls(num_nodes, canonical, list(node_ids), adjacency)

    def index_of(self, node_id: str) -> int:
        try:
            return self._id_index[node_id]
        except AttributeError:
            self._id_index = {nid: i for i, nid in enumerate(self.node_ids)}
            return self._id_index[node_id]

    def attention_edges(self) -> tuple[np.ndarray, np.ndarray]:
        """Flat (source, target) index arrays, one entry per j in adj(i).

        Targets are non-decreasing, so attention segments are contiguous.
        """
        if self._att_edges is None:
            src = []
            dst = []
            for i, neigh in enumerate(self.adjacency):
                src.extend(neigh)
                dst.extend([i] * len(neigh))
            self._att_edges = (
                np.asarray(src, dtype=np.int64),
                np.asarray(dst, dtype=np.int64),
            )
        return self._att_edges

    def gcn_norm_adjacency(self) -> np.ndarray:
        """Symmetrically degree-normalized adjacency (self-loops included)."""
        if self._gcn_norm is None:
            a = np.zeros((self.num_nodes, self.num_nodes))
            for i, neigh in enumerate(self.adjacency):
                a[i, neigh] = 1.0
            d = a.sum(axis=1)
            inv_sqrt = 1.0 / np.sqrt(d)
            self._gcn_norm = a * inv_sqrt[:, None] * inv_sqrt[None, :]
        return self._gcn_norm


@dataclass
class LabelSet:
    """Per-node label in {0, 1, UNKNOWN}."""

    values: np.ndarray

    def labeled_nodes(self) -> np.ndarray:
        return np.flatnonzero(self.values != UNKNOWN)

    def positives(self) -> int:
        return int((self.values == 1).sum())


@dataclass
class TextCorpus:
    """One document per node, aligned to graph node index; missing = ''."""

    docs: list[str]


@dataclass
class Split:
    train: np.ndarray
    val: np.ndarray
    test: np.ndarray
    seed: int

    def as_dict(self) -> dict:
        return {
            "train": self.train.tolist(),
            "val": self.val.tolist(),
            "test": self.test.tolist(),
            "seed": self.seed,
        }


def load_graph(edge_file: str | Path) -> Graph:
    """Parse an edge list; node indices follow first appearance of ids."""
    path = Path(edge_file)
    if not path.exists():
        raise DataError(f"edge file not found: {path}")
    node_ids: list[str] = []
    index: dict[str, int] = {}
    raw_edges: list[tuple[int, int]] = []

    def intern(name: str) -> int:
        if name not in index:
            index[name] = len(node_ids)
            node_ids.append(name)
        return index[name]

    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            parts = stripped.split("\t")
            if len(parts) != 2 or not parts[0] or not parts[1]:
                raise DataError(f"{path}:{lineno}: expected 'src<TAB>dst', got {stripped!r}")
            raw_edges.append((intern(parts[0]), intern(parts[1])))
    if not node_ids:
        raise DataError(f"{path}: no edges found")
    return Graph.from_edges(len(node_ids), raw_edges, node_ids)


def load_labels(label_file: str | Path, graph: Graph) -> LabelSet:
    path = Path(label_file)
    if not path.exists():
        raise DataError(f"label file not found: {path}")
    values = np.full(graph.num_nodes, UNKNOWN, dtype=np.int64)
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            parts = stripped.split("\t")
            if len(parts) != 2:
                raise DataError(f"{path}:{lineno}: expected 'node_id<TAB>label'")
            node, label = parts
            try:
                idx = graph.index_of(node)
            except KeyError:
                raise DataError(f"{path}:{lineno}: unknown node id {node!r}") from None
            if label not in ("0", "1"):
                raise DataError(f"{path}:{lineno}: label must be 0 or 1, got {label!r}")
            values[idx] = int(label)
    return LabelSet(values)


def load_texts(text_file: str | Path, graph: Graph) -> TextCorpus:
    """Read the JSONL corpus; repeated ids concatenate their documents."""
    path = Path(text_file)
    if not path.exists():
        raise DataError(f"text file not found: {path}")
    docs = [""] * graph.num_nodes
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped:
                continue
            try:
                obj = json.loads(stripped)
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}:{lineno}: bad JSON: {exc}") from None
            if not isinstance(obj, dict) or "id" not in obj or "text" not in obj:
                raise DataError(f"{path}:{lineno}: object needs 'id' and 'text' fields")
            try:
                idx = graph.index_of(str(obj["id"]))
            except KeyError:
                raise DataError(f"{path}:{lineno}: unknown node id {obj['id']!r}") from None
            text = str(obj["text"])
            docs[idx] = text if not docs[idx] else docs[idx] + "\n" + text
    return TextCorpus(docs)


def split_nodes(
    labels: LabelSet,
    ratios: tuple[float, float, float] = (0.8, 0.1, 0.1),
    seed: int = 0,
) -> Split:
    """Shuffle labeled nodes and partition train/val/test.

    Sizes are floor(N * ratio) for val and test; the remainder goes to
    train. Deterministic for a given seed.
    """
    if any(r <= 0 for r in ratios) or abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError(f"ratios must be positive and sum to 1, got {ratios}")
    nodes = labels.labeled_nodes()
    n = nodes.size
    if n < 3:
        raise DataError(f"need at least 3 labeled nodes to split, have {n}")
    rng = rng_for(seed, "split")
    order = nodes[rng.permutation(n)]
    n_val = int(np.floor(n * ratios[1]))
    n_test = int(np.floor(n * ratios[2]))
    n_train = n - n_val - n_test
    return Split(
        train=np.sort(order[:n_train]),
        val=np.sort(order[n_train:n_train + n_val]),
        test=np.sort(order[n_train + n_val:]),
        seed=seed,
    )


@dataclass
class Dataset:
    graph: Graph
    labels: LabelSet
    corpus: TextCorpus


def load_dataset(edge_file, label_file, text_file) -> Dataset:
    graph = load_graph(edge_file)
    return Dataset(
        graph=graph,
        labels=load_labels(label_file, graph),
        corpus=load_texts(text_file, graph),
    )
