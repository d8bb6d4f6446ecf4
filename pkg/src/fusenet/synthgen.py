"""Seeded synthetic criminal networks with plantable structural and
textual crime signals.

The graph is a stochastic block model; communities may have different
intra-community densities, which gives the structural score a
community-level component that two message-passing layers can pick up.
Crime propensity blends a standardized intra-community degree, a latent
per-node text score, and noise; the top ``prevalence`` fraction becomes
the positive class, so label counts are exact. Documents emit
crime-lexicon tokens at a rate that grows with the node's text score.

Generation is a pure function of the config: same seed, same bytes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from .errors import ConfigError
from .graphdata import Graph, LabelSet, TextCorpus
from .seeding import rng_for


@dataclass
class SynthConfig:
    num_nodes: int = 300
    num_communities: int = 3
    intra_p: Union[float, Sequence[float]] = (0.30, 0.15, 0.06)
    inter_p: float = 0.01
    prevalence: float = 0.3
    alpha: float = 1.0          # structural signal weight
    beta: float = 1.0           # textual signal weight
    noise_scale: float = 0.25
    lexicon_size: int = 12
    emission_boost: float = 4.0
    vocab_size: int = 200
    tokens_per_doc: int = 40
    seed: int = 0

    def intra_probs(self) -> list[float]:
        if isinstance(self.intra_p, (int, float)):
            return [float(self.intra_p)] * self.num_communities
        probs = [float(p) for p in self.intra_p]
        if len(probs) != self.num_communities:
            raise ConfigError(
                f"{len(probs)} intra probabilities for {self.num_communities} communities"
            )
        return probs

    def __post_init__(self):
        probs = self.intra_probs() + [self.inter_p]
        if any(not 0.0 <= p <= 1.0 for p in probs):
            raise ConfigError(f"edge probabilities must lie in [0,1]: {probs}")
        if not 0.0 < self.prevalence < 1.0:
            raise ConfigError(f"prevalence must be in (0,1), got {self.prevalence}")
        if self.alpha < 0 or self.beta < 0:
            raise ConfigError("signal weights must be non-negative")
        if min(self.num_nodes, self.num_communities, self.lexicon_size,
               self.vocab_size, self.tokens_per_doc) <= 0:
            raise ConfigError("counts must be positive")


@dataclass
class LatentRecord:
    communities: np.ndarray
    structural: np.ndarray   # standardized intra-community degree
    textual: np.ndarray      # raw uniform text score in [0,1]
    propensity: np.ndarray


@dataclass
class SynthDataset:
    graph: Graph
    corpus: TextCorpus
    labels: LabelSet
    latent: LatentRecord
    config: SynthConfig


@dataclass
class SummaryStats:
    num_nodes: int
    num_edges: int
    prevalence: float
    mean_degree: float
    mean_intra_degree: float
    lexicon_rate_positive: float
    lexicon_rate_negative: float

    def as_dict(self) -> dict:
        return self.__dict__.copy()


def _communities(n: int, k: int) -> np.ndarray:
    sizes = [n // k + (1 if i < n % k else 0) for i in range(k)]
    return np.repeat(np.arange(k), sizes)


def generate(config: SynthConfig) -> SynthDataset:
    n = config.num_nodes
    comm = _communities(n, config.num_communities)
    intra = np.asarray(config.intra_probs())

    rng = rng_for(config.seed, "synthgen")
    same = comm[:, None] == comm[None, :]
    p_edge = np.where(same, intra[comm][:, None], config.inter_p)
    draws = rng.random((n, n))
    upper = np.triu(np.ones((n, n), dtype=bool), k=1)
    adj = np.zeros((n, n), dtype=bool)
    adj[upper] = draws[upper] < p_edge[upper]
    adj |= adj.T
    us, vs = np.nonzero(np.triu(adj, k=1))
    edges = list(zip(us.tolist(), vs.tolist()))

    intra_deg = (adj & same).sum(axis=1).astype(np.float64)
    std = intra_deg.std()
    structural = (intra_deg - intra_deg.mean()) / std if std > 0 else np.zeros(n)

    u_raw = rng.random(n)
    u_std = (u_raw - 0.5) * np.sqrt(12.0)  # unit-variance uniform
    noise = rng.standard_normal(n)
    propensity = config.alpha * structural + config.beta * u_std + config.noise_scale * noise

    k_pos = int(np.floor(config.prevalence * n))
    if k_pos < 1:
        raise ConfigError("prevalence and node count imply an empty positive class")
    if k_pos >= n:
        raise ConfigError("prevalence and node count imply an empty negative class")
    order = np.argsort(-propensity, kind="stable")
    labels = np.zeros(n, dtype=np.int64)
    labels[order[:k_pos]] = 1

    vocab = [f"w{i:03d}" for i in range(config.vocab_size)]
    lexicon = [f"crime{i:02d}" for i in range(config.lexicon_size)]
    tokens = np.asarray(vocab + lexicon)
    docs = []
    base = np.ones(len(tokens))
    for i in range(n):
        weights = base.copy()
        weights[config.vocab_size:] = 1.0 + config.emission_boost * u_raw[i]
        probs = weights / weights.sum()
        picks = rng.choice(len(tokens), size=config.tokens_per_doc, p=probs)
        docs.append(" ".join(tokens[picks]))

    graph = Graph.from_edges(n, edges)
    return SynthDataset(
        graph=graph,
        corpus=TextCorpus(docs),
        labels=LabelSet(labels),
        latent=LatentRecord(comm, structural, u_raw, propensity),
        config=config,
    )


def describe(dataset: SynthDataset) -> SummaryStats:
    graph, latent = dataset.graph, dataset.latent
    labels = dataset.labels.values
    lexicon_hits = np.array(
        [_lexicon_fraction(doc, dataset.config) for doc in dataset.corpus.docs]
    )
    degrees = np.array([len(adj) - 1 for adj in graph.adjacency], dtype=np.float64)
    intra = _intra_degrees(graph, latent.communities)
    return SummaryStats(
        num_nodes=graph.num_nodes,
        num_edges=len(graph.edges),
        prevalence=float((labels == 1).mean()),
        mean_degree=float(degrees.mean()),
        mean_intra_degree=float(intra.mean()),
        lexicon_rate_positive=float(lexicon_hits[labels == 1].mean()),
        lexicon_rate_negative=float(lexicon_hits[labels == 0].mean()),
    )


def _lexicon_fraction(doc: str, config: SynthConfig) -> float:
    words = doc.split()
    if not words:
        return 0.0
    hits = sum(1 for w in words if w.startswith("crime"))
    return hits / len(words)


def _intra_degrees(graph: Graph, communities: np.ndarray) -> np.ndarray:
    intra = np.zeros(graph.num_nodes)
    for u, v in graph.edges:
        if u != v and communities[u] == communities[v]:
            intra[u] += 1
            intra[v] += 1
    return intra


def write_dataset(dataset: SynthDataset, out_dir: str | Path) -> dict[str, Path]:
    """Write edge/label/text files in the standard loader formats."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    graph = dataset.graph
    paths = {
        "edges": out / "edges.tsv",
        "labels": out / "labels.tsv",
        "texts": out / "texts.jsonl",
    }
    with paths["edges"].open("w", encoding="utf-8") as fh:
        # one self-loop line per node keeps isolated nodes representable
        # and makes reload assign identical indices (first-appearance order)
        for i in range(graph.num_nodes):
            fh.write(f"{graph.node_ids[i]}\t{graph.node_ids[i]}\n")
        for u, v in graph.edges:
            fh.write(f"{graph.node_ids[u]}\t{graph.node_ids[v]}\n")
    with paths["labels"].open("w", encoding="utf-8") as fh:
        for i, label in enumerate(dataset.labels.values):
            fh.write(f"{graph.node_ids[i]}\t{int(label)}\n")
    with paths["texts"].open("w", encoding="utf-8") as fh:
        for i, doc in enumerate(dataset.corpus.docs):
            fh.write(json.dumps({"id": graph.node_ids[i], "text": doc}) + "\n")
    return paths
