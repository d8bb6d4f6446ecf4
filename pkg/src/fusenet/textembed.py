"""Per-node text embeddings through interchangeable providers.

Three providers produce the N x d embedding matrix:

  hashing     -- deterministic signed feature hashing, no model runtime
  precomputed -- JSONL file of {"id": ..., "vec": [...]} rows
  remote      -- HTTP service speaking the /embed wire protocol

Nodes with an empty document always map to the zero vector, so fusion
degrades to graph-only for silent nodes regardless of provider.
"""

from __future__ import annotations

import hashlib
import json
import re
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np
import requests

from .errors import ConfigError, ContractError, DataError, TransportError
from .graphdata import Graph, TextCorpus

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)

MAX_BATCH = 64
RETRIES = 3
BACKOFF_BASE = 0.25  # seconds; doubled per retry


@dataclass
class ProviderConfig:
    kind: str  # precomputed | hashing | remote
    dim: int = 64
    path: Optional[str] = None  # precomputed embedding file
    endpoint: Optional[str] = None  # remote service URL
    batch_size: int = MAX_BATCH
    timeout: float = 10.0

    def __post_init__(self):
        if self.kind not in ("precomputed", "hashing", "remote"):
            raise ConfigError(f"unknown provider kind {self.kind!r}")
        if self.dim <= 0:
            raise ConfigError(f"embedding dim must be positive, got {self.dim}")
        if self.kind == "remote" and not 1 <= self.batch_size <= MAX_BATCH:
            raise ConfigError(
                f"remote batch size must be in [1, {MAX_BATCH}], got {self.batch_size}"
            )


@dataclass
class EmbeddingMatrix:
    dim: int
    rows: np.ndarray  # N x dim
    source: str


def tokenize(text: str) -> list[str]:
    """Lowercase and split into maximal alphanumeric runs."""
    return _TOKEN_RE.findall(text.lower())


def _token_hash(token: str) -> int:
    digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def hash_embed(text: str, dim: int) -> np.ndarray:
    """Signed feature hashing of a document into a fixed-width vector.

    Each token lands in bucket ``h mod dim`` with sign taken from bit 63
    of a stable 64-bit hash, accumulating +/- its term frequency. The
    result is L2-normalized unless it is identically zero.
    """
    if dim <= 0:
        raise ValueError(f"dim must be positive, got {dim}")
    vec = np.zeros(dim)
    for token in tokenize(text):
        h = _token_hash(token)
        sign = -1.0 if (h >> 63) & 1 else 1.0
        vec[h % dim] += sign
    norm = np.linalg.norm(vec)
    if norm > 0.0:
        vec /= norm
    return vec


def _chunk_sizes(n: int, batch: int) -> list[int]:
    """Sizes of the ceil(n / batch) request chunks, in order."""
    full, rest = divmod(n, batch)
    return [batch] * full + ([rest] if rest else [])


class RemoteStats:
    """Client-side counters, used by the protocol conformance tests."""

    def __init__(self):
        self.requests = 0


def remote_embed_batch(
    texts: list[str],
    endpoint: str,
    batch: int = MAX_BATCH,
    timeout: float = 10.0,
    stats: Optional[RemoteStats] = None,
) -> list[np.ndarray]:
    """POST texts to the embedding service in request-order chunks.

    Each chunk is retried up to three times with exponential backoff
    (250 ms base). Inconsistent dimensions across chunks are a contract
    violation, not a transport failure.
    """
    if not 1 <= batch <= MAX_BATCH:
        raise ConfigError(f"batch must be in [1, {MAX_BATCH}], got {batch}")
    if any(t is None for t in texts):
        raise ValueError("texts must not contain None")
    out: list[np.ndarray] = []
    dim: Optional[int] = None
    url = endpoint.rstrip("/") + "/embed"
    pos = 0
    for size in _chunk_sizes(len(texts), batch):
        chunk = texts[pos:pos + size]
        pos += size
        payload = _post_chunk(url, chunk, timeout, stats)
        vectors = payload.get("embeddings")
        if not isinstance(vectors, list) or len(vectors) != len(chunk):
            got = len(vectors) if isinstance(vectors, list) else type(vectors).__name__
            raise ContractError(f"sent {len(chunk)} texts, response carries {got} embeddings")
        chunk_dim = payload.get("dim")
        if dim is None:
            dim = chunk_dim
        elif chunk_dim != dim:
            raise ContractError(f"response dim changed across chunks: {dim} then {chunk_dim}")
        for vec in vectors:
            arr = np.asarray(vec, dtype=np.float64)
            if arr.ndim != 1 or arr.shape[0] != dim:
                raise ContractError(f"embedding row has shape {arr.shape}, expected ({dim},)")
            out.append(arr)
    return out


def _post_chunk(url: str, chunk: list[str], timeout: float, stats) -> dict:
    last_exc: Optional[Exception] = None
    last_status: Optional[int] = None
    attempts = RETRIES + 1
    for attempt in range(attempts):
        if attempt:
            time.sleep(BACKOFF_BASE * 2 ** (attempt - 1))
        try:
            if stats is not None:
                stats.requests += 1
            resp = requests.post(url, json={"texts": chunk}, timeout=timeout)
        except requests.RequestException as exc:
            last_exc = exc
            continue
        if resp.status_code == 200:
            try:
                return resp.json()
            except ValueError:
                raise ContractError("embedding service returned non-JSON body") from None
        last_status = resp.status_code
    if last_status is not None:
        raise TransportError(
            f"embedding service failed with HTTP {last_status} after {attempts} attempts",
            status=last_status,
        )
    raise TransportError(f"embedding service unreachable after {attempts} attempts: {last_exc}")


def _load_precomputed(path: str, graph: Graph, dim: int) -> np.ndarray:
    file = Path(path)
    if not file.exists():
        raise DataError(f"embedding file not found: {file}")
    rows = np.zeros((graph.num_nodes, dim))
    seen: set[int] = set()
    with file.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped:
                continue
            try:
                obj = json.loads(stripped)
            except json.JSONDecodeError as exc:
                raise DataError(f"{file}:{lineno}: bad JSON: {exc}") from None
            if "id" not in obj or "vec" not in obj:
                raise DataError(f"{file}:{lineno}: object needs 'id' and 'vec' fields")
            try:
                idx = graph.index_of(str(obj["id"]))
            except KeyError:
                raise DataError(f"{file}:{lineno}: unknown node id {obj['id']!r}") from None
            if idx in seen:
                raise DataError(f"{file}:{lineno}: duplicate embedding for {obj['id']!r}")
            seen.add(idx)
            vec = np.asarray(obj["vec"], dtype=np.float64)
            if vec.shape != (dim,):
                raise ContractError(
                    f"{file}:{lineno}: vector length {vec.shape[0]} does not match dim {dim}"
                )
            rows[idx] = vec
    return rows


def embed_corpus(
    corpus: TextCorpus,
    provider: ProviderConfig,
    graph: Graph,
    stats: Optional[RemoteStats] = None,
) -> EmbeddingMatrix:
    """Embed every node's document, one row per node in index order."""
    if len(corpus.docs) != graph.num_nodes:
        raise DataError(
            f"corpus has {len(corpus.docs)} documents for {graph.num_nodes} nodes"
        )
    if provider.kind == "hashing":
        rows = np.zeros((graph.num_nodes, provider.dim))
        for i, doc in enumerate(corpus.docs):
            if doc:
                rows[i] = hash_embed(doc, provider.dim)
        return EmbeddingMatrix(provider.dim, rows, "hashing")
    if provider.kind == "precomputed":
        if not provider.path:
            raise ConfigError("precomputed provider needs a file path")
        rows = _load_precomputed(provider.path, graph, provider.dim)
        return EmbeddingMatrix(provider.dim, rows, "precomputed")
    if not provider.endpoint:
        raise ConfigError("remote provider needs an endpoint URL")
    nonempty = [(i, doc) for i, doc in enumerate(corpus.docs) if doc]
    vectors = remote_embed_batch(
        [doc for _, doc in nonempty],
        provider.endpoint,
        batch=provider.batch_size,
        timeout=provider.timeout,
        stats=stats,
    )
    if vectors and vectors[0].shape[0] != provider.dim:
        raise ContractError(
            f"remote dim {vectors[0].shape[0]} does not match configured dim {provider.dim}"
        )
    rows = np.zeros((graph.num_nodes, provider.dim))
    for (i, _), vec in zip(nonempty, vectors):
        rows[i] = vec
    return EmbeddingMatrix(provider.dim, rows, "remote")


def write_precomputed(path: str | Path, graph: Graph, matrix: EmbeddingMatrix) -> None:
    """Write an embedding matrix in the precomputed JSONL format."""
    with Path(path).open("w", encoding="utf-8") as fh:
        for i, node_id in enumerate(graph.node_ids):
            fh.write(json.dumps({"id": node_id, "vec": matrix.rows[i].tolist()}) + "\n")
