"""Transformer embedding backend.

Embeddings are the final hidden layer at the first sequence position
(the classification token for BERT/RoBERTa-family tokenizers). Inference
is serialized behind a lock; requests may arrive concurrently.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

MAX_BATCH = 64
TRUNCATION = 256


@dataclass
class ServiceConfig:
    model_name: str
    max_batch: int = MAX_BATCH
    truncation: int = TRUNCATION
    host: str = "127.0.0.1"
    port: int = 8300

    def __post_init__(self):
        if self.max_batch < 1:
            raise ValueError(f"max_batch must be positive, got {self.max_batch}")
        if self.truncation < 2:
            raise ValueError(f"truncation must allow the special tokens, got {self.truncation}")


class EmbeddingBackend:
    """Loads the model once and serves first-position embeddings."""

    def __init__(self, config: ServiceConfig):
        self.config = config
        self._lock = threading.Lock()
        self._model = None
        self._tokenizer = None
        self._dim: int | None = None
        self.load_error: str | None = None

    @property
    def ready(self) -> bool:
        return self._model is not None

    @property
    def dim(self) -> int:
        if self._dim is None:
            raise RuntimeError("model not loaded")
        return self._dim

    def load(self) -> None:
        # imports deferred so the process starts (and can answer 503)
        # before torch/transformers finish initializing
        try:
            from transformers import AutoModel, AutoTokenizer

            tokenizer = AutoTokenizer.from_pretrained(self.config.model_name)
            model = AutoModel.from_pretrained(self.config.model_name)
            model.eval()
        except Exception as exc:  # surfaced through /health for operators
            self.load_error = f"{type(exc).__name__}: {exc}"
            raise
        self._tokenizer = tokenizer
        self._model = model
        self._dim = int(model.config.hidden_size)

    def embed(self, texts: list[str]) -> list[list[float]]:
        """First-position embeddings for each text, in request order."""
        if not self.ready:
            raise RuntimeError("model not loaded")
        if not texts:
            return []
        import torch

        with self._lock, torch.no_grad():
            encoded = self._tokenizer(
                texts,
                return_tensors="pt",
                padding=True,
                truncation=True,
                max_length=self.config.truncation,
            )
            hidden = self._model(**encoded).last_hidden_state
            return hidden[:, 0, :].cpu().numpy().astype(float).tolist()
