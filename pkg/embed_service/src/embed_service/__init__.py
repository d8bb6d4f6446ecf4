"""HTTP service exposing pretrained-transformer first-token embeddings."""

from .app import create_app, serve
from .backend import EmbeddingBackend, ServiceConfig

__version__ = "0.1.0"
