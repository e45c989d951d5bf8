"""Sentence-embedding gateway: remote HTTP provider plus a deterministic mock.

The mock hashes tokens into pseudo-random unit directions and sums them, so
texts sharing more tokens land closer in cosine space — enough structure for
retrieval tests without a real model.
"""

from __future__ import annotations

import hashlib
import logging
import re
from typing import Optional, Protocol

import httpx
import numpy as np

from .errors import InputError, TransportError

logger = logging.getLogger(__name__)

_TOKEN = re.compile(r"[a-z0-9]+")


class EmbeddingGateway(Protocol):
    model: str
    dim: int

    def embed(self, text: str) -> np.ndarray: ...


def _tokenize(text: str) -> list[str]:
    return _TOKEN.findall(text.lower())


def _token_vector(token: str, dim: int, seed: int) -> np.ndarray:
    digest = hashlib.blake2b(f"{seed}:{token}".encode("utf-8"), digest_size=8).digest()
    rng = np.random.default_rng(int.from_bytes(digest, "big"))
    return rng.standard_normal(dim)


def mock_embed(text: str, dim: int, seed: int) -> np.ndarray:
    """Deterministic token-hash embedding, L2-normalized."""
    if dim < 2:
        raise InputError(f"embedding dim must be >= 2, got {dim}")
    if not text or not text.strip():
        raise InputError("cannot embed empty text")
    tokens = _tokenize(text) or [text.strip()]
    vec = np.zeros(dim, dtype=np.float64)
    for token in tokens:
        vec += _token_vector(token, dim, seed)
    norm = float(np.linalg.norm(vec))
    if norm == 0.0:  # astronomically unlikely token cancellation
        vec = _token_vector("".join(tokens), dim, seed)
        norm = float(np.linalg.norm(vec))
    return vec / norm


class MockEmbeddingGateway:
    def __init__(self, dim: int = 64, seed: int = 42):
        if dim < 2:
            raise InputError(f"embedding dim must be >= 2, got {dim}")
        self.dim = dim
        self.seed = seed
        self.model = f"mock-{dim}"

    def embed(self, text: str) -> np.ndarray:
        return mock_embed(text, self.dim, self.seed)


class HttpEmbeddingGateway:
    """POST {model, input: [text]} -> {data: [{embedding: [...]}]}."""

    def __init__(self, url: str, model: str, dim: int, timeout: float = 30.0,
                 retries: int = 2, transport: Optional[httpx.BaseTransport] = None):
        self.url = url
        self.model = model
        self.dim = dim
        self.retries = retries
        self._client = httpx.Client(timeout=timeout, transport=transport)

    def embed(self, text: str) -> np.ndarray:
        if not text or not text.strip():
            raise InputError("cannot embed empty text")
        last_error: Optional[Exception] = None
        for attempt in range(self.retries + 1):
            try:
                response = self._client.post(self.url, json={"model": self.model, "input": [text]})
                response.raise_for_status()
                payload = response.json()
                values = payload["data"][0]["embedding"]
                break
            except (httpx.HTTPError, KeyError, IndexError, ValueError) as exc:
                last_error = exc
                logger.warning("embedding request failed (attempt %d/%d): %s",
                               attempt + 1, self.retries + 1, exc)
        else:
            raise TransportError(f"embedding provider failed: {last_error}", retries=self.retries)
        vec = np.asarray(values, dtype=np.float64)
        if vec.shape != (self.dim,):
            raise TransportError(
                f"provider returned dim {vec.shape}, expected ({self.dim},)", retries=0
            )
        if not np.all(np.isfinite(vec)):
            raise TransportError("provider returned non-finite values", retries=0)
        return vec


def embed_text(text: str, gateway: EmbeddingGateway) -> np.ndarray:
    """Embed one text; deterministic per (text, model) for the mock provider."""
    if not text or not text.strip():
        raise InputError("cannot embed empty text")
    vec = gateway.embed(text)
    if vec.shape != (gateway.dim,):
        raise InputError(f"gateway returned wrong dim {vec.shape}, expected {gateway.dim}")
    return vec
