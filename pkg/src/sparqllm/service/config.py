"""Service configuration: SPARQLLM_* environment variables, optionally
overridden by a JSON config file.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Mapping, Optional, Union

ENV_PREFIX = "SPARQLLM_"


@dataclass
class ServiceConfig:
    listen: str = "127.0.0.1:8000"
    sparql_endpoint: str = "embedded"
    llm_url: str = ""
    llm_model: str = "default"
    embed_url: str = "mock"
    embed_model: str = ""
    embed_dim: int = 64
    metric: str = "ip"
    mode: str = "direct"
    n_templates: int = 2
    max_attempts: int = 3
    mock_replay: str = ""
    seed: int = 42
    templates: str = ""   # corpus JSONL preloaded at startup
    ontology: str = ""    # ontology JSON
    sparql_timeout: float = 30.0
    llm_timeout: float = 60.0
    temperature: float = 0.0
    cors_origin: str = "*"

    def __post_init__(self):
        if self.embed_dim < 2:
            raise ValueError("embed_dim must be >= 2")
        if self.n_templates < 1:
            raise ValueError("n_templates must be >= 1")
        if self.max_attempts < 1:
            raise ValueError("max_attempts must be >= 1")

    @property
    def host(self) -> str:
        return self.listen.rsplit(":", 1)[0] or "127.0.0.1"

    @property
    def port(self) -> int:
        try:
            return int(self.listen.rsplit(":", 1)[1])
        except (IndexError, ValueError):
            return 8000

    @property
    def use_mock_llm(self) -> bool:
        return bool(self.mock_replay)

    @property
    def use_mock_embeddings(self) -> bool:
        return self.embed_url in ("", "mock")

    @classmethod
    def from_env(cls, env: Optional[Mapping[str, str]] = None,
                 config_file: Optional[Union[str, Path]] = None) -> "ServiceConfig":
        """Environment first; a config file, when given, overrides env values."""
        env = os.environ if env is None else env
        values: dict = {}
        casts = {f.name: f.type for f in fields(cls)}
        for f in fields(cls):
            raw = env.get(ENV_PREFIX + f.name.upper())
            if raw is not None:
                values[f.name] = _cast(raw, casts[f.name])
        if config_file:
            doc = json.loads(Path(config_file).read_text(encoding="utf-8"))
            for key, value in doc.items():
                if key in casts:
                    values[key] = _cast(value, casts[key])
                else:
                    raise ValueError(f"unknown config key {key!r} in {config_file}")
        return cls(**values)


def _cast(raw, annotation):
    if annotation in (int, "int"):
        return int(raw)
    if annotation in (float, "float"):
        return float(raw)
    return str(raw)
