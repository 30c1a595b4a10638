"""Clients for the external model services and a deterministic offline mock.

Four service roles share one wire protocol (UTF-8 JSON bodies; errors are
non-2xx with ``{"error": string}``):

* ``POST /v1/generate``  ``{"text", "relation": "xReact"}`` -> ``{"reaction"}``
* ``POST /v1/embed``     ``{"texts": [...]}`` -> ``{"vectors": [[...]], "dim"}``
* ``POST /v1/polarity``  ``{"text"}`` -> ``{"label": "POSITIVE"|"NEGATIVE", "confidence"}``
* ``POST /v1/complete``  ``{"instruction", "decode"}`` -> ``{"output"}``

:class:`HttpInferenceClient` talks to a real service with retries;
:class:`MockModelService` implements all four roles as pure functions of
their inputs so every pipeline stage can run offline and reproducibly.

Mock rules (all hashes are SHA-256 over UTF-8; ``u64(b)`` reads 8 bytes
big-endian):

* reaction: let ``d = sha256(trimmed text)``; if ``u64(d[:8]) / 2**64 <
  none_fraction`` the reaction is ``"none"``, otherwise it is
  ``REACTION_VOCABULARY[u64(d[8:16]) % len(REACTION_VOCABULARY)]``.
* embedding: lowercase whitespace tokens contribute a ``w:<token>``
  feature plus ``t:<trigram>`` features over ``#token#``; each feature
  hashes to bucket ``u64(d[:8]) % dim`` with sign from bit 0 of ``d[8]``;
  the accumulated vector is L2-normalized (an all-zero accumulation falls
  back to a single 1.0 at bucket ``u64(d[:8]) % dim`` of the whole text).
* polarity: majority vote of :data:`POSITIVE_WORDS` vs
  :data:`NEGATIVE_WORDS` hits over lowercase word matches; ties fall back
  to the parity of ``u64(sha256(text)[:8])`` (even -> POSITIVE).
  Confidence is ``0.5 + 0.5 * |pos - neg| / (pos + neg)``, or 0.5 with no
  hits.
* completion: if a known doc_id occurs as a substring of the instruction,
  the gold response for the longest such id is echoed; otherwise the
  fixed sentinel :data:`MOCK_NO_ANSWER` is returned. Sampled decoding is
  deterministic and equal to greedy for the mock.
"""

from __future__ import annotations

import hashlib
import re
import time
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np
import requests

__all__ = [
    "ClientError",
    "TransportError",
    "ServiceError",
    "ProtocolError",
    "InferenceEndpoint",
    "EmbeddingVector",
    "PolarityVerdict",
    "HttpInferenceClient",
    "MockModelService",
    "MOCK_NO_ANSWER",
    "REACTION_VOCABULARY",
    "POSITIVE_WORDS",
    "NEGATIVE_WORDS",
]


class ClientError(Exception):
    """Base class for inference-service failures (exit code 2 in the CLI)."""


class TransportError(ClientError):
    pass


class ServiceError(ClientError):
    def __init__(self, message: str, status: int | None = None):
        super().__init__(message)
        self.status = status


class ProtocolError(ClientError):
    pass


@dataclass(frozen=True, slots=True)
class InferenceEndpoint:
    base_url: str
    timeout_ms: int = 10_000
    max_retries: int = 2
    auth_token: str | None = None

    def __post_init__(self):
        if self.timeout_ms <= 0:
            raise ValueError("timeout_ms must be positive")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")


class EmbeddingVector:
    """A fixed-length real vector; ``dim`` always equals ``len(values)``."""

    __slots__ = ("values",)

    def __init__(self, values: Sequence[float] | np.ndarray):
        arr = np.asarray(values, dtype=np.float64)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("embedding must be a nonempty 1-d vector")
        arr = arr.copy()
        arr.flags.writeable = False
        self.values = arr

    @property
    def dim(self) -> int:
        return int(self.values.size)

    def __repr__(self) -> str:
        return f"EmbeddingVector(dim={self.dim})"


@dataclass(frozen=True, slots=True)
class PolarityVerdict:
    label: str
    confidence: float

    def __post_init__(self):
        if self.label not in ("POSITIVE", "NEGATIVE"):
            raise ValueError(f"label must be POSITIVE or NEGATIVE, got {self.label!r}")
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence must be in [0,1], got {self.confidence}")


def _require_nonempty(name: str, text: str) -> str:
    if not isinstance(text, str) or not text.strip():
        raise ValueError(f"{name} must be a nonempty string")
    return text.strip()


def _decode_payload(mode: str, seed: int | None) -> dict:
    if mode == "greedy":
        return {"mode": "greedy"}
    if mode == "sampled":
        if seed is None:
            raise ValueError("sampled decoding requires an explicit seed")
        return {"mode": "sampled", "seed": int(seed)}
    raise ValueError(f"decode mode must be 'greedy' or 'sampled', got {mode!r}")


class HttpInferenceClient:
    """Synchronous JSON-over-HTTP client with bounded retries.

    Every failure class (transport, non-2xx status, malformed body) is
    retried; a persistently failing endpoint is attempted exactly
    ``max_retries + 1`` times before the last error is raised with the
    endpoint URL and attempt count. Calls are independent, so any number
    may be in flight concurrently from different threads.
    """

    def __init__(self, endpoint: InferenceEndpoint, retry_backoff_s: float = 0.0):
        self.endpoint = endpoint
        self.retry_backoff_s = retry_backoff_s

    def _post(self, path: str, payload: dict, parse: Callable[[dict], object]) -> object:
        url = self.endpoint.base_url.rstrip("/") + path
        attempts = self.endpoint.max_retries + 1
        headers = {}
        if self.endpoint.auth_token:
            headers["Authorization"] = f"Bearer {self.endpoint.auth_token}"
        last_error: ClientError | None = None
        for attempt in range(attempts):
            if attempt and self.retry_backoff_s:
                time.sleep(self.retry_backoff_s)
            try:
                response = requests.post(url, json=payload, headers=headers,
                                         timeout=self.endpoint.timeout_ms / 1000.0)
            except requests.RequestException as e:
                last_error = TransportError(f"{url}: {e} (attempt {attempt + 1}/{attempts})")
                continue
            if not 200 <= response.status_code < 300:
                detail = ""
                try:
                    detail = response.json().get("error", "")
                except Exception:
                    pass
                last_error = ServiceError(
                    f"{url}: status {response.status_code} {detail} (attempt {attempt + 1}/{attempts})",
                    status=response.status_code)
                continue
            try:
                body = response.json()
                return parse(body)
            except (ValueError, KeyError, TypeError) as e:
                last_error = ProtocolError(f"{url}: malformed response body: {e} "
                                           f"(attempt {attempt + 1}/{attempts})")
                continue
        assert last_error is not None
        raise last_error

    def generate_reaction(self, document_text: str) -> str:
        text = _require_nonempty("document_text", document_text)

        def parse(body: dict) -> str:
            reaction = body["reaction"]
            if not isinstance(reaction, str):
                raise TypeError("reaction is not a string")
            return reaction.strip()

        return self._post("/v1/generate", {"text": text, "relation": "xReact"}, parse)

    def embed(self, texts: Sequence[str]) -> list[EmbeddingVector]:
        if not texts:
            raise ValueError("texts must be nonempty")
        cleaned = [_require_nonempty("text", t) for t in texts]

        def parse(body: dict) -> list[EmbeddingVector]:
            vectors = [EmbeddingVector(v) for v in body["vectors"]]
            dim = int(body["dim"])
            if len(vectors) != len(cleaned):
                raise ValueError(f"expected {len(cleaned)} vectors, got {len(vectors)}")
            if any(v.dim != dim for v in vectors):
                raise ValueError("vector dimensions disagree with reported dim")
            return vectors

        return self._post("/v1/embed", {"texts": cleaned}, parse)

    def classify_polarity(self, document_text: str) -> PolarityVerdict:
        text = _require_nonempty("document_text", document_text)

        def parse(body: dict) -> PolarityVerdict:
            return PolarityVerdict(label=body["label"], confidence=float(body["confidence"]))

        return self._post("/v1/polarity", {"text": text}, parse)

    def complete(self, instruction: str, mode: str = "greedy", seed: int | None = None) -> str:
        text = _require_nonempty("instruction", instruction)
        decode = _decode_payload(mode, seed)

        def parse(body: dict) -> str:
            output = body["output"]
            if not isinstance(output, str):
                raise TypeError("output is not a string")
            return output

        return self._post("/v1/complete", {"instruction": text, "decode": decode}, parse)


MOCK_NO_ANSWER = "no answer: instruction not recognized"

REACTION_VOCABULARY = (
    "happy", "sad", "excited", "scared", "angry", "relieved", "proud",
    "upset", "nervous", "grateful", "satisfied", "anxious", "surprised",
    "hopeful", "disappointed", "embarrassed", "calm", "frustrated",
)

POSITIVE_WORDS = frozenset("""
    happy happiness glad joy joyful delighted delight pleased excited relieved
    relief proud grateful hopeful love loved loves wonderful great good cheerful
    thrilled content calm satisfied amazing beautiful laughed laughing smile
    smiled celebrate celebrated won win success successful
""".split())

NEGATIVE_WORDS = frozenset("""
    sad sadness cried cry crying tears angry anger rage fear afraid scared
    terrified disgusted disgust awful terrible miserable upset worried anxious
    grief pain hurt lonely bad horrible lost losing failed failure frightened
    shocked appalled devastated heartbroken furious dread gloomy
""".split())


def _sha(data: str) -> bytes:
    return hashlib.sha256(data.encode("utf-8")).digest()


def _u64(chunk: bytes) -> int:
    return int.from_bytes(chunk, "big")


_WORD = re.compile(r"[a-z']+")


class MockModelService:
    """All four service roles as deterministic pure functions.

    See the module docstring for the exact hash, lexicon, and gold-echo
    rules; tests recompute them independently. ``gold_responses`` defaults
    to the bundled toy corpus so end-to-end pipeline runs can echo gold.
    """

    def __init__(self, none_fraction: float = 0.43, embed_dim: int = 64,
                 gold_responses: Mapping[str, str] | None = None):
        if not 0.0 <= none_fraction <= 1.0:
            raise ValueError("none_fraction must be in [0,1]")
        if embed_dim <= 0:
            raise ValueError("embed_dim must be positive")
        self.none_fraction = none_fraction
        self.embed_dim = embed_dim
        if gold_responses is None:
            from .data import toy_gold_responses
            gold_responses = toy_gold_responses()
        self.gold_responses = dict(gold_responses)

    # role: commonsense generator
    def generate_reaction(self, document_text: str) -> str:
        text = _require_nonempty("document_text", document_text)
        digest = _sha(text)
        if _u64(digest[:8]) / 2.0**64 < self.none_fraction:
            return "none"
        return REACTION_VOCABULARY[_u64(digest[8:16]) % len(REACTION_VOCABULARY)]

    # role: sentence embedder
    def _embed_one(self, text: str) -> EmbeddingVector:
        vec = np.zeros(self.embed_dim)
        for token in text.lower().split():
            features = [f"w:{token}"]
            padded = f"#{token}#"
            features.extend(f"t:{padded[i:i + 3]}" for i in range(len(padded) - 2))
            for feature in features:
                digest = _sha(feature)
                bucket = _u64(digest[:8]) % self.embed_dim
                sign = 1.0 if digest[8] & 1 else -1.0
                vec[bucket] += sign
        norm = np.linalg.norm(vec)
        if norm == 0.0:
            vec[_u64(_sha(text)[:8]) % self.embed_dim] = 1.0
            norm = 1.0
        return EmbeddingVector(vec / norm)

    def embed(self, texts: Sequence[str]) -> list[EmbeddingVector]:
        if not texts:
            raise ValueError("texts must be nonempty")
        return [self._embed_one(_require_nonempty("text", t)) for t in texts]

    # role: polarity classifier
    def classify_polarity(self, document_text: str) -> PolarityVerdict:
        text = _require_nonempty("document_text", document_text)
        words = _WORD.findall(text.lower())
        pos = sum(1 for w in words if w in POSITIVE_WORDS)
        neg = sum(1 for w in words if w in NEGATIVE_WORDS)
        if pos > neg:
            label = "POSITIVE"
        elif neg > pos:
            label = "NEGATIVE"
        else:
            label = "POSITIVE" if _u64(_sha(text)[:8]) % 2 == 0 else "NEGATIVE"
        matched = pos + neg
        confidence = 0.5 if matched == 0 else 0.5 + 0.5 * abs(pos - neg) / matched
        return PolarityVerdict(label=label, confidence=confidence)

    # role: completion model
    def complete(self, instruction: str, mode: str = "greedy", seed: int | None = None) -> str:
        text = _require_nonempty("instruction", instruction)
        _decode_payload(mode, seed)
        known = [doc_id for doc_id in self.gold_responses if doc_id in text]
        if known:
            best = sorted(known, key=lambda d: (-len(d), d))[0]
            return self.gold_responses[best]
        return MOCK_NO_ANSWER

    # wire protocol surface, shared bit-exactly with the real service
    def wire_dispatch(self, path: str, body: dict) -> tuple[int, dict]:
        """Handle one wire request in-process; returns (status, response body).

        This is the transport-free equivalent of the HTTP service and is
        what the contract fixtures run against.
        """
        try:
            if not isinstance(body, dict):
                return 400, {"error": "body must be a JSON object"}
            if path == "/v1/generate":
                if body.get("relation") != "xReact":
                    return 400, {"error": "relation must be 'xReact'"}
                return 200, {"reaction": self.generate_reaction(body.get("text", ""))}
            if path == "/v1/embed":
                texts = body.get("texts")
                if not isinstance(texts, list):
                    return 400, {"error": "texts must be an array of strings"}
                vectors = self.embed(texts)
                return 200, {"vectors": [v.values.tolist() for v in vectors], "dim": self.embed_dim}
            if path == "/v1/polarity":
                verdict = self.classify_polarity(body.get("text", ""))
                return 200, {"label": verdict.label, "confidence": verdict.confidence}
            if path == "/v1/complete":
                decode = body.get("decode")
                if not isinstance(decode, dict) or decode.get("mode") not in ("greedy", "sampled"):
                    return 400, {"error": "decode must be {'mode':'greedy'} or {'mode':'sampled','seed':int}"}
                if decode["mode"] == "sampled" and not isinstance(decode.get("seed"), int):
                    return 400, {"error": "sampled decoding requires an integer seed"}
                output = self.complete(body.get("instruction", ""),
                                       mode=decode["mode"], seed=decode.get("seed"))
                return 200, {"output": output}
            return 404, {"error": f"unknown endpoint {path}"}
        except ValueError as e:
            return 400, {"error": str(e)}


class CountingClient:
    """Wraps any client role and counts calls; used for cache verification."""

    def __init__(self, inner):
        self.inner = inner
        self.calls = 0

    def __getattr__(self, name):
        attr = getattr(self.inner, name)
        if not callable(attr):
            return attr

        def counted(*args, **kwargs):
            self.calls += 1
            return attr(*args, **kwargs)

        return counted
