"""Adapters for external heavy models behind a uniform predict interface.

Wire protocol, both transports: one JSON object per request,
{"id": string, "text": string}, answered by {"id": string, "scores":
{"S": number, "A": number, "O": number}}. Scores whose sum deviates from 1 by
less than 1e-3 are renormalized client-side; larger deviations are rejected.
The subprocess transport speaks newline-delimited JSON over stdio; the HTTP
transport POSTs to /predict. Each endpoint instance keeps a single request in
flight, so responses arrive in request order.
"""

from __future__ import annotations

import json
import select
import shlex
import subprocess
import uuid
from dataclasses import dataclass

import numpy as np
import requests

from .corpus import Tweet

SCORE_KEYS = ("S", "A", "O")
SUM_TOLERANCE = 1e-3


class EndpointError(RuntimeError):
    pass


def parse_scores(payload: dict, expected_id: str) -> np.ndarray:
    """Validate a response object and return the (S, A, O) distribution."""
    if payload.get("id") != expected_id:
        raise EndpointError(f"response id {payload.get('id')!r} does not match request {expected_id!r}")
    scores = payload.get("scores")
    if not isinstance(scores, dict) or set(scores) != set(SCORE_KEYS):
        raise EndpointError(f"malformed scores object: {scores!r}")
    try:
        values = np.array([float(scores[k]) for k in SCORE_KEYS])
    except (TypeError, ValueError) as exc:
        raise EndpointError(f"non-numeric score in {scores!r}") from exc
    if (values < 0).any() or not np.isfinite(values).all():
        raise EndpointError(f"scores must be finite and non-negative: {scores!r}")
    total = values.sum()
    if abs(total - 1.0) >= SUM_TOLERANCE:
        raise EndpointError(f"scores sum to {total:.6f}, outside tolerance {SUM_TOLERANCE}")
    return values / total


@dataclass
class ExternalEndpoint:
    """Transport address for an external model: `subprocess` runs `address`
    as a command; `http` POSTs to `address`/predict."""

    transport: str  # "subprocess" | "http"
    address: str
    timeout: float = 30.0

    def connect(self) -> "SubprocessEndpoint | HttpEndpoint":
        if self.transport == "subprocess":
            return SubprocessEndpoint(self.address, timeout=self.timeout)
        if self.transport == "http":
            return HttpEndpoint(self.address, timeout=self.timeout)
        raise EndpointError(f"unknown transport {self.transport!r}")


class SubprocessEndpoint:
    """Persistent child process answering NDJSON requests on stdio."""

    def __init__(self, command: str | list[str], timeout: float = 30.0):
        argv = shlex.split(command) if isinstance(command, str) else list(command)
        self.timeout = timeout
        self._proc = subprocess.Popen(
            argv,
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            text=True,
            bufsize=1,
        )

    def request(self, tweet_id: str, text: str) -> np.ndarray:
        if self._proc.poll() is not None:
            raise EndpointError(f"endpoint process exited with code {self._proc.returncode}")
        self._proc.stdin.write(json.dumps({"id": tweet_id, "text": text}, ensure_ascii=False) + "\n")
        self._proc.stdin.flush()

        ready, _, _ = select.select([self._proc.stdout], [], [], self.timeout)
        if not ready:
            raise EndpointError(f"endpoint timed out after {self.timeout}s")
        line = self._proc.stdout.readline()
        if not line:
            raise EndpointError("endpoint closed its stdout")
        try:
            payload = json.loads(line)
        except json.JSONDecodeError as exc:
            raise EndpointError(f"malformed endpoint response: {line!r}") from exc
        return parse_scores(payload, tweet_id)

    def predict_proba(self, tweet: Tweet) -> np.ndarray:
        return self.request(tweet.id, tweet.text)

    def close(self) -> None:
        if self._proc.poll() is None:
            self._proc.stdin.close()
            try:
                self._proc.wait(timeout=5)
            except subprocess.TimeoutExpired:
                self._proc.kill()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


class HttpEndpoint:
    """HTTP transport: POST {address}/predict with a JSON request body."""

    def __init__(self, address: str, timeout: float = 30.0, session: requests.Session | None = None):
        self.url = address.rstrip("/") + "/predict"
        self.timeout = timeout
        self.session = session or requests.Session()

    def request(self, tweet_id: str, text: str) -> np.ndarray:
        try:
            resp = self.session.post(
                self.url, json={"id": tweet_id, "text": text}, timeout=self.timeout
            )
            resp.raise_for_status()
            payload = resp.json()
        except requests.RequestException as exc:
            raise EndpointError(f"endpoint request failed: {exc}") from exc
        except ValueError as exc:
            raise EndpointError("endpoint returned non-JSON body") from exc
        return parse_scores(payload, tweet_id)

    def predict_proba(self, tweet: Tweet) -> np.ndarray:
        return self.request(tweet.id, tweet.text)

    def close(self) -> None:
        self.session.close()


class ScriptedClassifier:
    """Test double with a fixed score table; ids not in the table get the
    fallback distribution."""

    def __init__(self, scores: dict[str, np.ndarray], fallback: np.ndarray | None = None):
        self.scores = scores
        self.fallback = fallback if fallback is not None else np.full(3, 1 / 3)

    def predict_proba(self, tweet: Tweet) -> np.ndarray:
        return np.asarray(self.scores.get(tweet.id, self.fallback), dtype=np.float64)


def new_request_id() -> str:
    return uuid.uuid4().hex
