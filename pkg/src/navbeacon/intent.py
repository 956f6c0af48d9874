"""Utterance interpretation: speech-to-text and label extraction.

The happy path POSTs audio to an STT endpoint and the transcript plus the
known label names to an LLM endpoint, expecting a strict
{"labels": [...]} reply. When the model path is down or returns garbage,
a deterministic fuzzy token matcher recovers the labels locally, and
command keywords (take/go/delete) are always matched locally.
"""

from __future__ import annotations

import json
import math
import string
from dataclasses import dataclass
from enum import Enum

import requests

from .world_store import canonical_name

FUZZY_DISTANCE_RATIO = 0.3  # edit-distance budget as a fraction of label length


class IntentError(Exception):
    pass


class TransportError(IntentError):
    """Backend unreachable, timed out, or replied with an error status."""


class ResponseParseError(IntentError):
    """Backend replied, but not with the agreed JSON shape."""


class LabelValidationError(IntentError):
    """Backend emitted a label that is not in the known set."""


class Keyword(Enum):
    TAKE = "take"
    GO = "go"
    DELETE = "delete"


@dataclass(frozen=True)
class Utterance:
    t_start: float
    t_end: float
    text: str | None = None
    audio: bytes | None = None  # PCM16 WAV bytes

    def __post_init__(self) -> None:
        if not self.t_start < self.t_end:
            raise ValueError(f"utterance must span time: [{self.t_start}, {self.t_end}]")
        if (self.text is None) == (self.audio is None):
            raise ValueError("utterance needs exactly one payload: text or audio")


@dataclass(frozen=True)
class IntentResult:
    labels: tuple[str, ...] = ()
    keyword: Keyword | None = None
    raw_text: str = ""

    def __post_init__(self) -> None:
        if self.labels and self.keyword is not None:
            raise ValueError("a result carries labels or a keyword, never both")

    @property
    def empty(self) -> bool:
        return not self.labels and self.keyword is None


@dataclass(frozen=True)
class BackendConfig:
    stt_url: str = "http://127.0.0.1:9100/stt"
    llm_url: str = "http://127.0.0.1:9100/llm"
    timeout: float = 5.0
    fallback_enabled: bool = True

    def __post_init__(self) -> None:
        if self.timeout <= 0:
            raise ValueError(f"timeout must be positive, got {self.timeout}")


def normalize_text(text: str) -> str:
    """Lowercase, strip punctuation, collapse whitespace."""
    lowered = text.lower().translate(str.maketrans("", "", string.punctuation))
    return " ".join(lowered.split())


def transcribe(u: Utterance, cfg: BackendConfig) -> str:
    """Transcript of the utterance; text payloads pass through verbatim."""
    if u.text is not None:
        return u.text
    try:
        resp = requests.post(
            cfg.stt_url,
            data=u.audio,
            headers={"Content-Type": "audio/wav"},
            timeout=cfg.timeout,
        )
    except requests.RequestException as exc:
        raise TransportError(f"STT backend unreachable: {exc}") from exc
    if resp.status_code != 200:
        raise TransportError(f"STT backend returned {resp.status_code}")
    try:
        body = resp.json()
    except ValueError as exc:
        raise ResponseParseError(f"STT response is not JSON: {exc}") from exc
    text = body.get("text") if isinstance(body, dict) else None
    if not isinstance(text, str):
        raise ResponseParseError('STT response missing string field "text"')
    return text


def extract_labels_llm(text: str, known_labels, cfg: BackendConfig) -> IntentResult:
    """Ask the LLM endpoint which known labels the transcript names.

    The reply must be exactly {"labels": [names...]}; every name must
    canonically match a known label, and order is preserved.
    """
    known = list(known_labels)
    try:
        resp = requests.post(
            cfg.llm_url,
            json={"text": text, "labels": known},
            timeout=cfg.timeout,
        )
    except requests.RequestException as exc:
        raise TransportError(f"LLM backend unreachable: {exc}") from exc
    if resp.status_code != 200:
        raise TransportError(f"LLM backend returned {resp.status_code}")
    try:
        body = json.loads(resp.content.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ResponseParseError(f"LLM response is not JSON: {exc}") from exc
    if not isinstance(body, dict) or not isinstance(body.get("labels"), list):
        raise ResponseParseError('LLM response must be {"labels": [...]}')

    by_canon = {canonical_name(name): name for name in known}
    resolved = []
    for item in body["labels"]:
        if not isinstance(item, str):
            raise ResponseParseError(f"label entries must be strings, got {item!r}")
        match = by_canon.get(canonical_name(item))
        if match is None:
            raise LabelValidationError(f"unknown label {item!r}")
        resolved.append(match)
    return IntentResult(labels=tuple(resolved), keyword=None, raw_text=text)


def detect_keyword(text: str) -> Keyword | None:
    """First command keyword appearing as a whole word, if any."""
    for token in normalize_text(text).split():
        for kw in Keyword:
            if token == kw.value:
                return kw
    return None


def extract_labels_fallback(text: str, known_labels) -> IntentResult:
    """Deterministic local matcher for degraded transcripts.

    Each known label is matched against same-length token windows of the
    transcript by edit distance, with a budget of 30% of the label length,
    so e.g. a garbled "Tish box" still finds "Tissue box". Matches are
    emitted in order of first occurrence.
    """
    norm = normalize_text(text)
    tokens = norm.split()
    matches: list[tuple[int, str]] = []  # (token position, label)
    seen: set[str] = set()

    for label in known_labels:
        norm_label = normalize_text(label)
        if not norm_label:
            continue
        budget = math.ceil(FUZZY_DISTANCE_RATIO * len(norm_label))
        n = len(norm_label.split())
        pos = _first_window_match(tokens, norm_label, n, budget)
        if pos is not None:
            canon = canonical_name(label)
            if canon not in seen:
                seen.add(canon)
                matches.append((pos, label))

    matches.sort(key=lambda m: m[0])
    labels = tuple(label for _, label in matches)
    keyword = detect_keyword(text)
    if labels:
        return IntentResult(labels=labels, keyword=None, raw_text=text)
    return IntentResult(labels=(), keyword=keyword, raw_text=text)


def interpret(u: Utterance, known_labels, cfg: BackendConfig) -> IntentResult:
    """Full pipeline: transcribe, extract labels, fall back when needed.

    Never raises for backend trouble when the fallback is enabled: a
    transcript that supports neither labels nor a keyword simply yields an
    empty result. Labels take precedence over a keyword when both appear.
    """
    try:
        text = transcribe(u, cfg)
    except IntentError:
        if not cfg.fallback_enabled:
            raise
        return IntentResult(raw_text="")

    try:
        labels = extract_labels_llm(text, known_labels, cfg).labels
    except IntentError:
        if not cfg.fallback_enabled:
            raise
        labels = extract_labels_fallback(text, known_labels).labels

    if labels:
        return IntentResult(labels=labels, keyword=None, raw_text=text)
    return IntentResult(labels=(), keyword=detect_keyword(text), raw_text=text)


def edit_distance(a: str, b: str) -> int:
    """Plain Levenshtein distance."""
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i]
        for j, cb in enumerate(b, start=1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def _first_window_match(tokens: list[str], norm_label: str, n: int, budget: int) -> int | None:
    if not tokens:
        return None
    if len(tokens) < n:
        windows = [(0, " ".join(tokens))]
    else:
        windows = [(i, " ".join(tokens[i : i + n])) for i in range(len(tokens) - n + 1)]
    for pos, window in windows:
        if edit_distance(window, norm_label) <= budget:
            return pos
    return None
