"""Base captions for class sets, plus optional LLM rephrasing over HTTP.

Each class owns one fixed template sentence; a caption is the concatenation
of the templates for the assigned classes in canonical order.  Rephrasing is
strictly optional: it calls a chat-completion-style JSON endpoint and the
pipeline falls back to the base caption whenever the service is unavailable.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import requests

from .annotator import TimeSeriesClass, sorted_classes
from .errors import EmptyCompletion, ProtocolError, Unavailable

#: One template sentence per class.  Rising and Smooth are the reference
#: wordings; the rest follow the same surface pattern.
BASE_CAPTIONS = {
    TimeSeriesClass.RISING: "The signal has a rising trend.",
    TimeSeriesClass.FALLING: "The signal has a falling trend.",
    TimeSeriesClass.CONSTANT: "The signal stays almost constant.",
    TimeSeriesClass.CONVEX: "The signal has a convex shape.",
    TimeSeriesClass.CONCAVE: "The signal has a concave shape.",
    TimeSeriesClass.LINEAR: "The signal follows a linear trend.",
    TimeSeriesClass.NONLINEAR: "The signal follows a nonlinear trend.",
    TimeSeriesClass.SMOOTH: "The signal has a smooth shape.",
    TimeSeriesClass.NOISY: "The signal contains a lot of noise.",
    TimeSeriesClass.SIMPLE: "The signal has a simple shape.",
    TimeSeriesClass.COMPLEX: "The signal shows complex behavior.",
    TimeSeriesClass.SPIKY: "The signal contains sudden spikes in value.",
    TimeSeriesClass.DROPOUT: "The signal contains sudden drops in value.",
    TimeSeriesClass.PERIODIC: "The signal shows periodic behavior.",
    TimeSeriesClass.APERIODIC: "The signal shows no clear periodicity.",
    TimeSeriesClass.SYMMETRY: "The signal is symmetric about its center.",
    TimeSeriesClass.ASYMMETRY: "The signal is asymmetric about its center.",
    TimeSeriesClass.STEP: "The signal contains step-like level changes.",
    TimeSeriesClass.NOSTEP: "The signal contains no step-like level changes.",
    TimeSeriesClass.HIGH_AMPLITUDE: "The signal has a high amplitude.",
    TimeSeriesClass.LOW_AMPLITUDE: "The signal has a low amplitude.",
}

#: Caption used when no class rule fired at all.
NO_SALIENT_CAPTION = "The signal has no salient characteristics."

#: Fixed instruction sent ahead of the base text when rephrasing.
REPHRASE_INSTRUCTION = (
    "Rephrase the following description of a time-series signal into fluent "
    "prose without adding or removing characteristics:"
)

ENDPOINT_ENV = "TACO_LLM_ENDPOINT"
MODEL_ENV = "TACO_LLM_MODEL"

#: Default cap on concurrent rephrase requests.
DEFAULT_IN_FLIGHT = 4


@dataclass(frozen=True)
class CaptionRecord:
    """A base caption and, when rephrasing ran, its rephrased form."""

    base_text: str
    rephrased_text: str | None = None
    rephrase_model: str | None = None


def base_caption(classes, table: dict | None = None) -> str:
    """Concatenate the class templates in canonical order.

    The input may be any iterable of classes; insertion order never matters.
    An empty class set yields the fixed no-salient-characteristics sentence.
    """
    if table is None:
        table = BASE_CAPTIONS
    ordered = sorted_classes(set(classes))
    if not ordered:
        return NO_SALIENT_CAPTION
    return " ".join(table[cls] for cls in ordered)


def classes_from_caption(text: str, table: dict | None = None) -> set[TimeSeriesClass]:
    """Recover the class set from a base caption (round-trip check).

    Templates are unique complete sentences, so membership is a substring
    test per template.
    """
    if table is None:
        table = BASE_CAPTIONS
    return {cls for cls, template in table.items() if template in text}


def _extract_completion(body: dict) -> str:
    try:
        choices = body["choices"]
        first = choices[0]
    except (KeyError, IndexError, TypeError) as exc:
        raise ProtocolError(f"response body has no completion: {exc}") from exc
    if isinstance(first, dict):
        message = first.get("message")
        if isinstance(message, dict) and isinstance(message.get("content"), str):
            return message["content"]
        if isinstance(first.get("text"), str):
            return first["text"]
    raise ProtocolError("completion entry has neither message.content nor text")


def rephrase(text: str, endpoint: str | None = None, model: str | None = None,
             seed: int = 0, timeout: float = 30.0) -> str:
    """Ask a chat-completion endpoint to rephrase a base caption.

    The request pins temperature 0 and a fixed seed so endpoints that honor
    them produce repeatable output.  Raises :class:`Unavailable` on network
    failure (callers fall back to the base text), :class:`ProtocolError` on a
    malformed body and :class:`EmptyCompletion` on an empty completion.
    """
    endpoint = endpoint or os.environ.get(ENDPOINT_ENV)
    model = model or os.environ.get(MODEL_ENV, "")
    if not endpoint:
        raise Unavailable(f"no rephrase endpoint configured ({ENDPOINT_ENV} unset)")
    payload = {
        "model": model,
        "messages": [
            {"role": "user", "content": f"{REPHRASE_INSTRUCTION}\n{text}"},
        ],
        "temperature": 0,
        "seed": seed,
    }
    try:
        response = requests.post(endpoint, json=payload, timeout=timeout)
        response.raise_for_status()
    except requests.RequestException as exc:
        raise Unavailable(f"rephrase endpoint failed: {exc}") from exc
    try:
        body = response.json()
    except ValueError as exc:
        raise ProtocolError(f"response is not JSON: {exc}") from exc
    completion = _extract_completion(body).strip()
    if not completion:
        raise EmptyCompletion("endpoint returned an empty completion")
    return completion


def rephrase_many(texts, endpoint: str | None = None, model: str | None = None,
                  seed: int = 0, max_in_flight: int = DEFAULT_IN_FLIGHT,
                  timeout: float = 30.0) -> list[str | None]:
    """Rephrase a batch of captions with a bounded number of in-flight calls.

    Results are matched to inputs by position, never by arrival order.  A
    failed call yields None in its slot so the caller can fall back to the
    base caption for that record only.
    """
    texts = list(texts)
    results: list[str | None] = [None] * len(texts)
    if not texts:
        return results
    with ThreadPoolExecutor(max_workers=max(1, max_in_flight)) as pool:
        futures = {
            pool.submit(rephrase, text, endpoint, model, seed, timeout): i
            for i, text in enumerate(texts)
        }
        for future, i in futures.items():
            try:
                results[i] = future.result()
            except (Unavailable, ProtocolError, EmptyCompletion):
                results[i] = None
    return results
