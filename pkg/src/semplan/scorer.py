"""Likelihood scoring backends for the skill planner.

Two implementations of the same contract: a scripted scorer that replays
fixture tables (deterministic, used by tests and golden scenarios) and a
network scorer that reads per-token log-probabilities from a completions
endpoint and scores each candidate as exp(sum of its suffix logprobs).
"""

from __future__ import annotations

import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import IO, Union

import requests

from .errors import ConfigMissing, ParseError, ScorerFailure

PROMPT_TEMPLATE_ID = "skill-seq-v1"

ENDPOINT_VAR = "SEMPLAN_LLM_ENDPOINT"
KEY_VAR = "SEMPLAN_LLM_KEY"
MODEL_VAR = "SEMPLAN_LLM_MODEL"
DEFAULT_MODEL = "text-davinci-003"


@dataclass(frozen=True)
class ScoreRequest:
    command: str
    history: tuple
    candidates: tuple

    def __post_init__(self):
        object.__setattr__(self, "history", tuple(self.history))
        object.__setattr__(self, "candidates", tuple(self.candidates))
        if not self.candidates:
            raise ValueError("candidates must be nonempty")


@dataclass(frozen=True)
class ScoreResponse:
    """Raw nonnegative scores, keyed by candidate."""

    scores: dict

    def __post_init__(self):
        if not self.scores:
            raise ScorerFailure("empty score table")
        positive = False
        for candidate, value in self.scores.items():
            if not isinstance(value, (int, float)) or not math.isfinite(value):
                raise ScorerFailure(f"non-finite score for {candidate}")
            if value < 0:
                raise ScorerFailure(f"negative score for {candidate}")
            positive = positive or value > 0
        if not positive:
            raise ScorerFailure("all scores are zero")


def normalize(response: ScoreResponse) -> dict:
    """Scores divided by their sum; the result sums to 1."""
    total = sum(response.scores.values())
    return {candidate: value / total for candidate, value in response.scores.items()}


@dataclass(frozen=True)
class ScriptedScenario:
    """Fixture score tables indexed by history length."""

    command: str
    rows: tuple


def load_scenario(source: Union[str, IO]) -> ScriptedScenario:
    text = source if isinstance(source, str) else source.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise ParseError(f"scenario is not valid JSON: {err}") from err
    if not isinstance(doc, dict):
        raise ParseError("scenario document must be an object")
    unknown = set(doc) - {"command", "rows"}
    if unknown:
        raise ParseError(f"unknown scenario keys: {sorted(unknown)}")
    command = doc.get("command")
    rows_raw = doc.get("rows")
    if not isinstance(command, str) or not isinstance(rows_raw, list):
        raise ParseError("scenario needs a command string and a rows array")
    rows = []
    for i, row in enumerate(rows_raw):
        if not isinstance(row, dict) or set(row) != {"history_length", "scores"}:
            raise ParseError(f"row {i} must have history_length and scores")
        if row["history_length"] != i:
            raise ParseError(f"row {i} has history_length {row['history_length']}")
        scores = row["scores"]
        if not isinstance(scores, dict) or not scores:
            raise ParseError(f"row {i} scores must be a nonempty object")
        for key, value in scores.items():
            if not isinstance(key, str) or isinstance(value, bool) or not isinstance(
                value, (int, float)
            ):
                raise ParseError(f"row {i} has a malformed score entry: {key!r}")
        rows.append({k: float(v) for k, v in scores.items()})
    return ScriptedScenario(command=command, rows=tuple(rows))


class ScriptedScorer:
    """Replays a ScriptedScenario row per history length.

    Table entries beyond the requested candidates are ignored; a missing
    candidate, an exhausted scenario, or a command mismatch all surface as
    ScorerFailure because they mean the fixture does not match the run.
    """

    def __init__(self, scenario: ScriptedScenario):
        self.scenario = scenario

    def describe(self) -> dict:
        return {"scorer": "scripted"}

    def score(self, request: ScoreRequest) -> ScoreResponse:
        if request.command != self.scenario.command:
            raise ScorerFailure(
                f"scenario scripted for {self.scenario.command!r}, "
                f"got {request.command!r}"
            )
        step = len(request.history)
        if step >= len(self.scenario.rows):
            raise ScorerFailure(f"scenario exhausted at history length {step}")
        table = self.scenario.rows[step]
        scores = {}
        for candidate in request.candidates:
            text = candidate.to_text()
            if text not in table:
                raise ScorerFailure(f"no scripted score for {text} at step {step}")
            scores[candidate] = table[text]
        return ScoreResponse(scores)


@dataclass(frozen=True)
class LlmConfig:
    endpoint: str
    key: str
    model: str = DEFAULT_MODEL
    backoff_base: float = 0.5
    max_concurrency: int = 4
    timeout: float = 30.0


def config_from_env(environ=None) -> LlmConfig:
    env = os.environ if environ is None else environ
    endpoint = env.get(ENDPOINT_VAR)
    key = env.get(KEY_VAR)
    missing = [name for name, value in ((ENDPOINT_VAR, endpoint), (KEY_VAR, key)) if not value]
    if missing:
        raise ConfigMissing(f"missing environment variables: {', '.join(missing)}")
    return LlmConfig(endpoint=endpoint, key=key, model=env.get(MODEL_VAR, DEFAULT_MODEL))


def build_prompt(command: str, history: tuple) -> str:
    """Shared prompt prefix; candidate text is appended after one space."""
    done_steps = ", ".join(step.to_text() for step in history) or "none"
    return (
        "A home service robot picks its next skill.\n"
        f"Command: {command}\n"
        f"Completed skills: {done_steps}\n"
        "Next skill:"
    )


def _suffix_logprob_sum(payload: dict, prefix_len: int) -> float:
    try:
        logprobs = payload["choices"][0]["logprobs"]
        offsets = logprobs["text_offset"]
        token_logprobs = logprobs["token_logprobs"]
    except (KeyError, IndexError, TypeError) as err:
        raise ScorerFailure(f"malformed completion reply: {err!r}") from err
    total = 0.0
    for offset, logprob in zip(offsets, token_logprobs):
        if offset < prefix_len:
            continue
        if logprob is None or not math.isfinite(logprob):
            raise ScorerFailure("missing logprob for a candidate token")
        total += logprob
    return total


def _post_with_retries(config: LlmConfig, body: dict) -> dict:
    url = config.endpoint.rstrip("/") + "/v1/completions"
    headers = {"Authorization": f"Bearer {config.key}"}
    attempts = 3
    last_error = "no attempt made"
    for attempt in range(attempts):
        if attempt:
            time.sleep(config.backoff_base * (2 ** (attempt - 1)))
        try:
            reply = requests.post(url, json=body, headers=headers, timeout=config.timeout)
        except requests.RequestException as err:
            last_error = f"request failed: {err}"
            continue
        if reply.status_code == 200:
            try:
                return reply.json()
            except ValueError as err:
                raise ScorerFailure(f"reply is not JSON: {err}") from err
        if reply.status_code >= 500 or reply.status_code == 429:
            last_error = f"transient HTTP {reply.status_code}"
            continue
        raise ScorerFailure(f"HTTP {reply.status_code} from scoring endpoint")
    raise ScorerFailure(f"{last_error} after {attempts} attempts")


def llm_score(request: ScoreRequest, config: LlmConfig) -> ScoreResponse:
    """Score each candidate as exp(sum of its continuation logprobs).

    One completions call per candidate with echo enabled and zero new
    tokens, so the reply carries logprobs for the prompt itself; only the
    tokens at or past the candidate's start offset count.
    """
    prefix = build_prompt(request.command, request.history)

    def score_one(candidate) -> float:
        body = {
            "model": config.model,
            "prompt": prefix + " " + candidate.to_text(),
            "max_tokens": 0,
            "echo": True,
            "logprobs": True,
        }
        payload = _post_with_retries(config, body)
        return math.exp(_suffix_logprob_sum(payload, len(prefix)))

    workers = max(1, min(config.max_concurrency, len(request.candidates)))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        values = list(pool.map(score_one, request.candidates))
    return ScoreResponse(dict(zip(request.candidates, values)))


class LlmScorer:
    def __init__(self, config: LlmConfig):
        self.config = config

    @classmethod
    def from_env(cls, environ=None) -> "LlmScorer":
        return cls(config_from_env(environ))

    def describe(self) -> dict:
        return {
            "scorer": "llm",
            "prompt_template": PROMPT_TEMPLATE_ID,
            "model": self.config.model,
        }

    def score(self, request: ScoreRequest) -> ScoreResponse:
        return llm_score(request, self.config)
