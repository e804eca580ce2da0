"""Greedy skill sequencing with rule-filtered candidates.

The planner grounds a candidate skill universe from the map and the
command, filters it through hard admissibility rules, asks a scorer for
likelihoods, and appends the argmax until "done" wins. Rules:

  R1: a candidate whose name equals the previous step's name is rejected
      ("done" is exempt so the candidate set can never be empty).
  R2: grasp(x) requires find_obj(x) earlier with no grasp in between.
  R3: place/handover require a held object; find_obj/grasp require an
      empty gripper.
  R4: done is always admissible.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Iterable, Optional

from .errors import (
    ParseError,
    PlanTooLong,
    UnknownSkill,
    UnresolvedAmbiguity,
)
from .scorer import ScoreRequest, normalize
from .semantic_map import SemanticMap

SKILL_ARITIES = {
    "move_to": 1,
    "find_obj": 1,
    "grasp": 1,
    "place": 1,
    "handover": 0,
    "answer": 1,
    "follow_person": 0,
    "done": 0,
}

DEFAULT_MAX_STEPS = 20

# Words treated as unresolved references in a command. The noun-like ones
# keep a preceding determiner when substituted; the pronoun-like ones are
# replaced together with an inserted "the".
AMBIGUOUS_VOCABULARY = frozenset({"object", "it", "thing", "something", "one", "them"})
_PRONOUN_LIKE = frozenset({"it", "them", "something"})
_DETERMINERS = frozenset(
    {"the", "a", "an", "this", "that", "these", "those", "some", "any"}
)

# Function words and common command verbs excluded when object nouns are
# extracted from a resolved command.
_STOPWORDS = frozenset(
    {
        "the", "a", "an", "this", "that", "these", "those", "some", "any",
        "me", "my", "your", "you", "i", "we", "us", "him", "her", "his",
        "hers", "their", "theirs", "its", "please", "and", "or", "then",
        "to", "on", "in", "at", "from", "into", "onto", "with", "for",
        "of", "up", "down", "over", "under", "there", "here", "by",
        "bring", "put", "take", "go", "move", "find", "get", "give",
        "fetch", "grab", "carry", "deliver", "hand", "pick", "place",
        "tell", "say", "answer", "follow", "come", "look", "search",
        "person", "what", "which", "who", "where", "is", "are", "was",
        "be", "it", "them", "object", "thing", "something", "one",
    }
)


@dataclass(frozen=True)
class SkillInstance:
    """A skill name with grounded arguments, e.g. grasp(apple)."""

    name: str
    args: tuple[str, ...] = ()

    def __post_init__(self):
        if self.name not in SKILL_ARITIES:
            raise UnknownSkill(f"unknown skill: {self.name}")
        object.__setattr__(self, "args", tuple(self.args))
        arity = SKILL_ARITIES[self.name]
        if len(self.args) != arity:
            raise ValueError(
                f"{self.name} takes {arity} argument(s), got {len(self.args)}"
            )

    def to_text(self) -> str:
        if self.args:
            return f"{self.name}({','.join(self.args)})"
        return self.name

    def __str__(self) -> str:
        return self.to_text()

    def sort_key(self):
        return (self.name, self.args)


_SKILL_TEXT = re.compile(r"^([a-z_]+)(?:\((.*)\))?$")


def parse_skill(text: str) -> SkillInstance:
    """Inverse of SkillInstance.to_text."""
    match = _SKILL_TEXT.match(text.strip())
    if not match:
        raise ParseError(f"malformed skill text: {text!r}")
    name, arg_text = match.group(1), match.group(2)
    if arg_text is None:
        args: tuple[str, ...] = ()
    else:
        args = tuple(part.strip() for part in arg_text.split(",")) if arg_text.strip() else ()
    try:
        return SkillInstance(name, args)
    except ValueError as err:
        raise ParseError(str(err)) from err


@dataclass(frozen=True)
class Clarification:
    """A question asked to pin down one ambiguous token."""

    question: str
    slot: str

    def __post_init__(self):
        if not self.question:
            raise ValueError("clarification question must be non-empty")


@dataclass(frozen=True)
class Command:
    raw: str
    resolved: str
    substitutions: tuple[tuple[str, str], ...] = ()


@dataclass(frozen=True)
class PlanTrace:
    """Chosen steps plus the normalized candidate scores behind each one."""

    steps: tuple[SkillInstance, ...] = ()
    step_scores: tuple[dict, ...] = ()
    metadata: tuple[tuple[str, str], ...] = ()

    def completed(self) -> bool:
        return bool(self.steps) and self.steps[-1].name == "done"


AnswerOracle = Callable[[Clarification], Optional[str]]

_WORD = re.compile(r"[A-Za-z_']+")


def resolve_ambiguity(raw: str, oracle: AnswerOracle) -> Command:
    """Replace every ambiguous-vocabulary token via one clarification each.

    Noun-like tokens after a determiner are swapped in place ("the object"
    becomes "the apple"); pronoun-like or bare tokens are replaced with
    "the <answer>". The oracle is asked once per occurrence, in order.
    """
    substitutions = []
    resolved_parts = []
    cursor = 0
    prev_word: Optional[str] = None
    for match in _WORD.finditer(raw):
        word = match.group(0)
        lowered = word.lower()
        if lowered in AMBIGUOUS_VOCABULARY:
            question = f"What does \"{word}\" refer to?"
            answer = oracle(Clarification(question=question, slot=word))
            answer = (answer or "").strip()
            if not answer:
                raise UnresolvedAmbiguity(f"no answer for ambiguous token {word!r}")
            keeps_determiner = (
                lowered not in _PRONOUN_LIKE
                and prev_word is not None
                and prev_word in _DETERMINERS
            )
            replacement = answer if keeps_determiner else f"the {answer}"
            resolved_parts.append(raw[cursor : match.start()])
            resolved_parts.append(replacement)
            cursor = match.end()
            substitutions.append((word, answer))
        prev_word = lowered
    resolved_parts.append(raw[cursor:])
    resolved = "".join(resolved_parts)

    leftover = [
        w.group(0)
        for w in _WORD.finditer(resolved)
        if w.group(0).lower() in AMBIGUOUS_VOCABULARY
    ]
    if leftover:
        raise UnresolvedAmbiguity(
            f"clarification answers left ambiguous tokens in place: {leftover}"
        )
    return Command(raw=raw, resolved=resolved, substitutions=tuple(substitutions))


def extract_objects(smap: SemanticMap, resolved: str) -> tuple[str, ...]:
    """Object nouns: command words minus function words and location names."""
    location_names = {r.name.lower() for r in smap.rooms}
    location_names.update(f.name.lower() for f in smap.furniture)
    location_names.add("operator")
    seen = []
    for match in _WORD.finditer(resolved):
        word = match.group(0).lower()
        if word in _STOPWORDS or word in location_names:
            continue
        if word not in seen:
            seen.append(word)
    return tuple(sorted(seen))


def ground_candidates(smap: SemanticMap, command: Command) -> tuple[SkillInstance, ...]:
    """Instantiate every skill over map locations and command objects."""
    locations = sorted(
        [r.name for r in smap.rooms]
        + [f.name for f in smap.furniture]
        + ["operator"]
    )
    furniture = sorted(f.name for f in smap.furniture)
    objects = extract_objects(smap, command.resolved)

    candidates = [SkillInstance("move_to", (loc,)) for loc in locations]
    for obj in objects:
        candidates.append(SkillInstance("find_obj", (obj,)))
        candidates.append(SkillInstance("grasp", (obj,)))
        candidates.append(SkillInstance("answer", (obj,)))
    candidates.extend(SkillInstance("place", (f,)) for f in furniture)
    candidates.append(SkillInstance("handover"))
    candidates.append(SkillInstance("follow_person"))
    candidates.append(SkillInstance("done"))
    return tuple(sorted(candidates, key=SkillInstance.sort_key))


def history_hints(history: Iterable[SkillInstance]):
    """Derive (held, found) from a skill history.

    found clears at each grasp, so a later grasp(x) needs a fresh
    find_obj(x); held clears when the object is placed or handed over.
    """
    held: Optional[str] = None
    found: set[str] = set()
    for skill in history:
        if skill.name == "find_obj":
            found.add(skill.args[0])
        elif skill.name == "grasp":
            held = skill.args[0]
            found = set()
        elif skill.name in ("place", "handover"):
            held = None
    return held, frozenset(found)


def admissible_skills(
    skill_set: Iterable[SkillInstance],
    history: tuple[SkillInstance, ...],
    held: Optional[str],
    found: frozenset,
) -> tuple[SkillInstance, ...]:
    """Candidates surviving rules R1 to R4, in (name, args) order."""
    previous = history[-1].name if history else None
    out = []
    for skill in skill_set:
        if skill.name == "done":
            out.append(skill)
            continue
        if skill.name == previous:
            continue
        if skill.name == "grasp" and (skill.args[0] not in found or held is not None):
            continue
        if skill.name in ("place", "handover") and held is None:
            continue
        if skill.name == "find_obj" and held is not None:
            continue
        out.append(skill)
    out.sort(key=SkillInstance.sort_key)
    return tuple(out)


def _score_step(command: Command, trace: PlanTrace, scorer, skill_set):
    held, found = history_hints(trace.steps)
    candidates = admissible_skills(skill_set, trace.steps, held, found)
    assert candidates, "done keeps the candidate set nonempty"
    request = ScoreRequest(
        command=command.resolved, history=trace.steps, candidates=candidates
    )
    distribution = normalize(scorer.score(request))
    best = None
    best_score = float("-inf")
    for candidate in candidates:
        score = distribution[candidate]
        if score > best_score:
            best, best_score = candidate, score
    return best, distribution


def plan_next(command: Command, trace: PlanTrace, scorer, skill_set) -> SkillInstance:
    """Argmax of the normalized scores over the admissible candidates."""
    skill, _ = _score_step(command, trace, scorer, skill_set)
    return skill


def _scorer_metadata(scorer) -> tuple[tuple[str, str], ...]:
    describe = getattr(scorer, "describe", None)
    if describe is None:
        return ()
    return tuple(sorted(describe().items()))


def plan_task(
    command: Command,
    scorer,
    skill_set,
    max_steps: int = DEFAULT_MAX_STEPS,
) -> PlanTrace:
    """Append argmax skills until done is selected; cap at max_steps."""
    if max_steps < 1:
        raise ValueError("max_steps must be at least 1")
    trace = PlanTrace(metadata=_scorer_metadata(scorer))
    for _ in range(max_steps):
        skill, distribution = _score_step(command, trace, scorer, skill_set)
        trace = PlanTrace(
            steps=trace.steps + (skill,),
            step_scores=trace.step_scores + (distribution,),
            metadata=trace.metadata,
        )
        if skill.name == "done":
            return trace
    raise PlanTooLong(f"done not selected within {max_steps} steps")
