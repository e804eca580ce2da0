import random

import pytest

from semplan.errors import (
    ParseError,
    PlanTooLong,
    UnknownSkill,
    UnresolvedAmbiguity,
)
from semplan.scorer import ScoreResponse
from semplan.semantic_map import load_map
from semplan.skills import (
    AMBIGUOUS_VOCABULARY,
    Clarification,
    Command,
    PlanTrace,
    SkillInstance,
    admissible_skills,
    extract_objects,
    ground_candidates,
    history_hints,
    parse_skill,
    plan_next,
    plan_task,
    resolve_ambiguity,
)

from oracles import check_rule_compliance


@pytest.fixture
def golden_map(fixtures_dir):
    return load_map((fixtures_dir / "maps" / "golden_arena.json").read_text())


def oracle_from(answers):
    """Answer provider that pops from a list and records the questions."""
    queue = list(answers)
    asked = []

    def respond(clarification: Clarification):
        asked.append(clarification)
        return queue.pop(0) if queue else ""

    respond.asked = asked
    return respond


class TableScorer:
    """Scores by skill text lookup; unknown candidates get the fallback."""

    def __init__(self, *tables, fallback=0.05):
        self.tables = [dict(t) for t in tables] or [{}]
        self.fallback = fallback
        self.calls = 0

    def describe(self):
        return {"scorer": "table"}

    def score(self, request):
        table = self.tables[min(len(request.history), len(self.tables) - 1)]
        self.calls += 1
        return ScoreResponse(
            {c: table.get(c.to_text(), self.fallback) for c in request.candidates}
        )


class TestSkillInstance:
    def test_text_forms(self):
        assert SkillInstance("move_to", ("kitchen",)).to_text() == "move_to(kitchen)"
        assert SkillInstance("handover").to_text() == "handover"
        assert str(SkillInstance("done")) == "done"

    def test_parse_round_trip(self):
        for text in ["move_to(kitchen)", "grasp(apple)", "handover", "done", "answer(time)"]:
            assert parse_skill(text).to_text() == text

    def test_parse_rejects_malformed(self):
        with pytest.raises(ParseError):
            parse_skill("grasp()")
        with pytest.raises(ParseError):
            parse_skill("grasp(a,b)")
        with pytest.raises(ParseError):
            parse_skill("Grasp(apple)")
        with pytest.raises(ParseError):
            parse_skill("handover(now) extra")

    def test_parse_unknown_name(self):
        with pytest.raises(UnknownSkill):
            parse_skill("fly(away)")

    def test_arity_enforced_at_construction(self):
        with pytest.raises(ValueError):
            SkillInstance("grasp")
        with pytest.raises(ValueError):
            SkillInstance("done", ("x",))
        with pytest.raises(UnknownSkill):
            SkillInstance("teleport", ("x",))


class TestResolveAmbiguity:
    def test_bring_me_the_object(self):
        oracle = oracle_from(["apple"])
        command = resolve_ambiguity("Bring me the object", oracle)
        assert command.resolved == "Bring me the apple"
        assert command.substitutions == (("object", "apple"),)
        assert [c.slot for c in oracle.asked] == ["object"]

    def test_unambiguous_passthrough(self):
        oracle = oracle_from([])
        command = resolve_ambiguity("Bring me the apple", oracle)
        assert command.resolved == command.raw == "Bring me the apple"
        assert command.substitutions == ()
        assert oracle.asked == []

    def test_two_substitutions(self):
        command = resolve_ambiguity("Put it on the thing", oracle_from(["cup", "shelf"]))
        assert command.resolved == "Put the cup on the shelf"
        assert len(command.substitutions) == 2

    def test_pronoun_gets_inserted_determiner(self):
        command = resolve_ambiguity("Bring me something", oracle_from(["banana"]))
        assert command.resolved == "Bring me the banana"

    def test_case_insensitive_matching(self):
        command = resolve_ambiguity("BRING ME THE OBJECT", oracle_from(["mug"]))
        assert command.resolved == "BRING ME THE mug"

    def test_punctuation_preserved(self):
        command = resolve_ambiguity("Bring it, please.", oracle_from(["cup"]))
        assert command.resolved == "Bring the cup, please."

    def test_empty_answer_raises(self):
        with pytest.raises(UnresolvedAmbiguity):
            resolve_ambiguity("Bring me the object", oracle_from([]))

    def test_ambiguous_answer_rejected(self):
        with pytest.raises(UnresolvedAmbiguity):
            resolve_ambiguity("Bring me the object", oracle_from(["red thing"]))

    def test_resolved_never_contains_vocabulary(self):
        commands = [
            "Bring me the object",
            "Put it on the thing",
            "Take them to the kitchen",
            "Find something for me",
            "Grab that one",
        ]
        answers = ["apple", "cup", "shelf", "plates", "snack", "mug"]
        for raw in commands:
            command = resolve_ambiguity(raw, oracle_from(list(answers)))
            resolved_words = {w.lower() for w in command.resolved.split()}
            assert not (resolved_words & AMBIGUOUS_VOCABULARY), command.resolved

    def test_substitution_count_equals_clarification_count(self):
        oracle = oracle_from(["cup", "shelf", "plate"])
        command = resolve_ambiguity("Put it on the thing near them", oracle)
        assert len(command.substitutions) == len(oracle.asked) == 3


class TestGrounding:
    def test_objects_from_command(self, golden_map):
        assert extract_objects(golden_map, "Bring me the apple") == ("apple",)

    def test_location_words_are_not_objects(self, golden_map):
        objects = extract_objects(golden_map, "Put the cup on the shelf")
        assert objects == ("cup",)

    def test_candidate_universe(self, golden_map):
        command = Command(raw="Bring me the apple", resolved="Bring me the apple")
        universe = ground_candidates(golden_map, command)
        texts = [c.to_text() for c in universe]
        assert texts == sorted(texts)
        assert "move_to(kitchen_table)" in texts
        assert "move_to(operator)" in texts
        assert "move_to(bedroom)" in texts
        assert "find_obj(apple)" in texts
        assert "grasp(apple)" in texts
        assert "answer(apple)" in texts
        assert "place(shelf)" in texts
        assert "place(operator)" not in texts
        assert "handover" in texts
        assert "follow_person" in texts
        assert "done" in texts

    def test_duplicate_words_ground_once(self, golden_map):
        command = Command(raw="", resolved="apple apple Apple")
        universe = ground_candidates(golden_map, command)
        assert [c for c in universe if c.name == "find_obj"] == [
            SkillInstance("find_obj", ("apple",))
        ]


class TestHistoryHints:
    def test_empty(self):
        assert history_hints(()) == (None, frozenset())

    def test_found_accumulates(self):
        held, found = history_hints((parse_skill("find_obj(apple)"),))
        assert held is None
        assert found == {"apple"}

    def test_grasp_clears_found_and_sets_held(self):
        held, found = history_hints(
            (parse_skill("find_obj(apple)"), parse_skill("grasp(apple)"))
        )
        assert held == "apple"
        assert found == frozenset()

    def test_place_and_handover_release(self):
        steps = (
            parse_skill("find_obj(apple)"),
            parse_skill("grasp(apple)"),
            parse_skill("place(shelf)"),
        )
        assert history_hints(steps) == (None, frozenset())
        steps = steps[:2] + (parse_skill("handover"),)
        assert history_hints(steps) == (None, frozenset())


class TestAdmissibleSkills:
    def setup_method(self):
        self.universe = (
            parse_skill("done"),
            parse_skill("find_obj(apple)"),
            parse_skill("find_obj(milk)"),
            parse_skill("grasp(apple)"),
            parse_skill("grasp(milk)"),
            parse_skill("handover"),
            parse_skill("move_to(kitchen)"),
            parse_skill("move_to(living_room)"),
            parse_skill("place(shelf)"),
        )

    def names(self, history, held=None, found=frozenset()):
        return [
            s.to_text()
            for s in admissible_skills(self.universe, history, held, found)
        ]

    def test_no_grasp_before_find(self):
        texts = self.names(())
        assert not any(t.startswith("grasp") for t in texts)
        assert "find_obj(apple)" in texts
        assert "done" in texts

    def test_no_consecutive_same_name(self):
        history = (parse_skill("move_to(kitchen)"),)
        texts = self.names(history)
        assert not any(t.startswith("move_to") for t in texts)

    def test_grasp_only_found_objects(self):
        history = (parse_skill("find_obj(apple)"),)
        texts = self.names(history, held=None, found=frozenset({"apple"}))
        assert "grasp(apple)" in texts
        assert "grasp(milk)" not in texts

    def test_place_handover_need_held(self):
        texts = self.names(())
        assert "place(shelf)" not in texts
        assert "handover" not in texts
        texts = self.names((parse_skill("grasp(apple)"),), held="apple")
        assert "place(shelf)" in texts
        assert "handover" in texts

    def test_one_gripper_blocks_find_and_grasp(self):
        texts = self.names((parse_skill("move_to(kitchen)"),), held="apple")
        assert not any(t.startswith(("find_obj", "grasp")) for t in texts)

    def test_done_always_present(self):
        for history, held in [((), None), ((parse_skill("done"),), None)]:
            assert "done" in self.names(history, held=held)

    def test_output_sorted(self):
        texts = self.names(())
        assert texts == sorted(texts)


class TestPlanNext:
    def test_argmax(self, golden_map):
        command = Command(raw="x", resolved="Bring me the apple")
        universe = ground_candidates(golden_map, command)
        scorer = TableScorer({"done": 0.9})
        assert plan_next(command, PlanTrace(), scorer, universe) == parse_skill("done")

    def test_tie_breaks_lexicographically(self):
        command = Command(raw="x", resolved="x")
        universe = (
            parse_skill("grasp(apple)"),
            parse_skill("move_to(table)"),
            parse_skill("done"),
        )
        trace = PlanTrace(steps=(parse_skill("find_obj(apple)"),))
        scorer = TableScorer(
            {"grasp(apple)": 0.5, "move_to(table)": 0.5, "done": 0.0}, fallback=0.0
        )
        chosen = plan_next(command, trace, scorer, universe)
        assert chosen == parse_skill("grasp(apple)")


GOLDEN_STEP_TABLES = (
    {"move_to(kitchen_table)": 0.8},
    {"find_obj(apple)": 0.8},
    {"grasp(apple)": 0.8},
    {"move_to(operator)": 0.8},
    {"handover": 0.8},
    {"done": 0.8},
)


class TestPlanTask:
    def test_done_first_gives_single_step(self, golden_map):
        command = Command(raw="x", resolved="Bring me the apple")
        universe = ground_candidates(golden_map, command)
        trace = plan_task(command, TableScorer({"done": 1.0}), universe)
        assert [s.to_text() for s in trace.steps] == ["done"]

    def test_golden_six_step_plan(self, golden_map):
        command = Command(raw="Bring me the apple", resolved="Bring me the apple")
        universe = ground_candidates(golden_map, command)
        trace = plan_task(command, TableScorer(*GOLDEN_STEP_TABLES), universe)
        assert [s.to_text() for s in trace.steps] == [
            "move_to(kitchen_table)",
            "find_obj(apple)",
            "grasp(apple)",
            "move_to(operator)",
            "handover",
            "done",
        ]
        assert trace.completed()
        assert check_rule_compliance([(s.name, s.args) for s in trace.steps]) == []

    def test_never_done_hits_cap(self, golden_map):
        command = Command(raw="x", resolved="Bring me the apple")
        universe = ground_candidates(golden_map, command)
        scorer = TableScorer({"done": 0.0}, fallback=1.0)
        with pytest.raises(PlanTooLong):
            plan_task(command, scorer, universe)
        assert scorer.calls == 20

    def test_max_steps_validation(self, golden_map):
        command = Command(raw="x", resolved="x")
        universe = ground_candidates(golden_map, command)
        with pytest.raises(ValueError):
            plan_task(command, TableScorer({"done": 1.0}), universe, max_steps=0)

    def test_step_scores_normalized(self, golden_map):
        command = Command(raw="x", resolved="Bring me the apple")
        universe = ground_candidates(golden_map, command)
        trace = plan_task(command, TableScorer(*GOLDEN_STEP_TABLES), universe)
        assert len(trace.step_scores) == len(trace.steps)
        for distribution in trace.step_scores:
            assert abs(sum(distribution.values()) - 1.0) <= 1e-9

    def test_metadata_records_scorer(self, golden_map):
        command = Command(raw="x", resolved="x")
        universe = ground_candidates(golden_map, command)
        trace = plan_task(command, TableScorer({"done": 1.0}), universe)
        assert dict(trace.metadata) == {"scorer": "table"}

    def test_random_scorers_always_yield_admissible_traces(self, golden_map):
        rng = random.Random(99)
        command = Command(raw="x", resolved="Bring me the apple and the cup")
        universe = ground_candidates(golden_map, command)

        class RandomScorer:
            def score(self, request):
                return ScoreResponse(
                    {c: rng.uniform(0.01, 1.0) for c in request.candidates}
                )

        for _ in range(40):
            try:
                trace = plan_task(command, RandomScorer(), universe)
            except PlanTooLong:
                continue
            steps = [(s.name, s.args) for s in trace.steps]
            assert check_rule_compliance(steps) == [], steps
            assert trace.steps[-1].name == "done"
            assert "done" not in [s.name for s in trace.steps[:-1]]

    def test_scale_invariance(self, golden_map):
        rng = random.Random(31337)
        command = Command(raw="x", resolved="Bring me the apple")
        universe = ground_candidates(golden_map, command)
        for _ in range(100):
            table = {c.to_text(): rng.uniform(0.001, 5.0) for c in universe}
            k = rng.choice([1e-6, 0.013, 1.0, 42.0, 1e7])
            scaled = {text: value * k for text, value in table.items()}
            base_choice = plan_next(
                Command(raw="x", resolved=command.resolved),
                PlanTrace(),
                TableScorer(table),
                universe,
            )
            scaled_choice = plan_next(
                Command(raw="x", resolved=command.resolved),
                PlanTrace(),
                TableScorer(scaled),
                universe,
            )
            assert base_choice == scaled_choice
