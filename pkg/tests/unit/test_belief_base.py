"""Unit tests for the belief base service."""

import numpy as np
import pytest

from src.lib.asl_parser import parse_agent_program, parse_context, parse_term
from src.lib.terms import (
    Atom,
    EvaluationError,
    Number,
    Structure,
    Variable,
    add_annot,
    apply,
    source_annot,
    struct,
)
from src.services.belief_base import (
    BeliefBase,
    BeliefBaseError,
    ChangeKind,
    NonGroundBeliefError,
    ResolutionDepthError,
    UniquenessPattern,
)


SENSOR_PATTERNS = ["light(port,_)", "sound(port,_)", "obstacle(port,_)", "touching(port,_)"]


def percept(functor, port, value):
    return add_annot(struct(functor, port, value), source_annot("percept"))


@pytest.fixture
def sensor_base():
    return BeliefBase.from_pattern_texts([], SENSOR_PATTERNS)


@pytest.mark.unit
class TestUniquenessPattern:
    """Test uniqueness pattern parsing."""

    def test_key_positions(self):
        pattern = UniquenessPattern.parse("light(port,_)")

        assert pattern.functor == "light"
        assert pattern.arity == 2
        assert pattern.key_positions == frozenset({0})

    def test_pattern_needs_a_key(self):
        with pytest.raises(BeliefBaseError):
            UniquenessPattern.parse("light(_,_)")

    def test_pattern_needs_arguments(self):
        with pytest.raises(BeliefBaseError):
            UniquenessPattern.parse("light")

    def test_invalid_text(self):
        with pytest.raises(BeliefBaseError):
            UniquenessPattern.parse("light(port,")


@pytest.mark.unit
class TestAddBelief:
    """Test belief insertion and the changes it reports."""

    def test_fresh_belief(self, sensor_base):
        changes = sensor_base.add_belief(struct("count", 0))

        assert [c.kind for c in changes] == [ChangeKind.ADD]
        assert len(sensor_base) == 1

    def test_duplicate_merges_annotations(self, sensor_base):
        sensor_base.add_belief(struct("seen", 1))
        changes = sensor_base.add_belief(add_annot(struct("seen", 1), source_annot("finder")))

        assert changes == []
        assert sensor_base.beliefs[0].annots == (source_annot("finder"),)

    def test_uniqueness_replaces_same_port(self, sensor_base):
        sensor_base.add_belief(percept("light", 1, 500))
        changes = sensor_base.add_belief(percept("light", 1, 300))

        assert [c.kind for c in changes] == [ChangeKind.DELETE, ChangeKind.ADD]
        assert str(changes[0]) == "-light(1,500)[source(percept)]"
        assert sensor_base.snapshot() == ["light(1,300)[source(percept)]"]

    def test_different_ports_coexist(self, sensor_base):
        sensor_base.add_belief(percept("light", 1, 500))
        sensor_base.add_belief(percept("light", 2, 300))

        assert len(sensor_base) == 2

    def test_non_ground_rejected(self, sensor_base):
        with pytest.raises(NonGroundBeliefError):
            sensor_base.add_belief(struct("light", 1, "V"))

    def test_many_percepts_keep_one_belief_per_port(self, sensor_base):
        """A long random percept stream never leaves two beliefs for one port."""
        rng = np.random.default_rng(11)
        last = {}
        for _ in range(200):
            functor = ("light", "sound", "obstacle")[int(rng.integers(3))]
            port = int(rng.integers(1, 5))
            value = int(rng.integers(0, 1024))
            sensor_base.add_belief(percept(functor, port, value))
            last[(functor, port)] = value

            assert sensor_base.uniqueness_violations() == []

        assert len(sensor_base) == len(last)
        for (functor, port), value in last.items():
            assert struct(functor, port, value) in sensor_base

    def test_violations_reported_without_patterns(self):
        """A base without patterns accumulates percepts and reports nothing."""
        base = BeliefBase()
        base.add_belief(percept("light", 1, 500))
        base.add_belief(percept("light", 1, 300))

        assert len(base) == 2
        assert base.uniqueness_violations() == []


@pytest.mark.unit
class TestRemoveAndReplace:
    """Test removal, replacement and abolish."""

    def test_remove_binds_pattern(self, sensor_base):
        sensor_base.add_belief(struct("bars_passed", 2))
        removed = sensor_base.remove_belief(parse_term("bars_passed(N)"))

        assert removed is not None
        belief, s = removed
        assert belief == struct("bars_passed", 2)
        assert s["N"] == Number(2)
        assert len(sensor_base) == 0

    def test_remove_missing(self, sensor_base):
        assert sensor_base.remove_belief(struct("absent", 1)) is None

    def test_replace_reports_delete_then_add(self, sensor_base):
        sensor_base.add_belief(struct("goal", "search"))
        changes = sensor_base.replace_belief(struct("goal", "avoid"))

        assert [str(c) for c in changes] == ["-goal(search)", "+goal(avoid)"]
        assert sensor_base.snapshot() == ["goal(avoid)"]

    def test_replace_without_previous(self, sensor_base):
        changes = sensor_base.replace_belief(struct("last_color", "black"))

        assert [c.kind for c in changes] == [ChangeKind.ADD]

    def test_abolish(self, sensor_base):
        sensor_base.add_belief(percept("light", 1, 500))
        sensor_base.add_belief(percept("light", 2, 300))
        sensor_base.add_belief(struct("goal", "search"))

        assert sensor_base.abolish(parse_term("light(_,_)")) == 2
        assert sensor_base.snapshot() == ["goal(search)"]


@pytest.mark.unit
class TestQueries:
    """Test query answering through beliefs and rules."""

    @pytest.fixture
    def linefollower_base(self, asl_source):
        program = parse_agent_program(asl_source("linefollower"))
        return BeliefBase.from_pattern_texts(program.rules, SENSOR_PATTERNS)

    def test_context_on_line(self, linefollower_base):
        linefollower_base.add_belief(percept("light", 1, 500))
        linefollower_base.add_belief(percept("light", 2, 480))
        context = parse_context("light(S1, V1) & light(S2, V2) & distinct_sensors(S1, S2) & on_line(V1, V2)")

        answers = list(linefollower_base.query(context))

        assert answers
        assert {answers[0]["S1"], answers[0]["S2"]} == {Number(1), Number(2)}

    def test_context_turning(self, linefollower_base):
        linefollower_base.add_belief(percept("light", 1, 300))
        linefollower_base.add_belief(percept("light", 2, 480))

        assert linefollower_base.holds(parse_context("light(1, V1) & light(2, V2) & turning(V1,V2)"))
        assert not linefollower_base.holds(parse_context("light(1, V1) & light(2, V2) & turning(V2,V1)"))

    def test_negation(self, linefollower_base):
        assert linefollower_base.holds(parse_context("not light(_,_)"))
        linefollower_base.add_belief(percept("light", 1, 300))
        assert not linefollower_base.holds(parse_context("not light(_,_)"))

    def test_negation_over_unbound_variable(self, linefollower_base):
        with pytest.raises(EvaluationError):
            linefollower_base.holds(parse_context("not light(1, V)"))

    def test_annotation_filter(self, sensor_base):
        sensor_base.add_belief(add_annot(struct("obstacle_after", 2), source_annot("obstaclefinder")))

        assert sensor_base.holds(parse_context("obstacle_after(N)[source(obstaclefinder)]"))
        assert not sensor_base.holds(parse_context("obstacle_after(N)[source(percept)]"))

    def test_beliefs_before_rules(self):
        program = parse_agent_program("level(rule) :- true.")
        base = BeliefBase(program.rules)
        base.add_belief(struct("level", "fact"))

        answers = [s["L"] for s in base.query(parse_context("level(L)"))]

        assert answers == [Atom("fact"), Atom("rule")]

    def test_depth_cap(self):
        program = parse_agent_program("loop(X) :- loop(X).")
        base = BeliefBase(program.rules, max_depth=16)

        with pytest.raises(ResolutionDepthError):
            base.holds(parse_context("loop(1)"))

    def test_relation_in_rule_with_unbound_fails_loudly(self):
        program = parse_agent_program("on_bar(V) :- V < 350.")
        base = BeliefBase(program.rules)

        assert base.holds(parse_context("on_bar(200)"))
        assert not base.holds(parse_context("on_bar(400)"))
        with pytest.raises(EvaluationError):
            base.holds(parse_context("on_bar(V)"))

    def test_structure_equality_ignores_annotations(self, sensor_base):
        sensor_base.add_belief(percept("light", 1, 500))

        assert Structure("light", (Number(1), Number(500))) in sensor_base


def answer_values(answers, *names):
    return sorted(tuple(int(apply(Variable(name), s).value) for name in names) for s in answers)


@pytest.mark.unit
class TestQueriesAgainstEnumeration:
    """Compare query answers with a direct enumeration of random fact sets."""

    @pytest.fixture(params=[2, 13, 99])
    def facts(self, request):
        rng = np.random.default_rng(request.param)
        edges = {(int(a), int(b)) for a, b in rng.integers(0, 5, size=(12, 2))}
        marked = {int(v) for v in rng.integers(0, 5, size=3)}
        return edges, marked

    @pytest.fixture
    def base(self, facts):
        edges, marked = facts
        program = parse_agent_program("linked(X,Z) :- edge(X,Y) & edge(Y,Z).")
        base = BeliefBase(program.rules)
        for a, b in sorted(edges):
            base.add_belief(struct("edge", a, b))
        for v in sorted(marked):
            base.add_belief(struct("marked", v))
        return base

    def test_join_with_comparison(self, facts, base):
        edges, marked = facts
        expected = sorted((a, b) for a, b in edges if b in marked and a < b)

        answers = base.query(parse_context("edge(A,B) & marked(B) & A < B"))

        assert answer_values(answers, "A", "B") == expected

    def test_negation(self, facts, base):
        edges, marked = facts
        expected = sorted((a, b) for a, b in edges if a not in marked)

        answers = base.query(parse_context("edge(A,B) & not marked(A)"))

        assert answer_values(answers, "A", "B") == expected

    def test_rule_answers_once_per_derivation(self, facts, base):
        edges, _ = facts
        expected = sorted((a, c) for a, b in edges for b2, c in edges if b == b2)

        answers = base.query(parse_context("linked(A,C)"))

        assert answer_values(answers, "A", "C") == expected

    def test_bound_argument_restricts_answers(self, facts, base):
        edges, _ = facts
        expected = sorted((b,) for a, b in edges if a == 0)

        assert answer_values(base.query(parse_context("edge(0,B)")), "B") == expected
