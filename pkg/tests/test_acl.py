"""Condition language: parsing, evaluation against an oracle, retrieval gating."""

from __future__ import annotations

import random

import pytest

from agoranet.acl import (
    And,
    Atom,
    FalseCond,
    Not,
    Or,
    TrueCond,
    eval_condition,
    parse_condition,
    render_condition,
)
from agoranet.errors import ConditionParseError
from agoranet.kb import kb_query, make_item
from tests.conftest import oracle_eval, random_attrs, random_condition


class TestParse:
    def test_or_of_atoms(self):
        cond = parse_condition('role == "hr_manager" or division == "hr"')
        assert cond == Or((Atom("role", "==", "hr_manager"),
                           Atom("division", "==", "hr")))

    def test_literals(self):
        assert parse_condition("true") == TrueCond()
        assert parse_condition("false") == FalseCond()

    def test_in_list(self):
        cond = parse_condition('division in ["hr", "recruiting"]')
        assert cond == Atom("division", "in", ("hr", "recruiting"))

    def test_precedence(self):
        cond = parse_condition('a == "1" or b == "2" and not c == "3"')
        assert isinstance(cond, Or)
        assert isinstance(cond.children[1], And)
        assert isinstance(cond.children[1].children[1], Not)

    def test_missing_value_position(self):
        with pytest.raises(ConditionParseError) as exc:
            parse_condition("role ==")
        assert exc.value.position == len("role ==")

    def test_empty_rejected(self):
        with pytest.raises(ConditionParseError):
            parse_condition("   ")

    def test_dangling_token(self):
        with pytest.raises(ConditionParseError):
            parse_condition('a == "1" banana')


class TestEval:
    def test_or_with_one_attr(self):
        cond = parse_condition('role == "hr_manager" or division == "hr"')
        assert eval_condition(cond, {"role": "hr_manager"}) is True
        assert eval_condition(cond, {"division": "hr"}) is True
        assert eval_condition(cond, {"division": "it"}) is False

    def test_not_true(self):
        assert eval_condition(Not(TrueCond()), {}) is False
        assert eval_condition(Not(TrueCond()), {"division": "hr"}) is False

    def test_missing_attribute_denies(self):
        assert eval_condition(Atom("division", "==", "hr"), {}) is False
        # != also denies on a missing attribute: deny-by-default
        assert eval_condition(Atom("division", "!=", "hr"), {}) is False

    def test_truth_table_small(self):
        """Exhaustive check against the independent oracle, <= 4 attributes."""
        rng = random.Random(99)
        values = [None, "v0", "v1"]
        for _ in range(100):
            cond = random_condition(rng)
            for role in values:
                for division in values:
                    attrs = {}
                    if role:
                        attrs["role"] = role
                    if division:
                        attrs["division"] = division
                    assert eval_condition(cond, attrs) == oracle_eval(cond, attrs)

    def test_fuzz_matches_oracle(self):
        rng = random.Random(12345)
        for _ in range(2000):
            cond = random_condition(rng)
            attrs = random_attrs(rng)
            assert eval_condition(cond, attrs) == oracle_eval(cond, attrs)

    def test_monotone_for_negation_free(self):
        """Adding attributes never shrinks access, absent Not nodes."""

        def negation_free(rng):
            cond = random_condition(rng)
            while _has_not(cond):
                cond = random_condition(rng)
            return cond

        rng = random.Random(777)
        for _ in range(500):
            cond = negation_free(rng)
            attrs = random_attrs(rng)
            extra = dict(attrs)
            for name in ("role", "division", "dept", "region"):
                if name not in extra and rng.random() < 0.5:
                    extra[name] = rng.choice(["v0", "v1", "v2", "v3"])
            if eval_condition(cond, attrs):
                assert eval_condition(cond, extra)


def _has_not(cond) -> bool:
    if isinstance(cond, Not):
        return True
    if isinstance(cond, (And, Or)):
        return any(_has_not(c) for c in cond.children)
    return False


class TestRender:
    def test_round_trip_examples(self):
        for text in (
            "true",
            'role == "hr_manager" or division == "hr"',
            'not (a == "1" and b in ["x", "y"]) or c != "z"',
        ):
            cond = parse_condition(text)
            assert parse_condition(render_condition(cond)) == cond

    def test_round_trip_generated(self):
        rng = random.Random(55)
        for _ in range(500):
            cond = random_condition(rng)
            assert parse_condition(render_condition(cond)) == cond


class TestKbQuery:
    @pytest.fixture
    def items(self):
        return [
            make_item("hr-001", "hr-domain",
                      "The standard salary range for this position is generous.",
                      'division == "hr"'),
            make_item("hr-002", "hr-domain",
                      "Benefits include vouchers and insurance.",
                      'division == "hr"'),
            make_item("pub-01", "hr-domain",
                      "The cafeteria menu changes every week.",
                      "true"),
        ]

    def test_accessible_ranked_first(self, items):
        results = kb_query(items, "standard salary range", {"division": "hr"}, 4)
        assert results[0][0].id == "hr-001"
        assert results[0][1] == 1.0

    def test_denied_items_reported(self, items):
        denied = []
        results = kb_query(items, "standard salary range", {}, 4,
                           on_denied=denied.append)
        assert results == []
        assert [i.id for i in denied] == ["hr-001"]

    def test_no_overlap_no_denial(self, items):
        denied = []
        results = kb_query(items, "totally unrelated words", {}, 4,
                           on_denied=denied.append)
        assert results == []
        assert denied == []

    def test_limit_and_tiebreak(self, items):
        results = kb_query(items, "salary benefits insurance vouchers",
                           {"division": "hr"}, 1)
        assert len(results) == 1
        assert results[0][0].id == "hr-002"

    def test_least_privilege_fuzz(self):
        """Returned items always satisfy their condition under the attrs."""
        rng = random.Random(31337)
        vocab = "alpha beta gamma delta epsilon zeta".split()
        for _ in range(300):
            items = []
            for i in range(rng.randint(1, 8)):
                text = " ".join(rng.choice(vocab) for _ in range(rng.randint(1, 6)))
                cond = render_condition(random_condition(rng))
                items.append(make_item(f"k{i:02d}", "d", text, cond))
            attrs = random_attrs(rng)
            query = " ".join(rng.choice(vocab) for _ in range(rng.randint(1, 4)))
            for item, score in kb_query(items, query, attrs, 5):
                assert eval_condition(item.condition, attrs)
                assert 0.0 < score <= 1.0
