import random

import pytest
from hypothesis import given, settings, strategies as st

from conftest import OBJ_5X_4Y, X_LE_6, X_PLUS_Y_LE_10
from generators import random_formulation
from lpwp.errors import IRSyntaxError, LpwpError, UnknownDirectionError
from lpwp.ir import (
    ConstraintDecl,
    Direction,
    LinExpr,
    ObjectiveDecl,
    ProblemFormulation,
    Relation,
    VarOrderMap,
    format_number,
    load_lexicon,
    normalize_direction_phrase,
    parse_ir,
    parse_ir_collection,
    parse_lexicon,
    parse_numeral,
    serialize_ir,
    serialize_ir_collection,
    split_ir_collection,
)


def test_parse_objective_example():
    f = parse_ir(OBJ_5X_4Y)
    assert f.objective.direction is Direction.MAXIMIZE
    assert f.objective.name == "profit"
    assert f.objective.expr.terms == {"x": 5.0, "y": 4.0}
    assert f.constraints == []
    assert f.vars.names == ("x", "y")


def test_parse_constraint_example():
    f = parse_ir(OBJ_5X_4Y + "\n" + X_LE_6)
    (c,) = f.constraints
    assert c.relation is Relation.LE
    assert c.lhs == LinExpr(0.0, {"x": 1.0})
    assert c.rhs == LinExpr(6.0, {})


def test_fixture_file(fixture1_ir):
    f = parse_ir(fixture1_ir)
    assert [c.relation for c in f.constraints] == [Relation.LE, Relation.LE]
    assert f.constraints[0].lhs.terms == {"x": 1.0, "y": 1.0}
    assert f.constraints[0].rhs.constant == 10.0


def test_lexicon_resolves_direction_without_norm():
    text = OBJ_5X_4Y + "<DECLARATION><VAR>y</VAR> <CONST_DIR>no less than</CONST_DIR> <LIMIT>2</LIMIT></DECLARATION>"
    assert parse_ir(text).constraints[0].relation is Relation.GE


def test_norm_attribute_overrides_lexicon():
    text = OBJ_5X_4Y + '<DECLARATION><VAR>y</VAR> <CONST_DIR norm="GE">zorp</CONST_DIR> <LIMIT>2</LIMIT></DECLARATION>'
    assert parse_ir(text).constraints[0].relation is Relation.GE


def test_ratio_constraint_with_percent_params():
    text = OBJ_5X_4Y + (
        "<DECLARATION><VAR>x</VAR> <CONST_DIR>at least</CONST_DIR> <PARAM>30%</PARAM> [TIMES] <VAR>x</VAR>"
        " [PLUS] <PARAM>30%</PARAM> [TIMES] <VAR>y</VAR></DECLARATION>"
    )
    (c,) = parse_ir(text).constraints
    assert c.rhs.terms == {"x": 0.3, "y": 0.3}
    assert c.rhs.constant == 0.0


def test_leading_minus_and_constant_terms():
    text = OBJ_5X_4Y + (
        "<DECLARATION>[MINUS] <VAR>x</VAR> [PLUS] <PARAM>3</PARAM> <CONST_DIR>at most</CONST_DIR>"
        " <VAR>y</VAR> <LIMIT>-2</LIMIT></DECLARATION>"
    )
    (c,) = parse_ir(text).constraints
    assert c.lhs == LinExpr(3.0, {"x": -1.0})
    assert c.rhs == LinExpr(-2.0, {"y": 1.0})


def test_vars_header_sets_order():
    text = "<VARS><VAR>y</VAR> <VAR>z</VAR> <VAR>x</VAR></VARS>\n" + OBJ_5X_4Y
    assert parse_ir(text).vars.names == ("y", "z", "x")


def test_html_entities_in_names():
    text = ('<DECLARATION><OBJ_DIR>minimize</OBJ_DIR> <OBJ_NAME>cost</OBJ_NAME> [IS] '
            '<VAR>trucks &amp; vans</VAR></DECLARATION>')
    assert parse_ir(text).objective.expr.terms == {"trucks & vans": 1.0}


def _error(text):
    with pytest.raises(IRSyntaxError) as err:
        parse_ir(text)
    return err.value


def test_multiple_objectives_positioned():
    err = _error(OBJ_5X_4Y + "\n" + OBJ_5X_4Y)
    assert "multiple objectives" in str(err)
    assert (err.line, err.column) == (2, 1)


def test_no_objective():
    assert "no objective" in str(_error(X_LE_6))


def test_unknown_tag_positioned():
    err = _error(OBJ_5X_4Y + "\n<DECLARATION><VARIABLE>x</VARIABLE></DECLARATION>")
    assert "unknown tag <VARIABLE>" in str(err)
    assert (err.line, err.column) == (2, 14)
    assert str(err).startswith("line 2, column 14:")


def test_unbalanced_tag():
    assert "unbalanced" in str(_error("<DECLARATION><VAR>x</VAR>"))
    assert "unbalanced" in str(_error(OBJ_5X_4Y + "</DECLARATION>"))


def test_unknown_direction_phrase():
    err = _error(OBJ_5X_4Y + "<DECLARATION><VAR>x</VAR> <CONST_DIR>frobnicates</CONST_DIR> <LIMIT>1</LIMIT></DECLARATION>")
    assert "frobnicates" in str(err)


def test_unknown_keyword():
    assert "unknown keyword" in str(_error("<DECLARATION>[DIVIDE]</DECLARATION>"))


def test_objective_with_relation_phrase_is_rejected():
    text = '<DECLARATION><OBJ_DIR>at most</OBJ_DIR> [IS] <VAR>x</VAR></DECLARATION>'
    assert "maps to LE" in str(_error(text))


def test_constant_only_constraint_is_rejected():
    text = OBJ_5X_4Y + "<DECLARATION><PARAM>3</PARAM> <CONST_DIR>at most</CONST_DIR> <LIMIT>4</LIMIT></DECLARATION>"
    assert "two constants" in str(_error(text))


def test_vars_header_must_cover_mentions():
    text = "<VARS><VAR>x</VAR></VARS>" + OBJ_5X_4Y
    assert "'y' not listed" in str(_error(text))


def test_first_line_offset_shifts_positions():
    with pytest.raises(IRSyntaxError) as err:
        parse_ir("<BOGUS>", first_line=40)
    assert err.value.line == 40


# --- lexicon -----------------------------------------------------------------

@pytest.mark.parametrize(
    "phrase, expected",
    [
        ("at most", Relation.LE),
        ("at least", Relation.GE),
        ("maximize", Direction.MAXIMIZE),
        ("  At   MOST ", Relation.LE),
        ("exactly", Relation.EQ),
        ("minimise", Direction.MINIMIZE),
    ],
)
def test_normalize_direction_phrase(phrase, expected):
    assert normalize_direction_phrase(phrase) is expected


def test_unknown_direction_carries_phrase():
    with pytest.raises(UnknownDirectionError) as err:
        normalize_direction_phrase("frobnicates")
    assert err.value.phrase == "frobnicates"
    assert "unknown direction 'frobnicates'" in str(err.value)


def test_lexicon_env_override(tmp_path, monkeypatch):
    path = tmp_path / "lex.txt"
    path.write_text("# custom\ntops out at = LE\ngo big = max\n")
    monkeypatch.setenv("LPWP_LEXICON", str(path))
    assert normalize_direction_phrase("tops out at") is Relation.LE
    assert normalize_direction_phrase("Go Big") is Direction.MAXIMIZE
    with pytest.raises(UnknownDirectionError):
        normalize_direction_phrase("at most")
    monkeypatch.delenv("LPWP_LEXICON")
    assert normalize_direction_phrase("at most") is Relation.LE


def test_lexicon_missing_file(tmp_path):
    with pytest.raises(LpwpError, match="cannot read lexicon"):
        load_lexicon(tmp_path / "nope.txt")


def test_lexicon_bad_line():
    with pytest.raises(LpwpError, match="line 2"):
        parse_lexicon("at most = LE\nwhatever\n")
    with pytest.raises(LpwpError):
        parse_lexicon("at most = LT\n")


# --- numerals ----------------------------------------------------------------

@pytest.mark.parametrize(
    "text, value",
    [("5", 5.0), ("-2.5", -2.5), ("30%", 0.3), ("3,000", 3000.0), ("$1.5", 1.5),
     ("1e-7", 1e-7), ("-$20", -20.0), (".5", 0.5), ("12.", 12.0)],
)
def test_parse_numeral(text, value):
    assert parse_numeral(text) == value


@pytest.mark.parametrize("text", ["", "abc", "1,00", "5 kg", "--1", "1.2.3"])
def test_parse_numeral_rejects(text):
    with pytest.raises(ValueError):
        parse_numeral(text)


@pytest.mark.parametrize(
    "value, text",
    [(5.0, "5"), (-0.0, "0"), (0.1, "0.1"), (2.5e20, "2.5e+20"), (-3.25e-12, "-3.25e-12"), (1e16, "1e+16")],
)
def test_format_number(value, text):
    assert format_number(value) == text


@settings(max_examples=300)
@given(st.floats(allow_nan=False, allow_infinity=False))
def test_format_number_round_trips(v):
    assert parse_numeral(format_number(v)) == v


# --- serializer --------------------------------------------------------------

def _single_constraint(coeff):
    obj = ObjectiveDecl(Direction.MAXIMIZE, "profit", LinExpr(0.0, {"x": 5.0, "y": 4.0}))
    con = ConstraintDecl(LinExpr(0.0, {"x": 1.0, "y": coeff}), Relation.LE, LinExpr(10.0))
    return ProblemFormulation(obj, [con], VarOrderMap(["x", "y"]))


def test_single_constraint_gives_two_declarations():
    out = serialize_ir(_single_constraint(1.0))
    assert out.count("<DECLARATION>") == 2
    assert out.count("</DECLARATION>") == 2
    assert "<VARS>" not in out


def test_minus_one_coefficient():
    out = serialize_ir(_single_constraint(-1.0))
    assert "[MINUS] <PARAM>1</PARAM> [TIMES] <VAR>y</VAR>" in out


def test_vars_header_only_when_needed():
    f = _single_constraint(1.0)
    f.vars = VarOrderMap(["y", "x"])
    # terms are written in variable order, so reordering alone needs no header
    assert "<VARS>" not in serialize_ir(f)
    assert parse_ir(serialize_ir(f)) == f
    f.vars = VarOrderMap(["y", "spare", "x"])
    out = serialize_ir(f)
    assert out.startswith("<VARS><VAR>y</VAR> <VAR>spare</VAR> <VAR>x</VAR></VARS>\n")
    assert parse_ir(out) == f


def test_fixture_round_trip(fixture1_ir):
    f = parse_ir(fixture1_ir)
    assert parse_ir(serialize_ir(f)) == f


@settings(max_examples=300, deadline=None)
@given(st.randoms(use_true_random=False))
def test_round_trip_property(rng):
    f = random_formulation(rng)
    text = serialize_ir(f)
    assert parse_ir(text) == f
    # serializer output is a fixed point
    assert serialize_ir(parse_ir(text)) == text


# --- collections -------------------------------------------------------------

def test_collection_round_trip():
    rng = random.Random(11)
    problems = {f"p{i}": random_formulation(rng) for i in range(5)}
    text = serialize_ir_collection(problems)
    assert parse_ir_collection(text) == problems


def test_collection_without_headers():
    assert split_ir_collection(OBJ_5X_4Y) == [("", OBJ_5X_4Y, 1)]


def test_collection_error_line_numbers_are_file_relative():
    text = f"### a\n{OBJ_5X_4Y}\n### b\n{OBJ_5X_4Y}\n<NOPE>\n"
    with pytest.raises(IRSyntaxError) as err:
        parse_ir_collection(text)
    assert err.value.line == 5


def test_collection_rejects_duplicates_and_preamble():
    with pytest.raises(IRSyntaxError, match="duplicate"):
        split_ir_collection("### a\n\n### a\n")
    with pytest.raises(IRSyntaxError, match="before the first"):
        split_ir_collection("junk\n### a\n")
