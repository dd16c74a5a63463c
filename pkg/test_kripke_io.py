# test_kripke_io.py
"""
Tests for the Kripke text format
"""

import pytest

from conftest import random_corpus
from errors import ModelFormatError, TotalityError
from kripke_io import dump_kripke_text, load_kripke, parse_kripke_text, save_kripke


def test_fixture_fig5a(fig5a):
    assert fig5a.states == ("t1", "t2", "t3", "t4", "u1", "u2", "u3")
    assert fig5a.props == ("p",)
    assert fig5a.init == "t1"
    assert fig5a.successors[fig5a.state_index("u1")] == (1, 5)


def test_comments_and_blank_lines():
    text = """
    # leading comment

    kripke   # header
    state a p q   # two props
    state b
    edge a b
    edge b a
    """
    kripke = parse_kripke_text(text)
    assert kripke.props == ("p", "q")
    assert kripke.labels[0] == frozenset({"p", "q"})
    assert kripke.init is None


def test_duplicate_edges_are_idempotent():
    kripke = parse_kripke_text("kripke\nstate a\nstate b\nedge a b b\nedge a b\nedge b a\n")
    assert kripke.successors == ((1,), (0,))


@pytest.mark.parametrize(
    "text, line, fragment",
    [
        ("state a\n", 1, "first line must be 'kripke'"),
        ("kripke\nnode a\n", 2, "unknown keyword 'node'"),
        ("kripke\nstate a\nstate a\n", 3, "duplicate state 'a'"),
        ("kripke\nstate a\nedge a z\n", 3, "unknown state 'z'"),
        ("kripke\nstate a\nedge a a\ninit a\ninit a\n", 5, "init given twice"),
        ("kripke\nstate a\nedge a\n", 3, "needs a source"),
        ("kripke\nstate a-b\n", 2, "invalid name 'a-b'"),
    ],
)
def test_format_errors_carry_line(text, line, fragment):
    with pytest.raises(ModelFormatError) as info:
        parse_kripke_text(text)
    assert info.value.line == line
    assert fragment in str(info.value)


def test_missing_header_and_states():
    with pytest.raises(ModelFormatError):
        parse_kripke_text("# only a comment\n")
    with pytest.raises(ModelFormatError, match="no states"):
        parse_kripke_text("kripke\n")


def test_dead_end_rejected(data_dir):
    with pytest.raises(TotalityError) as info:
        load_kripke(data_dir / "deadend.kripke")
    assert info.value.states == ["b"]
    assert "totality violation" in str(info.value)


def test_dead_end_repaired(data_dir):
    kripke = load_kripke(data_dir / "deadend.kripke", complete_selfloops=True)
    b = kripke.state_index("b")
    assert kripke.successors[b] == (b,)


def test_dump_reparses_to_same_structure(tmp_path):
    for kripke in random_corpus(25, 6, seed=21):
        path = tmp_path / "k.kripke"
        save_kripke(kripke, path, comments=["generated"])
        back = load_kripke(path)
        assert back.states == kripke.states
        assert back.labels == kripke.labels
        assert back.successors == kripke.successors
        assert back.props == kripke.props
        assert back.init == kripke.init


def test_dump_layout(two_cycle):
    text = dump_kripke_text(two_cycle, comments=["demo"])
    assert text == "# demo\nkripke\nstate a q\nstate b\nedge a b\nedge b a\n"


def test_unused_proposition_survives_dump():
    kripke = parse_kripke_text("kripke\nprops p q\nstate a q\nedge a a\n")
    assert kripke.props == ("p", "q")
    text = dump_kripke_text(kripke)
    assert text == "kripke\nprops p q\nstate a q\nedge a a\n"
    assert parse_kripke_text(text).props == ("p", "q")


def test_props_line_keeps_declaration_order():
    kripke = parse_kripke_text("kripke\nstate a q\nprops p\nedge a a\n")
    assert kripke.props == ("q", "p")
    assert parse_kripke_text(dump_kripke_text(kripke)).props == ("q", "p")


def test_invalid_utf8_is_a_format_error(tmp_path):
    path = tmp_path / "bad.kripke"
    path.write_bytes(b"kripke\nstate a \xff\xfe\n")
    with pytest.raises(ModelFormatError, match="not valid UTF-8"):
        load_kripke(path)
