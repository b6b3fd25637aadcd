import pytest

from gramconv.grammar import Grammar, n, p, seq, t
from gramconv.interchange import InterchangeError, deserialize, serialize

from gen import corpus


def test_roundtrip_fl_master_golden(fl_master, data_dir):
    committed = (data_dir / "fl_master.json").read_text(encoding="utf-8")
    assert deserialize(committed) == fl_master
    assert serialize(fl_master) == committed


def test_roundtrip_jaxb_golden(jaxb_model, data_dir):
    committed = (data_dir / "jaxb_model.json").read_text(encoding="utf-8")
    assert deserialize(committed) == jaxb_model
    assert serialize(jaxb_model) == committed


def test_roundtrip_empty_grammar():
    g = Grammar((), ())
    assert deserialize(serialize(g)) == g


def test_roundtrip_random_corpus():
    for g in corpus(23, 120):
        assert deserialize(serialize(g)) == g


def test_unknown_tag_is_reported_with_path_and_tag():
    doc = '{"roots": [], "productions": [{"label": null, "lhs": "a", ' \
          '"rhs": {"tag": "wat"}}]}'
    with pytest.raises(InterchangeError) as err:
        deserialize(doc)
    assert "wat" in str(err.value)
    assert "productions[0]" in str(err.value)


def test_malformed_json_reports_position():
    with pytest.raises(InterchangeError) as err:
        deserialize("{not json")
    assert "line 1" in str(err.value)


def test_missing_fields_are_reported():
    with pytest.raises(InterchangeError):
        deserialize('{"roots": []}')
    with pytest.raises(InterchangeError):
        deserialize('{"roots": [], "productions": [{"lhs": "a"}]}')


def test_deserialize_normalizes_degenerate_nesting():
    doc = '{"roots": [], "productions": [{"label": null, "lhs": "a", ' \
          '"rhs": {"tag": "seq", "parts": [{"tag": "n", "name": "b"}]}}]}'
    assert deserialize(doc) == Grammar((), (p("a", n("b")),))


def test_serialized_form_is_stable():
    g = Grammar((), (p("a", seq(t("x"), n("b"))),))
    assert serialize(g) == serialize(deserialize(serialize(g)))
