import numpy as np
import pytest

from cvfock.errors import SchemaError
from cvfock.metrics import fidelity
from cvfock.specs import parse_state
from cvfock.states import (make_cat, make_coherent, make_epr, make_fock, make_squeezed_vacuum,
                           make_superposition, make_thermal)


@pytest.mark.parametrize("text, expected", [
    ("fock:3", make_fock(3, 3)),
    ("coherent:0.7", make_coherent(0.7)),
    ("coherent:0.5+0.5j", make_coherent(0.5 + 0.5j)),
    ("squeezed:0.3", make_squeezed_vacuum(0.3)),
    ("squeezed:0.3,1.0", make_squeezed_vacuum(0.3, 1.0)),
    ("cat:1.5,odd", make_cat(1.5, np.pi)),
    ("cat:1.5,even", make_cat(1.5, 0.0)),
    ("cat:1.5", make_cat(1.5, 0.0)),
    ("thermal:0.4", make_thermal(0.4)),
    ("superposition:1,0,1.4142135623730951", make_superposition([1, 0, np.sqrt(2)])),
])
def test_text_forms(text, expected):
    st = parse_state(text)
    assert st.cutoffs == expected.cutoffs
    assert fidelity(st, expected) == pytest.approx(1.0, abs=1e-12)


def test_epr_is_two_mode():
    st = parse_state("epr:0.4", cutoff=15)
    assert st.n_modes == 2
    assert fidelity(st, make_epr(0.4, 15)) == pytest.approx(1.0, abs=1e-12)


def test_case_and_whitespace_tolerated():
    assert fidelity(parse_state(" Fock: 2 "), make_fock(2, 2)) == pytest.approx(1.0)


def test_cutoff_argument_applies():
    assert parse_state("fock:1", cutoff=6).cutoffs == (6,)
    assert parse_state("vacuum", cutoff=4).cutoffs == (4,)
    assert parse_state("superposition:1,1", cutoff=5).cutoffs == (5,)
    assert parse_state("coherent:0.3", cutoff=9).cutoffs == (9,)


def test_dict_form_matches_text_form():
    a = parse_state({"kind": "cat", "alpha": 1.2, "theta": "odd"}, cutoff=20)
    b = parse_state("cat:1.2,odd", cutoff=20)
    assert fidelity(a, b) == pytest.approx(1.0, abs=1e-12)
    c = parse_state({"kind": "cat", "alpha": 1.2, "theta": np.pi}, cutoff=20)
    assert fidelity(a, c) == pytest.approx(1.0, abs=1e-12)


def test_file_form_round_trip(tmp_path):
    st = make_cat(0.9, np.pi / 2)
    path = tmp_path / "s.json"
    path.write_text(st.to_json())
    back = parse_state({"file": str(path)})
    np.testing.assert_allclose(back.data, st.data, atol=1e-15)


def test_state_array_passes_through():
    st = make_fock(1, 3)
    assert parse_state(st) is st


@pytest.mark.parametrize("bad", [
    "banana:1", "fock:1,2", "fock:x", "squeezed:0.3j", {"kind": "fock"}, {"kind": "zebra"}, 42,
])
def test_schema_errors(bad):
    with pytest.raises(SchemaError):
        parse_state(bad)


def test_missing_file(tmp_path):
    with pytest.raises(SchemaError):
        parse_state({"file": str(tmp_path / "none.json")})
