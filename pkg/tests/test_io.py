import json
import struct

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from specmono import io
from specmono.errors import ValidationError
from specmono.models import SIS, PredatorPrey, SingleSpecies

MINIMAL = {
    "schema_version": "1",
    "network": {"n": 2, "edges": [[1, 2, 1], [2, 1, 0.5]]},
    "q": [1, 2],
}


def parse(doc):
    return io.parse_problem(json.loads(json.dumps(doc)))


def test_minimal_round_trip():
    prob = parse(MINIMAL)
    np.testing.assert_array_equal(prob.network.a, [[-0.5, 1], [0.5, -1]])
    assert io.dump_problem(prob) == MINIMAL
    assert io.dump_problem(parse(io.dump_problem(prob))) == MINIMAL


@pytest.mark.parametrize("model", [
    {"variant": "single", "mu": 1, "growth": "logistic", "r": [1, 1], "K": [2, 3]},
    {"variant": "single", "mu": 0.5, "growth": ["logistic", "linear"], "r": [1, 1],
     "K": [2, 3], "p": [1, -1]},
    {"variant": "predprey", "r": [1, 1], "K": [1, 1], "c": [2, 1], "d": [1, 3], "mu_u": 1,
     "mu_v": 3, "response": "lotka"},
    {"variant": "predprey", "r": [1, 1], "K": [1, 1], "c": [2, 1], "d": [1, 3], "mu_u": 1,
     "mu_v": 3, "response": "monod", "half": [1, 2],
     "predator_network": {"n": 2, "edges": [[1, 2, 3], [2, 1, 1]]}},
    {"variant": "competition", "p": [2, 1], "mu_u": 0.5, "mu_v": 1},
    {"variant": "sis", "beta": [4, 1], "gamma": [1, 1], "mu_S": 1, "mu_I": 1, "N": 100},
])
def test_model_round_trip(model):
    doc = {"schema_version": "1", "network": MINIMAL["network"], "model": model}
    prob = parse(doc)
    assert io.dump_problem(prob) == doc


def test_model_types():
    doc = dict(MINIMAL, model={"variant": "sis", "beta": [4, 1], "gamma": [1, 1], "mu_S": 1,
                               "mu_I": 1})
    prob = parse(doc)
    assert isinstance(prob.model, SIS) and prob.model.N == 1.0


def test_leak_reaches_single_model():
    doc = {"schema_version": "1",
           "network": {"n": 2, "edges": [[1, 2, 1], [2, 1, 1]], "leak": [0.5, 0]},
           "model": {"variant": "single", "mu": 1, "growth": "linear", "p": [1, 1]}}
    prob = parse(doc)
    assert isinstance(prob.model, SingleSpecies)
    np.testing.assert_array_equal(prob.model.eps, [0.5, 0])


@pytest.mark.parametrize("patch, field", [
    ({"network": {"n": 2, "edges": [[1, 2, -1]]}}, "network.edges[0][2]"),
    ({"network": {"n": 2, "edges": [[1, 3, 1]]}}, "network.edges[0]"),
    ({"network": {"n": 2, "edges": [[1, 1, 1]]}}, "network.edges[0]"),
    ({"network": {"n": 2, "edges": [[1, 2, 1], [1, 2, 2]]}}, "network.edges[1]"),
    ({"network": {"n": 2, "edges": [[1, 2, "x"]]}}, "network.edges[0][2]"),
    ({"network": {"n": 2, "edges": [], "color": 1}}, "network"),
    ({"q": [1]}, "q"),
    ({"schema_version": "2"}, "schema_version"),
    ({"extra": 1}, "document"),
    ({"analysis": {"steps": 1.5}}, "analysis.steps"),
    ({"model": {"variant": "sis", "beta": [1, 1]}}, "model.gamma"),
    ({"model": {"variant": "zombie"}}, "model.variant"),
    ({"model": {"variant": "sis", "beta": [1, 1], "gamma": [0, 1], "mu_S": 1, "mu_I": 1}},
     "model.gamma"),
])
def test_rejections_carry_field_path(patch, field):
    doc = dict(MINIMAL, **patch)
    with pytest.raises(ValidationError) as exc:
        parse(doc)
    assert exc.value.field == field


def test_syntax_error_location(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{"schema_version": "1",\n  "q": [1, 2,]\n}', encoding="utf-8")
    with pytest.raises(ValidationError, match="line 2"):
        io.load_problem(p)


def test_non_standard_constants_rejected(tmp_path):
    p = tmp_path / "nan.json"
    p.write_text('{"schema_version": "1", "network": {"n": 1, "edges": []}, "q": [NaN]}')
    with pytest.raises(ValidationError, match="NaN"):
        io.load_problem(p)


def test_duplicate_keys_rejected(tmp_path):
    p = tmp_path / "dup.json"
    p.write_text('{"schema_version": "1", "schema_version": "1"}')
    with pytest.raises(ValidationError, match="duplicate"):
        io.load_problem(p)


def test_missing_file_is_os_error(tmp_path):
    with pytest.raises(OSError):
        io.load_problem(tmp_path / "nope.json")


def test_csv_format(tmp_path):
    out = tmp_path / "x.csv"
    io.write_csv([(0.1, 2.0), (1e-300, -3.5)], out, ("mu", "s"))
    assert out.read_bytes() == b"mu,s\n0.10000000000000001,2\n1e-300,-3.5\n"


def _bits(x):
    return struct.pack("<d", x)


def test_csv_round_trip_random_doubles():
    rng = np.random.default_rng(99)
    vals = np.concatenate([rng.normal(size=500) * 10.0 ** rng.integers(-300, 300, 500),
                           rng.random(500)])
    text = io.csv_text(["x"], ([v] for v in vals))
    back = [float(line) for line in text.splitlines()[1:]]
    assert all(_bits(a) == _bits(b) for a, b in zip(vals, back))


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_format_float_is_exact(x):
    assert _bits(float(io.format_float(x))) == _bits(x)
