import json

import numpy as np
import pytest

from icek.exceptions import ParseError
from icek.extension import williams_nmeasurable
from icek.fileformat import (
    parse_certificate,
    parse_gamble,
    parse_model,
    verify_certificate,
    write_certificate,
    write_gamble,
    write_model,
)
from icek.sampling import random_model, random_ngamble
from icek.witness import lp_witness_search

DEMO = """{
 "schema": "icek/1",
 "states": ["a", "b"],
 "initial": [[1, 0]],
 "dynamics": {"stationary": {"a": [[0.5, 0.5]], "b": [[0, 1]]}}
}"""


def test_hand_written_demo_model():
    m = parse_model(DEMO)
    f = parse_gamble('{"schema": "icek/1", "n": 2, "values": [0, 1, 0, 1]}', m)
    assert williams_nmeasurable(m, f) == pytest.approx(0.5, abs=1e-15)


@pytest.mark.parametrize("kind", ["stationary", "time_varying", "general"])
def test_model_round_trip(rng, kind):
    for _ in range(5):
        m = random_model(rng, int(rng.integers(1, 4)), kind)
        text = write_model(m)
        assert parse_model(text) == m
        assert write_model(parse_model(text)) == text


def test_gamble_round_trip_and_size(rng):
    m = random_model(rng, 3)
    f = random_ngamble(rng, 3, 2)
    assert parse_gamble(write_gamble(f), m) == f
    doc = json.loads(write_gamble(f))
    doc["values"] = doc["values"][:-1]
    with pytest.raises(ParseError, match="size mismatch"):
        parse_gamble(json.dumps(doc), m)


def test_certificate_round_trip(rng):
    m = random_model(rng, 2)
    f = random_ngamble(rng, 2, 3)
    cert = lp_witness_search(m, f, 3)
    text = write_certificate(cert)
    back = parse_certificate(text, 2)
    assert back.alpha == cert.alpha and back.horizon == cert.horizon
    assert back.selection == cert.selection
    assert verify_certificate(m, f, text)
    doc = json.loads(text)
    doc["alpha"] += 0.1
    assert not verify_certificate(m, f, json.dumps(doc))


def test_normalizes_rows_within_load_tolerance(caplog):
    text = DEMO.replace("[[0.5, 0.5]]", "[[0.5, 0.5000000001]]")
    m = parse_model(text)
    assert m.operators[0].per_state[0].extremes.sum() == pytest.approx(1.0, abs=1e-15)
    assert "normalizing" in caplog.text


@pytest.mark.parametrize(
    "text, where",
    [
        ("{not json", "line 1"),
        ('{"schema": "other/2"}', "schema"),
        (DEMO.replace('"initial": [[1, 0]]', '"initial": [[1, 0, 0]]'), "initial[0]"),
        (DEMO.replace("[[0.5, 0.5]]", "[[0.5, 0.6]]"), "dynamics.stationary.a[0]"),
        (DEMO.replace('"b": [[0, 1]]', '"c": [[0, 1]]'), "dynamics.stationary"),
        (DEMO.replace('"stationary"', '"markov"'), "dynamics"),
    ],
)
def test_parse_errors_locate_problem(text, where):
    with pytest.raises(ParseError, match=where.replace("[", r"\[").replace("]", r"\]")):
        parse_model(text)


def test_general_situation_keys():
    text = json.dumps(
        {
            "schema": "icek/1",
            "states": ["a", "b"],
            "initial": [[0.5, 0.5]],
            "dynamics": {"general": {"default": [[1, 0]], "a.b": [[0, 1]]}},
        }
    )
    m = parse_model(text)
    assert list(m.local_models) == [(0, 1)]
    bad = text.replace('"a.b"', '"a.z"')
    with pytest.raises(ParseError, match="unknown state 'z'"):
        parse_model(bad)


def test_float_rendering_round_trips_bitwise(rng):
    vals = rng.normal(size=50) * 10.0 ** rng.integers(-300, 300, size=50)
    doc = json.loads(json.dumps(vals.tolist()))
    assert np.array_equal(np.array(doc), vals)
