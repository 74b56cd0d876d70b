import json

import pytest

from icek.cli import main
from icek.fileformat import write_gamble, write_model
from icek.sampling import random_model, random_ngamble
from icek.tree import NGamble

from conftest import demo_chain


@pytest.fixture
def files(tmp_path):
    def put(name, text):
        p = tmp_path / name
        p.write_text(text)
        return str(p)

    return put


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_nmeas_constant(capsys, files, rng):
    m = random_model(rng, 3)
    mp = files("m.json", write_model(m))
    gp = files("g.json", write_gamble(NGamble.constant(3, 1.25, 2)))
    code, out, _ = run(capsys, "nmeas", mp, gp, "--format", "json")
    assert code == 0
    assert json.loads(out) == {"lower": 1.25, "upper": 1.25}


def test_witness_search_and_tampered_verify(capsys, files, rng, tmp_path):
    m = random_model(rng, 2)
    mp = files("m.json", write_model(m))
    gp = files("g.json", write_gamble(random_ngamble(rng, 2, 3)))
    cp = str(tmp_path / "c.json")
    assert run(capsys, "witness", "search", mp, gp, "-o", cp)[0] == 0
    code, out, _ = run(capsys, "witness", "verify", mp, gp, cp)
    assert code == 0 and out.startswith("valid alpha")
    doc = json.loads(open(cp).read())
    doc["alpha"] += 0.1
    bad = files("bad.json", json.dumps(doc))
    code, out, _ = run(capsys, "witness", "verify", mp, gp, bad)
    assert code == 1
    assert "domination violated on path" in out and out.rstrip().endswith("invalid")


def test_reach_vacuous(capsys, files):
    from icek.chain import ChainModel, LowerTransitionOperator
    from icek.credal import make_vacuous

    K = make_vacuous(2)
    m = ChainModel.stationary(["a", "b"], K, LowerTransitionOperator([K, K]))
    mp = files("m.json", write_model(m))
    code, out, _ = run(capsys, "reach", mp, "--set", "b", "--format", "json")
    doc = json.loads(out)
    assert code == 0 and doc["value"] == 0.0 and doc["converged"] is True


def test_reach_text_and_oracle(capsys, files):
    mp = files("m.json", write_model(demo_chain()))
    code, out, _ = run(capsys, "reach", mp, "--set", "b", "--tol", "1e-9")
    assert code == 0 and "converged true" in out and "direction non-decreasing" in out
    code, out, _ = run(capsys, "oracle", "precise", mp, "--set", "b", "--mode", "reach")
    assert code == 0 and float(out.split()[1]) == pytest.approx(1.0)
    code, out, _ = run(capsys, "safety", mp, "--set", "a", "--format", "json")
    doc = json.loads(out)
    assert doc["vvs_only"] is True and doc["value"] < 1e-5


def test_gap_search(capsys, files):
    mp = files("m.json", write_model(demo_chain()))
    code, out, _ = run(capsys, "gap-search", mp, "--set", "a,b", "--trials", "2", "--horizons", "1,2,4")
    assert code == 0 and "gaps 0 of 2" in out


def test_error_exit_codes(capsys, files, tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2
    code, _, err = run(capsys, "nmeas", str(tmp_path / "missing.json"), "x")
    assert code == 2 and "cannot read" in err
    mp = files("m.json", write_model(demo_chain()))
    code, _, err = run(capsys, "reach", mp, "--set", "zz")
    assert code == 2 and "zz" in err
