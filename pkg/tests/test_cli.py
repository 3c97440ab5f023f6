import csv
import io
import json
from pathlib import Path

import jsonschema
import numpy as np
import pytest

from qfock import gram_naive
from qfock.cli import (
    EXIT_CHECK,
    EXIT_OK,
    EXIT_PARSE,
    EXIT_PRECONDITION,
    ConfigParseError,
    ConfigValidationError,
    main,
    parse_config,
)

SCHEMA = json.loads((Path(__file__).parent.parent / "docs" / "config.schema.json").read_text())

D17 = {"command": "fullness", "q": 0, "N": 4,
       "representation": {"fixed_dim": 17, "blocks": []},
       "C": 1, "d": 17, "constants_mode": {"user": [1, 1]}}


def _run(tmp_path, cmd, cfg, *extra):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(cfg) if not isinstance(cfg, str) else cfg)
    out = tmp_path / "out.txt"
    code = main([cmd, "--config", str(p), "--out", str(out), *extra])
    return code, (out.read_text() if out.exists() else None)


def test_parse_examples():
    cfg = parse_config(json.dumps(D17))
    assert cfg.representation.fixed_dim == 17 and cfg.constants == (1.0, 1.0)
    jsonschema.validate(D17, SCHEMA)
    with pytest.raises(ConfigValidationError, match=r"q must lie in \(-1,1\)"):
        parse_config('{"command": "norms", "q": 1.0, "N": 2}')
    with pytest.raises(ConfigValidationError, match="exceed 1"):
        parse_config('{"command": "norms", "q": 0, "N": 2, '
                     '"representation": {"blocks": [{"lambda": 0.5, "count": 1}]}}')


def test_unknown_keys_listed():
    with pytest.raises(ConfigValidationError, match="unknown config keys: bar, foo"):
        parse_config('{"command": "norms", "q": 0, "N": 2, "foo": 1, "bar": 2}')


def test_parse_errors():
    with pytest.raises(ConfigParseError):
        parse_config("{not json")
    with pytest.raises(ConfigParseError):
        parse_config("[1, 2]")


@pytest.mark.parametrize("bad", [
    {"command": "fullness", "q": 0, "N": 3},
    {"command": "norms", "q": 0, "N": 0},
    {"command": "norms", "q": 0, "N": 9},
    {"command": "norms", "q": 0, "N": 3, "representation": {"fixed_dim": 0}},
    {"command": "norms", "q": 0, "N": 3, "constants_mode": {"user": [1]}},
    {"command": "norms", "q": 0, "N": 3, "max_degree": 9},
    {"command": "nope", "q": 0, "N": 3},
])
def test_validation_rejects(bad):
    with pytest.raises(ConfigValidationError):
        parse_config(json.dumps(bad))


def test_size_cap_override():
    text = json.dumps({"command": "norms", "q": 0, "N": 9, "representation": {"fixed_dim": 1}})
    assert parse_config(text, force_large=True).N == 9


def test_schema_agrees_on_valid_configs():
    for cfg in (D17, {"command": "moments", "q": 0.5, "N": 4, "representation": {"fixed_dim": 1}}):
        jsonschema.validate(cfg, SCHEMA)
        parse_config(json.dumps(cfg))
    with pytest.raises(jsonschema.ValidationError):
        jsonschema.validate({"q": 1.0, "N": 2}, SCHEMA)


def test_exit_codes(tmp_path):
    assert _run(tmp_path, "norms", "{oops")[0] == EXIT_PARSE
    assert _run(tmp_path, "norms", {"command": "norms", "q": 1.0, "N": 2})[0] == EXIT_PRECONDITION
    code, _ = _run(tmp_path, "fullness", dict(D17, d=16, representation={"fixed_dim": 16}))
    assert code == EXIT_CHECK
    code, _ = _run(tmp_path, "fullness",
                   {"command": "fullness", "q": 0, "N": 3, "representation": {"blocks": [{"lambda": 9}]},
                    "C": 2, "d": 1})
    assert code == EXIT_PRECONDITION
    assert main(["norms", "--config", str(tmp_path / "missing.json")]) == EXIT_PARSE


def test_fullness_d17(tmp_path):
    code, text = _run(tmp_path, "fullness", D17)
    assert code == EXIT_OK
    rep = json.loads(text)
    cert = rep["results"]["certificate"]
    assert cert["margin"] == 15 and cert["inequality_holds"] is True
    assert cert["spectral_gap"] > 0
    assert rep["inputs"]["d"] == 17 and rep["seed"] == 0
    assert all("tolerance" in c for c in rep["checks"])


def test_moments_csv(tmp_path):
    cfg = {"command": "moments", "q": 0.5, "N": 4, "representation": {"fixed_dim": 1}}
    code, text = _run(tmp_path, "moments", cfg, "--format", "csv")
    assert code == EXIT_OK
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == ["order", "moment", "fock", "abs_diff", "tolerance", "pass"]
    fourth = next(r for r in rows[1:] if r[0] == "4")
    assert fourth[:2] == ["4", "2.5"]
    sixth = next(r for r in rows[1:] if r[0] == "6")
    assert float(sixth[1]) == pytest.approx(5 + 3 + 0.75 + 0.125)


def test_check_csv(tmp_path):
    code, text = _run(tmp_path, "fullness", D17, "--format", "csv")
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == ["name", "value", "bound", "tolerance", "pass"]
    assert rows[1][0] == "fullness_inequality" and rows[1][4] == "True"


def test_gram_report_and_dump(tmp_path):
    cfg = {"command": "gram", "q": 0, "N": 4, "representation": {"fixed_dim": 2},
           "q_grid": [-0.9, -0.5, 0, 0.5, 0.9]}
    dump = tmp_path / "dump"
    code, text = _run(tmp_path, "gram", cfg, "--dump-grams", str(dump))
    assert code == EXIT_OK
    table = json.loads(text)["results"]["gram_min_eigenvalues"]
    assert len(table) == 25 and all(r["min_eigenvalue"] > 0 for r in table)
    index = json.loads((dump / "index.json").read_text())
    entry = next(e for e in index if e["q"] == 0.5 and e["level"] == 3)
    G = np.fromfile(dump / entry["file"], dtype="<f8").reshape(entry["shape"])
    np.testing.assert_allclose(G, gram_naive(2, 3, 0.5), atol=1e-12)


@pytest.mark.parametrize("cmd", ["norms", "modular", "centralizer", "all"])
def test_suites_pass_and_deterministic(tmp_path, cmd):
    cfg = {"command": cmd, "q": 0.3, "N": 3,
           "representation": {"fixed_dim": 1, "blocks": [{"lambda": 2, "count": 1}]},
           "draws": 4, "seed": 7}
    code, a = _run(tmp_path, cmd, cfg)
    assert code == EXIT_OK, [c for c in json.loads(a)["checks"] if not c["pass"]]
    _, b = _run(tmp_path, cmd, cfg)
    ra, rb = json.loads(a), json.loads(b)
    ra.pop("timing"), rb.pop("timing")
    assert json.dumps(ra, sort_keys=True) == json.dumps(rb, sort_keys=True)


def test_seed_and_threads_recorded(tmp_path):
    cfg = {"command": "norms", "q": 0.3, "N": 3, "representation": {"fixed_dim": 1}, "draws": 2}
    _, text = _run(tmp_path, "norms", cfg, "--seed", "99", "--threads", "2")
    rep = json.loads(text)
    assert rep["seed"] == 99 and rep["threads"] == 2 and rep["inputs"]["seed"] == 99


def test_centralizer_results(tmp_path):
    cfg = {"command": "centralizer", "q": 0.2, "N": 3,
           "representation": {"blocks": [{"lambda": 2, "count": 1}]}, "max_degree": 2}
    code, text = _run(tmp_path, "centralizer", cfg)
    rep = json.loads(text)
    assert code == EXIT_OK
    assert rep["results"]["stable_monomials"] == ["1", "X1Y1", "Y1X1"]
    assert set(rep["results"]["stable_span"]) == {"rank", "weight_one_words", "levels"}
