import json
import subprocess
import sys

import numpy as np
import pytest

from liegeo.catalog import example5, remark_metric, standard_algebras
from liegeo.cli import ProblemError, dumps, main, parse_problem, problem_to_dict
from liegeo.metric import random_inner_product

CATALOG = standard_algebras()


def write(tmp_path, name, doc):
    p = tmp_path / name
    p.write_text(doc if isinstance(doc, str) else json.dumps(doc))
    return str(p)


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def files(tmp_path):
    out = {k: write(tmp_path, f"{k}.json", problem_to_dict(a)) for k, a in CATALOG.items()}
    out["remark_gram"] = write(tmp_path, "gram.json", {"gram": remark_metric(0.5).gram.tolist()})
    return out


def test_check_example5(capsys, files):
    code, out, _ = run(capsys, "check", files["example5"], "--json")
    rep = json.loads(out)
    assert code == 0
    assert rep["unimodular"] and rep["solvable"] and not rep["nilpotent"]
    assert rep["derived_dim"] == 4 and rep["center_dim"] == 0


def test_check_abelian(capsys, files):
    code, out, _ = run(capsys, "check", files["abelian_3"], "--json")
    rep = json.loads(out)
    assert code == 0 and rep["derived_dim"] == 0 and rep["center_dim"] == 3 and rep["nilpotent"]


def test_check_human_table(capsys, files):
    code, out, _ = run(capsys, "check", files["example5"])
    assert code == 0 and "unimodular" in out and "True" in out


def test_check_jacobi_failure(capsys, tmp_path):
    doc = problem_to_dict(example5())
    for b in doc["brackets"]:
        if (b["i"], b["j"]) == (1, 4):
            b["coeffs"] = {"4": -2.0}
    code, out, _ = run(capsys, "check", write(tmp_path, "bad.json", doc), "--json")
    assert code == 2 and json.loads(out)["is_lie_algebra"] is False


@pytest.mark.parametrize("doc, field", [
    ({"dim": 5, "brackets": [{"i": 7, "j": 1, "coeffs": {}}]}, "brackets[0].i"),
    ({"dim": 3, "brackets": [{"i": 1, "j": 2, "coeffs": {"4": 1}}]}, "coeffs key"),
    ({"dim": 3, "brackets": [{"i": 1, "j": 2, "coeffs": {"3": "x"}}]}, "coeffs[3]"),
    ({"dim": 3, "brackets": [{"i": 1, "j": 2, "coeffs": {}}, {"i": 2, "j": 1, "coeffs": {}}]},
     "given twice"),
    ({"dim": 3, "brackets": [{"i": 1, "j": 1, "coeffs": {}}]}, "always zero"),
    ({"dim": 3, "brackets": [{"i": 1, "coeffs": {}}]}, "missing field j"),
    ({"dim": 0}, "dim"),
    ({"dim": 2, "gram": [[1, 2], [2, 1]]}, "positive definite"),
    ({"dim": 2, "gram": [[1, 0]]}, "gram"),
    ({"dim": 2, "extra": 1}, "unknown field"),
])
def test_validation_errors(capsys, tmp_path, doc, field):
    code, _, err = run(capsys, "check", write(tmp_path, "bad.json", doc))
    assert code == 1
    assert field in err


def test_json_syntax_error_reports_line(capsys, tmp_path):
    code, _, err = run(capsys, "check", write(tmp_path, "bad.json", '{"dim": 3,\n "brackets": [,]}'))
    assert code == 1 and "bad.json:2:" in err


def test_missing_file(capsys, tmp_path):
    code, _, err = run(capsys, "check", str(tmp_path / "nope.json"))
    assert code == 1 and "cannot read" in err


def test_basis_heisenberg_derived(capsys, files):
    code, out, _ = run(capsys, "basis", files["heisenberg_derived"], "--json")
    rep = json.loads(out)
    assert code == 0 and rep["path"] == "dim4/derived_dim3_heisenberg"
    assert rep["verdict"] == "orthonormal_geodesic"


def test_basis_example5_has_no_construction(capsys, files):
    code, out, _ = run(capsys, "basis", files["example5"])
    assert code == 3 and "no implemented construction" in out


def test_basis_h2_nilpotent(capsys, files):
    code, out, _ = run(capsys, "basis", files["heisenberg_5"], "--json")
    assert code == 0 and json.loads(out)["path"] == "nilpotent"


def test_basis_paths(capsys, files, tmp_path):
    code, out, _ = run(capsys, "basis", files["milnor_sl2"], "--json")
    assert code == 0 and json.loads(out)["path"] == "dim3/milnor"
    act = {"dim": 5, "brackets": [{"i": 1, "j": 2, "coeffs": {"2": 1.0}},
                                  {"i": 1, "j": 3, "coeffs": {"3": 2.0}},
                                  {"i": 1, "j": 4, "coeffs": {"4": -1.0, "5": 1.0}},
                                  {"i": 1, "j": 5, "coeffs": {"5": -2.0}}]}
    code, out, _ = run(capsys, "basis", write(tmp_path, "semi.json", act), "--json")
    assert code == 0 and json.loads(out)["path"] == "codim1_abelian"
    nonuni = {"dim": 2, "brackets": [{"i": 1, "j": 2, "coeffs": {"2": 1.0}}]}
    code, out, _ = run(capsys, "basis", write(tmp_path, "aff.json", nonuni))
    assert code == 3 and "not unimodular" in out


def test_basis_with_gram_override(capsys, files, tmp_path):
    gram = write(tmp_path, "g.json", [[2.0, 0.3, 0.0, 0.0], [0.3, 1.0, 0.1, 0.0],
                                      [0.0, 0.1, 1.5, 0.2], [0.0, 0.0, 0.2, 0.7]])
    code, out, _ = run(capsys, "basis", files["r_x_so3"], "--gram", gram, "--json")
    rep = json.loads(out)
    assert code == 0 and rep["verdict"] == "orthonormal_geodesic"
    assert rep["path"] == "dim4/not_solvable"


def test_geodesics(capsys, files):
    code, out, _ = run(capsys, "geodesics", files["example5"], "--json")
    assert code == 0 and json.loads(out)["span_rank"] == 4
    code, out, _ = run(capsys, "geodesics", files["abelian_3"], "--json", "--starts", "20")
    assert json.loads(out)["span_rank"] == 3
    code, out, _ = run(capsys, "geodesics", files["example5"], "--gram", files["remark_gram"],
                       "--json")
    assert json.loads(out)["span_rank"] == 5


def test_counterexample_epsilon(capsys):
    code, out, _ = run(capsys, "counterexample", "--epsilon", "0.5", "--json")
    rep = json.loads(out)
    assert code == 0
    assert rep["certificate"]["conclusion"] is True
    assert rep["quartic"]["coefficients"] == [-0.5, -2.125, 1.75, 4.5, 2.0]
    assert rep["spanning_geodesics"]["span_rank"] == 5


def test_counterexample_random(capsys):
    code, out, _ = run(capsys, "counterexample", "--random", "8", "--seed", "7", "--json")
    rep = json.loads(out)
    assert code == 0 and rep["n_true"] == 8


def test_counterexample_bad_epsilon(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["counterexample", "--epsilon", "1.5"])
    assert exc.value.code == 1
    assert "epsilon" in capsys.readouterr().err


def test_counterexample_gram(capsys, files):
    code, out, _ = run(capsys, "counterexample", "--gram", files["remark_gram"], "--json")
    assert code == 0 and json.loads(out)["certificate"]["conclusion"]


def test_export(capsys):
    code, out, _ = run(capsys, "export")
    assert code == 0 and "example5" in out
    code, out, _ = run(capsys, "export", "example5")
    alg, _ = parse_problem(json.loads(out))
    assert np.array_equal(alg.c, example5().c)
    code, _, err = run(capsys, "export", "nope")
    assert code == 1


@pytest.mark.parametrize("name", sorted(CATALOG))
def test_round_trip_is_bit_exact(name):
    alg = CATALOG[name]
    doc = json.loads(dumps(problem_to_dict(alg)))
    back, _ = parse_problem(doc)
    assert back.c.tobytes() == alg.c.tobytes()


def test_round_trip_irrational_constants():
    rng = np.random.default_rng(1)
    q = np.linalg.qr(rng.standard_normal((4, 4)))[0]
    alg = CATALOG["heisenberg_derived"].in_basis(q, lambda v: q.T @ v)
    metric = random_inner_product(4, rng)
    back, back_metric = parse_problem(json.loads(dumps(problem_to_dict(alg, metric))))
    assert back.c.tobytes() == alg.c.tobytes()
    assert back_metric.gram.tobytes() == metric.gram.tobytes()


@pytest.mark.parametrize("argv", [
    ["check", "{example5}", "--json"],
    ["basis", "{heisenberg_derived}", "--json"],
    ["geodesics", "{example5}", "--json", "--seed", "3"],
    ["counterexample", "--epsilon", "0.25", "--json"],
])
def test_output_is_byte_identical(capsys, files, argv):
    argv = [a.format(**files) for a in argv]
    main(argv)
    first = capsys.readouterr().out
    main(argv)
    assert capsys.readouterr().out == first


def test_module_entry_point(files):
    res = subprocess.run([sys.executable, "-m", "liegeo", "check", files["heisenberg_3"], "--json"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0 and json.loads(res.stdout)["center_dim"] == 1


def test_problem_error_is_value_error():
    with pytest.raises(ProblemError):
        parse_problem([])
