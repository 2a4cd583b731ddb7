import json
from fractions import Fraction

import pytest

from cylsos import cli, demos
from cylsos.bounds import BoundReport, compute_polya_N
from cylsos.errors import HypothesisRejected, ParseError
from cylsos.pipeline import bound_report, certify, load_problem, problem_from_dict
from cylsos.polyring import parse_poly

P = parse_poly


def _kv(text):
    return dict(line.split("=", 1) for line in text.splitlines() if "=" in line and not line.startswith("#"))


def _run(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture(scope="module")
def desk_result():
    return certify(demos.desk_problem())


def test_desk_certify_result(desk_result):
    assert desk_result.verification.ok
    assert desk_result.verification.residual.is_zero()
    assert desk_result.f_min == Fraction(17, 128)
    assert desk_result.report.N == 4


def test_unit_box_problem_lifts_back():
    gens = ["x + 1/2", "1/2 - x"]
    prob = problem_from_dict({"n": 1, "frame": "unit-box", "f": "y^2 + x*y + 2", "generators": gens})
    res = certify(prob)
    assert res.certificate.generators == tuple(P(g, 1) for g in gens)
    assert res.certificate.f == prob.f
    assert res.verification.ok


def test_univariate_route():
    prob = problem_from_dict({"f": "y^4 - y^2 + 1", "generators": ["x - 1/4", "3/4 - x"], "n": 1, "frame": "simplex"})
    res = certify(prob)
    assert res.certificate.meta["route"] == "univariate"
    assert res.report is None and res.verification.ok
    assert bound_report(prob)["route"] == "univariate"


def test_counterexample_raises_with_witness():
    with pytest.raises(HypothesisRejected) as info:
        certify(demos.counterexample_problem())
    assert info.value.kind == "not-fully-m-ic"
    assert info.value.witness == (1,)


def test_bound_report_on_desk():
    rep = bound_report(demos.desk_problem())
    assert isinstance(rep, BoundReport)
    assert (rep.lam, rep.k) == (768, 23130)
    assert rep.N >= 0 and rep.ell == 2 * rep.k + 1
    assert rep.extras["h_norm_source"] == "a-priori-bound"
    back = BoundReport.from_text(rep.to_text())
    assert (back.lam, back.k, back.ell, back.c9) == (rep.lam, rep.k, rep.ell, rep.c9)
    # huge entries are printed rounded upward
    for name in ("N", "h_norm_bound", "n_plus_ell_bound", "term_bound_polya"):
        assert getattr(back, name) >= getattr(rep, name)


def test_polya_exponent_vanishes_for_linear_h():
    assert compute_polya_N(2, 1, Fraction(100), Fraction(1, 100)) == 0


def test_problem_yaml_round_trip(tmp_path):
    prob = problem_from_dict(dict(demos.DESK, f_min="17/128", loja=["1", "2"], caps={"max_N": 40}))
    path = tmp_path / "desk.yaml"
    path.write_text(prob.dumps())
    back = load_problem(path)
    assert (back.f, back.generators, back.f_min, back.frame) == (prob.f, prob.generators, prob.f_min, prob.frame)
    assert (back.loja.c1, back.loja.c2, back.caps.max_N) == (1, 2, 40)


@pytest.mark.parametrize(
    "data",
    [
        {"f": "x*y^2 + 1"},
        {"f": "x*y^2 + 1", "generators": ["x"], "frame": "ball"},
        {"f": 0.5, "generators": ["x"]},
        {"f": "x*y^2 + 1", "generators": ["x"], "f_min": 0.25},
        ["not", "a", "mapping"],
    ],
)
def test_malformed_problem_data(data):
    with pytest.raises(ParseError):
        problem_from_dict(data)


# ---- CLI -------------------------------------------------------------------------------


def test_cli_demo_desk(tmp_path, capsys):
    code, out, _ = _run(["demo", "desk", "-o", str(tmp_path)], capsys)
    assert code == 0
    kv = _kv(out)
    assert kv["residual_zero"] == "true"
    assert (kv["lambda"], kv["k"], kv["N"], kv["ell"]) == ("1", "1", "4", "2")
    for name in ("landscape.png", "schedule.png", "polya_coefficients.png", "bounds.png", "certificate.json"):
        assert (tmp_path / name).stat().st_size > 0


def test_cli_demo_counterexample(tmp_path, capsys):
    code, _, err = _run(["demo", "counterexample", "-o", str(tmp_path), "--no-figures"], capsys)
    assert code == 2
    assert "not fully 2-ic" in err
    assert "witness=(1)" in err


def test_cli_demo_archimedean_and_polya(tmp_path, capsys):
    code, out, _ = _run(["demo", "archimedean", "-o", str(tmp_path / "a")], capsys)
    assert code == 0 and "residual=0" in out
    code, out, _ = _run(["demo", "polya-minimal", "-o", str(tmp_path / "p")], capsys)
    assert code == 0
    assert "minimal_N=3" in out
    assert "N=3 coefficients=1,2,1,1,2,1 positive=true" in out


def test_cli_verify_accepts_and_rejects(tmp_path, capsys):
    assert _run(["demo", "desk", "-o", str(tmp_path), "--no-figures"], capsys)[0] == 0
    (tmp_path / "f.txt").write_text("x*y^2 + 1\n")
    (tmp_path / "g.txt").write_text("# generators\nx - 1/4\n3/4 - x\n")
    cert = tmp_path / "certificate.json"
    code, out, _ = _run(["verify", str(tmp_path / "f.txt"), str(tmp_path / "g.txt"), str(cert)], capsys)
    assert code == 0 and _kv(out)["residual"] == "0"

    data = json.loads(cert.read_text())
    data["sigmas"][0][0]["weight"] = str(Fraction(data["sigmas"][0][0]["weight"]) + 1)
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(data))
    code, out, _ = _run(["verify", str(tmp_path / "f.txt"), str(tmp_path / "g.txt"), str(bad)], capsys)
    assert code == 4
    assert _kv(out)["identity_ok"] == "false"


def test_cli_certify_problem_file(tmp_path, capsys):
    path = tmp_path / "box.yaml"
    path.write_text("f: y^2 + x*y + 2\ngenerators: [x + 1/2, 1/2 - x]\nn: 1\n")
    code, out, _ = _run(["certify", str(path), "-o", str(tmp_path / "out"), "--no-figures"], capsys)
    assert code == 0
    assert _kv(out)["frame"] == "unit-box"
    assert (tmp_path / "out" / "problem.yaml").exists()


def test_cli_bounds(tmp_path, capsys):
    path = tmp_path / "desk.yaml"
    path.write_text(demos.desk_problem().dumps())
    code, out, _ = _run(["bounds", str(path), "-o", str(tmp_path / "b")], capsys)
    assert code == 0
    assert _kv(out)["k"] == "23130"
    assert (tmp_path / "b" / "bounds.png").exists()


def test_cli_exit_codes(tmp_path, capsys):
    bad_poly = tmp_path / "bad.yaml"
    bad_poly.write_text("f: x*y^^2 + 1\ngenerators: [x]\n")
    assert _run(["certify", str(bad_poly), "--no-figures", "-o", str(tmp_path)], capsys)[0] == 1
    assert _run(["certify", str(tmp_path / "missing.yaml")], capsys)[0] == 1

    odd = tmp_path / "odd.yaml"
    odd.write_text("f: y^3 + 1\ngenerators: [x - 1/4, 3/4 - x]\nframe: simplex\n")
    assert _run(["certify", str(odd), "--no-figures", "-o", str(tmp_path)], capsys)[0] == 2

    desk = tmp_path / "desk.yaml"
    desk.write_text(demos.desk_problem().dumps())
    code, _, err = _run(
        ["certify", str(desk), "--max-N", "1", "--max-k", "0", "--max-lambda", "1", "--no-figures", "-o", str(tmp_path)],
        capsys,
    )
    assert code == 3 and "budget exhausted" in err

    with pytest.raises(SystemExit):
        cli.main(["certify", str(desk), "--f-min", "0.1.2"])
