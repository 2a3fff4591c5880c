import csv
import json

import numpy as np
import pytest

from qprobe import cli, pathint
from qprobe.errors import StabilityError


def run(tmp_path, *argv, config=None, name="out"):
    args = list(argv) + ["--out", str(tmp_path / name)]
    if config is not None:
        path = tmp_path / f"{name}.json"
        path.write_text(config if isinstance(config, str) else json.dumps(config))
        args += ["--config", str(path)]
    return cli.main(args)


def read_csv(path):
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# qprobe 0.1.0")
    rows = list(csv.reader(lines[1:]))
    return rows[0], np.array(rows[1:], dtype=float)


def read_json(path):
    return json.loads(path.read_text())


# -- twoslit -------------------------------------------------------------------


def test_twoslit_default(tmp_path):
    assert run(tmp_path, "twoslit") == 0
    out = tmp_path / "out"
    header, a = read_csv(out / "twoslit_rule_A.csv")
    assert header == ["x", "intensity", "probability"] and a.shape == (2001, 3)
    s = read_json(out / "twoslit_summary.json")
    assert s["rules"]["B"]["visibility"] > 0.9
    assert s["center_ratio_B_over_A"] == pytest.approx(2.0, abs=1e-9)
    assert s["rules"]["B"]["peak_spacing"] == pytest.approx(s["predicted_fringe_spacing"], rel=0.02)


def test_twoslit_rule_a_only(tmp_path):
    assert run(tmp_path, "twoslit", "--rule", "A") == 0
    out = tmp_path / "out"
    assert not (out / "twoslit_rule_B.csv").exists()
    s = read_json(out / "twoslit_summary.json")
    assert s["rules"]["A"]["envelope_residual"] < 0.05
    assert s["rules"]["A"]["peak_spacing"] is None


def test_malformed_json_exits_2(tmp_path, capsys):
    assert run(tmp_path, "twoslit", config='{"schema_version": 1, "b": }') == 2
    err = capsys.readouterr().err
    assert "malformed JSON" in err and ":1:" in err


@pytest.mark.parametrize("config,needle", [
    ({"schema_version": 1, "bogus": 1}, "bogus"),
    ({"b": 1.0}, "schema_version"),
    ({"schema_version": 2}, "schema_version"),
    ({"schema_version": 1, "samples": 1}, "samples"),
    ([1, 2], "object"),
])
def test_invalid_config_exits_2(tmp_path, capsys, config, needle):
    assert run(tmp_path, "twoslit", config=config) == 2
    assert needle in capsys.readouterr().err


def test_invalid_geometry_exits_nonzero(tmp_path, capsys):
    code = run(tmp_path, "twoslit", config={"schema_version": 1, "L": [5, 100], "R": [5, 100]})
    assert code == 2 and "coincide" in capsys.readouterr().err


def test_usage_error_exits_2(tmp_path):
    with pytest.raises(SystemExit) as info:
        cli.main(["twoslit", "--format", "xml"])
    assert info.value.code == 2


def test_existing_output_is_not_overwritten(tmp_path, capsys):
    assert run(tmp_path, "esw") == 0
    before = (tmp_path / "out" / "esw_summary.json").read_bytes()
    assert run(tmp_path, "esw") == 2
    assert "already exist" in capsys.readouterr().err
    assert (tmp_path / "out" / "esw_summary.json").read_bytes() == before


# -- esw -------------------------------------------------------------------------


def test_esw_default(tmp_path):
    assert run(tmp_path, "esw") == 0
    s = read_json(tmp_path / "out" / "esw_summary.json")
    assert s["joint"] == pytest.approx({"L,lambda": 0.5, "R,rho": 0.5, "L,rho": 0, "R,lambda": 0}, abs=1e-12)
    assert s["agreement"] < 1e-9
    assert s["schmidt_coefficients"] == pytest.approx([2 ** -0.5] * 2)
    header, curves = read_csv(tmp_path / "out" / "esw_curves.csv")
    assert header == ["x", "esw", "rule_a", "rule_b"]
    assert np.abs(curves[:, 1] - curves[:, 2]).max() < 1e-9 * curves[:, 2].max()


def test_seed_does_not_change_deterministic_output(tmp_path):
    assert cli.main(["esw", "--out", str(tmp_path / "a")]) == 0
    assert cli.main(["esw", "--out", str(tmp_path / "b"), "--seed", "99"]) == 0
    for name in ("esw_curves.csv", "esw_summary.json"):
        a = (tmp_path / "a" / name).read_text().splitlines()
        b = (tmp_path / "b" / name).read_text().splitlines()
        assert a != b  # the header records the seed
        if name.endswith(".csv"):
            assert a[1:] == b[1:]
        else:
            ja, jb = json.loads("\n".join(a)), json.loads("\n".join(b))
            ja.pop("_header"), jb.pop("_header")
            assert ja == jb


def test_identical_runs_are_byte_identical(tmp_path):
    for name in ("a", "b"):
        assert cli.main(["twoslit", "--out", str(tmp_path / name), "--plot"]) == 0
    for f in ("twoslit_rule_A.csv", "twoslit_rule_B.csv", "twoslit_summary.json", "twoslit.png"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_json_format(tmp_path):
    assert run(tmp_path, "esw", "--format", "json") == 0
    files = sorted(p.name for p in (tmp_path / "out").iterdir())
    assert files == ["esw.json"]
    doc = read_json(tmp_path / "out" / "esw.json")
    assert doc["_header"].startswith("qprobe 0.1.0 esw")
    assert len(doc["curves"]["x"]) == 2001


# -- evolve ----------------------------------------------------------------------


def test_evolve_rabi_default(tmp_path):
    assert run(tmp_path, "evolve") == 0
    header, p = read_csv(tmp_path / "out" / "evolve_probabilities.csv")
    assert header == ["t", "p_0", "p_1"]
    assert np.abs(p[:, 1] - np.cos(p[:, 0] / 2) ** 2).max() < 1e-12
    header, traj = read_csv(tmp_path / "out" / "evolve_trajectory.csv")
    assert header == ["t", "re_0", "im_0", "re_1", "im_1"]


def test_evolve_zero_hamiltonian(tmp_path):
    cfg = {"schema_version": 1, "initial": [0.6, [0, 0.8]],
           "schedule": [{"duration": 3.0, "matrix": [[0, 0], [0, 0]]}], "samples_per_segment": 5}
    assert run(tmp_path, "evolve", config=cfg) == 0
    _, p = read_csv(tmp_path / "out" / "evolve_probabilities.csv")
    assert np.allclose(p[:, 1], 0.36) and np.allclose(p[:, 2], 0.64)


def test_evolve_two_segments_match_compose(tmp_path):
    from qprobe.dynamics import compose, propagator

    h1 = [[1, [0, -0.5]], [[0, 0.5], -1]]
    h2 = [[0.3, 1], [1, 0.2]]
    cfg = {"schema_version": 1, "initial": [1, 0],
           "schedule": [{"duration": 0.7, "matrix": h1}, {"duration": 1.2, "matrix": h2}]}
    assert run(tmp_path, "evolve", config=cfg) == 0
    s = read_json(tmp_path / "out" / "evolve_summary.json")
    m1 = np.array([[1, -0.5j], [0.5j, -1]])
    m2 = np.array([[0.3, 1], [1, 0.2]])
    expected = compose(propagator(m2, 1.2), propagator(m1, 0.7)).matrix
    got = np.array(s["propagator"])[..., 0] + 1j * np.array(s["propagator"])[..., 1]
    assert np.abs(got - expected).max() < 1e-12


def test_evolve_hbar_rescales_time(tmp_path):
    assert run(tmp_path, "evolve", "--hbar", "2", name="h2") == 0
    _, p = read_csv(tmp_path / "h2" / "evolve_probabilities.csv")
    assert np.abs(p[:, 1] - np.cos(p[:, 0] / 4) ** 2).max() < 1e-12


def test_evolve_rejects_non_self_adjoint(tmp_path, capsys):
    cfg = {"schema_version": 1, "schedule": [{"duration": 1, "matrix": [[0, 1], [0, 0]]}]}
    assert run(tmp_path, "evolve", config=cfg) == 2
    assert "self-adjoint" in capsys.readouterr().err


# -- pathint ---------------------------------------------------------------------


def test_pathint_default(tmp_path):
    assert run(tmp_path, "pathint") == 0
    out = tmp_path / "out"
    s = read_json(out / "pathint_summary.json")
    assert s["l2_distance"] < 1e-3
    assert s["reference"]["norm_drift"] < 1e-10
    header, d = read_csv(out / "pathint_kernel_density.csv")
    assert header == ["t", "x", "|psi|^2"] and d.shape == (11 * 512, 3)
    header, n = read_csv(out / "pathint_reference_norm.csv")
    assert header == ["t", "norm"] and n.shape == (1001, 2)


def test_pathint_stability_growth(tmp_path):
    assert run(tmp_path, "pathint", "--stability", "0.1,1.0") == 0
    _, s = read_csv(tmp_path / "out" / "pathint_stability.csv")
    assert np.abs(s[:, 1] / np.exp(0.1 * s[:, 0]) - 1).max() < 0.02
    assert s[-1, 1] > s[0, 1]


def test_pathint_dt_refinement(tmp_path):
    base = {"schema_version": 1, "dt": 2e-3, "steps": 500}
    fine = {"schema_version": 1, "dt": 1e-3, "steps": 1000}
    assert run(tmp_path, "pathint", config=base, name="coarse") == 0
    assert run(tmp_path, "pathint", config=fine, name="fine") == 0
    d0 = read_json(tmp_path / "coarse" / "pathint_summary.json")["l2_distance"]
    d1 = read_json(tmp_path / "fine" / "pathint_summary.json")["l2_distance"]
    assert d1 < d0


def test_pathint_stability_abort_exits_1(tmp_path, capsys, monkeypatch):
    def boom(*a, **k):
        raise StabilityError("norm drift 0.05 after 3 steps")

    monkeypatch.setattr(pathint, "propagate", boom)
    assert run(tmp_path, "pathint") == 1
    assert "stability abort" in capsys.readouterr().err


def test_pathint_bad_stability_flag():
    with pytest.raises(SystemExit) as info:
        cli.main(["pathint", "--stability", "0.1"])
    assert info.value.code == 2


# -- check -----------------------------------------------------------------------


def test_check_default_passes(tmp_path, capsys):
    assert run(tmp_path, "check", "--format", "json") == 0
    rep = read_json(tmp_path / "out" / "check_report.json")
    assert rep["passed"] and len(rep["suites"]) == 7
    assert "PASS rule_b_born" in capsys.readouterr().out


def test_check_injected_fault_and_replay(tmp_path, capsys):
    assert run(tmp_path, "check", "--inject-fault") == 1
    case = tmp_path / "out" / "check_failing_case.json"
    assert read_json(case)["suite"] == "rule_b_born"
    capsys.readouterr()
    assert cli.main(["check", "--replay", str(case)]) == 1
    assert json.loads(capsys.readouterr().out)["passed"] is False


def test_check_unknown_suite(tmp_path, capsys):
    assert run(tmp_path, "check", config={"schema_version": 1, "suites": ["nope"]}) == 2


def test_check_subset_of_suites(tmp_path):
    assert run(tmp_path, "check", config={"schema_version": 1, "suites": ["schmidt"]}) == 0
    lines = (tmp_path / "out" / "check_report.csv").read_text().splitlines()
    assert lines[1] == "suite,cases,tolerance,max_deviation,passed"
    assert len(lines) == 3 and lines[2].startswith("schmidt,200,")


# -- figures ---------------------------------------------------------------------


@pytest.mark.parametrize("command,figures", [
    ("twoslit", ["twoslit.png"]),
    ("esw", ["esw.png"]),
    ("evolve", ["evolve.png"]),
])
def test_plot_writes_png(tmp_path, command, figures):
    assert run(tmp_path, command, "--plot") == 0
    for f in figures:
        assert (tmp_path / "out" / f).read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_no_png_without_plot(tmp_path):
    assert run(tmp_path, "evolve") == 0
    assert not list((tmp_path / "out").glob("*.png"))
