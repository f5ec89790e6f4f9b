import csv

import pytest

from bdflow import cns, diagnostics, pme
from bdflow.cli import main

PME_CFG = """\
[run]
command = pme
[law]
alpha = 2
[grid]
n = 128
a = -6
b = 6
[time]
t_end = 2
snapshot_times = 1, 1.2, 1.4, 1.6, 1.8, 2
"""

CNS_CFG = """\
[run]
command = cns
[law]
alpha = 2
[grid]
n = 64
a = -5
b = 5
[time]
t_end = 1.05
snapshot_times = 1.05
[pressure]
eps = 0.1
"""


def header(path):
    with open(path) as fh:
        return tuple(next(csv.reader(fh)))


def test_exponents(capsys):
    assert main(["exponents", "--alpha", "2", "--dim", "3", "--p", "2", "--theta", "2", "--gamma", "3"]) == 0
    out = capsys.readouterr().out
    assert "gamma1 = 3/5" in out and "beta = 1/5" in out and "sigma = 2/5" in out
    assert "time_exp(2) = 3/10" in out
    assert "rho 1, u 1, x 0" in out


def test_exponents_infinite_p(capsys):
    assert main(["exponents", "--alpha", "2", "--dim", "1", "--p", "inf"]) == 0
    assert "time_exp(inf) = 1/3, mass_exp(inf) = 2/3" in capsys.readouterr().out


def test_exponents_extinction_is_error(capsys):
    assert main(["exponents", "--alpha", "0.2", "--dim", "3"]) == 2
    assert "ExtinctionRegime" in capsys.readouterr().err


def test_pme_command(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(PME_CFG)
    out = tmp_path / "out"
    assert main(["pme", "--config", str(cfg), "--out", str(out)]) == 0
    assert header(out / "series.csv") == pme.SERIES_HEADER
    assert len(list((out / "snapshots").glob("*.csv"))) == 6
    report = (out / "report.txt").read_text()
    assert report.startswith("[pme]\n")
    assert "mass_drift_within_tol = True" in report
    assert "relative_l1_error" in report and "decay_slope_p2" in report


def test_pme_report_without_enough_snapshots(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(PME_CFG.replace("snapshot_times = 1, 1.2, 1.4, 1.6, 1.8, 2", "snapshot_times = 2"))
    assert main(["pme", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
    assert "decay_slope" not in (tmp_path / "o" / "report.txt").read_text()


def test_pme_output_is_deterministic(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(PME_CFG)
    for d in ("a", "b"):
        assert main(["pme", "--config", str(cfg), "--out", str(tmp_path / d)]) == 0
    for name in ("series.csv", "report.txt"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_cns_command(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(CNS_CFG)
    assert main(["cns", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
    assert header(tmp_path / "o" / "entropy.csv") == diagnostics.ENTROPY_HEADER
    assert "entropy_within_slack = True" in (tmp_path / "o" / "report.txt").read_text()


def test_sweep_command(tmp_path):
    cfg = tmp_path / "run.cfg"
    text = (CNS_CFG.replace("command = cns", "command = sweep\nworkers = 1")
            .replace("eps = 0.1", "eps_list = 0.1, 0.01")
            .replace("snapshot_times = 1.05\n", ""))
    cfg.write_text(text)
    assert main(["sweep", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
    with open(tmp_path / "o" / "convergence.csv") as fh:
        rows = list(csv.reader(fh))
    assert tuple(rows[0]) == cns.CONVERGENCE_HEADER
    eps = [float(r[0]) for r in rows[1:]]
    assert eps == sorted(eps, reverse=True) == [0.1, 0.01]


def test_config_error_exit_code(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("command = pme\nalpha = 0.2\ndim = 3\nt_end = 1\n")
    assert main(["pme", "--config", str(cfg)]) == 2
    err = capsys.readouterr().err
    assert "config error" in err and "alpha" in err


def test_missing_config_exit_code(tmp_path):
    assert main(["pme", "--config", str(tmp_path / "missing.cfg")]) == 2


@pytest.mark.parametrize("suite", ["exact", "quasi", "cns"])
def test_verify_suites(suite, tmp_path, capsys):
    assert main(["verify", "--suite", suite, "--seed", "7", "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert out.startswith("seed = 7\n") and "FAIL" not in out
    assert (tmp_path / "report.txt").read_text() == out


def test_verify_failure_exit_code(monkeypatch):
    from bdflow import verify

    def broken(seed):
        return [verify.CheckResult("broken", "always", False, 1.0, 0.0)]

    monkeypatch.setitem(verify.SUITES, "exact", broken)
    assert main(["verify", "--suite", "exact"]) == 1


def test_unknown_suite_rejected():
    with pytest.raises(SystemExit):
        main(["verify", "--suite", "nope"])
