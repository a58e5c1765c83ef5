import importlib
import math

import pytest

from optobec import main
from optobec.tools.output import load_csv
from optobec.tools.sweep import SweepResult, run_point
from optobec.utils.params import derive_constants

cli = importlib.import_module("optobec.main")


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    for name in (
        "OPTOBEC_WORKERS",
        "OPTOBEC_SIGN_CONVENTION",
        "OPTOBEC_STABILITY_TOL",
        "OPTOBEC_STRICT",
        "OPTOBEC_NOTIFY",
        "OPTOBEC_OUT_DIR",
    ):
        monkeypatch.delenv(name, raising=False)


def test_point_prints_row(capsys):
    assert main(["point", "--zeta_mc", "600", "--zeta-ac", "0", "--atom_damping", "628.3"]) == 0
    out = capsys.readouterr().out
    keys = [line.split()[0] for line in out.splitlines()]
    assert "stability" in keys
    assert "E_mc" in keys


def test_point_with_config_file(tmp_path, capsys):
    config = tmp_path / "cavity.ini"
    config.write_text("temperature = 1uK\nzeta_mc = 300\n", encoding="utf-8")
    assert main(["point", "--config", str(config)]) == 0
    assert "c_s" in capsys.readouterr().out


def test_unknown_figure_is_usage_error():
    assert main(["preset", "nope"]) == 2


def test_bad_quantity_is_usage_error(tmp_path):
    assert main(["point", "--temperature", "3 parsecs"]) == 2


def test_argparse_errors_exit_2():
    with pytest.raises(SystemExit) as info:
        main(["sweep"])
    assert info.value.code == 2
    with pytest.raises(SystemExit) as info:
        main([])
    assert info.value.code == 2


def test_sweep_writes_csv(tmp_path, capsys):
    code = main(
        [
            "sweep",
            "--axis", "temperature", "10mK", "100mK", "3",
            "--scale", "log",
            "--zeta_mc", "600",
            "--zeta_ac", "0",
            "--name", "tscan",
            "--out", str(tmp_path),
        ]
    )
    assert code == 0
    path = tmp_path / "tscan.csv"
    assert str(path) in capsys.readouterr().out
    header, rows = load_csv(path)
    assert header[:2] == ("temperature", "stability")
    assert len(rows) == 3
    assert rows[0]["temperature"] == pytest.approx(0.01)


def test_sweep_with_link(tmp_path):
    code = main(
        [
            "sweep",
            "--axis", "zeta_mc", "100", "200", "2",
            "--link", "zeta_ac=0.5*zeta_mc",
            "--out", str(tmp_path),
        ]
    )
    assert code == 0
    assert len(load_csv(tmp_path / "sweep.csv")[1]) == 2


def test_bad_link_is_usage_error(tmp_path):
    code = main(["sweep", "--axis", "zeta_mc", "100", "200", "2", "--link", "zeta_ac", "--out", str(tmp_path)])
    assert code == 2


def test_strict_fails_on_error_rows(tmp_path):
    argv = ["sweep", "--axis", "power", "-1", "-0.5", "2", "--out", str(tmp_path)]
    assert main(argv) == 0
    _, rows = load_csv(tmp_path / "sweep.csv")
    assert all(row["stability"] == "error" for row in rows)
    assert main(argv + ["--strict"]) == 1


def test_strict_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("OPTOBEC_STRICT", "1")
    assert main(["sweep", "--axis", "power", "-1", "-0.5", "2", "--out", str(tmp_path)]) == 1


def test_bad_sign_convention_env(monkeypatch):
    monkeypatch.setenv("OPTOBEC_SIGN_CONVENTION", "backwards")
    assert main(["point"]) == 2


def _capture_run_point(monkeypatch):
    seen = []

    def recording(params, **kwargs):
        seen.append(params)
        return run_point(params, **kwargs)

    monkeypatch.setattr(cli, "run_point", recording)
    return seen


def test_point_derives_couplings_from_inputs(monkeypatch):
    seen = _capture_run_point(monkeypatch)
    argv = ["point", "--mirror_mass", "5ng", "--atom-number", "1e5", "--lattice_depth_per_photon", "100"]
    assert main(argv) == 0
    dp = derive_constants(seen[0])
    assert dp.zeta_mc == pytest.approx(1.09e3, rel=1e-2)
    assert dp.zeta_ac == pytest.approx(math.sqrt(1e5) * 100 / 2)


def test_config_file_derives_mirror_coupling(monkeypatch, tmp_path):
    seen = _capture_run_point(monkeypatch)
    config = tmp_path / "mass.ini"
    config.write_text("mirror_mass = 5 ng\n", encoding="utf-8")
    assert main(["point", "--config", str(config)]) == 0
    assert seen[0].zeta_mc is None
    assert derive_constants(seen[0]).zeta_mc == pytest.approx(1.09e3, rel=1e-2)


def _capture_run_sweep(monkeypatch):
    seen = {}

    def recording(spec, **kwargs):
        seen.update(kwargs)
        return SweepResult(spec.name, spec.axes, spec.columns, [], spec.plot_quantity)

    monkeypatch.setattr(cli, "run_sweep", recording)
    return seen


def test_preset_uses_environment_tolerance(monkeypatch, tmp_path):
    seen = _capture_run_sweep(monkeypatch)
    monkeypatch.setenv("OPTOBEC_STABILITY_TOL", "1e-4")
    assert main(["preset", "fig1a", "--out", str(tmp_path)]) == 0
    assert seen["stability_tol"] == pytest.approx(1e-4)


def test_preset_keeps_its_own_tolerance(monkeypatch, tmp_path):
    seen = _capture_run_sweep(monkeypatch)
    monkeypatch.setenv("OPTOBEC_STABILITY_TOL", "1e-4")
    assert main(["preset", "fig2a", "--out", str(tmp_path)]) == 0
    assert seen["stability_tol"] is None
    assert main(["preset", "fig2a", "--stability-tol", "1e-3", "--out", str(tmp_path)]) == 0
    assert seen["stability_tol"] == pytest.approx(1e-3)
