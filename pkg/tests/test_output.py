import pytest

from optobec.tools.output import (
    IoFailure,
    UnknownQuantity,
    emit_csv,
    emit_svg,
    load_csv,
    resolve_quantities,
)
from optobec.tools.sweep import QUANTITIES, SweepAxis, SweepResult


def _result(axis1, axis2=None, rows=None, name="demo"):
    axes = (axis1,) if axis2 is None else (axis1, axis2)
    columns = tuple(a.name for a in axes) + ("stability",) + QUANTITIES + ("error",)
    return SweepResult(name=name, axes=axes, columns=columns, rows=rows or [], plot_quantity="E_mc")


def _row(**values):
    row = {name: None for name in QUANTITIES}
    row.update(stability="stable", error=None)
    row.update(values)
    return row


def test_one_row_two_lines(tmp_path):
    axis = SweepAxis.of("temperature", (0.1,))
    result = _result(axis, rows=[_row(temperature=0.1, E_mc=0.25, branches=1)])
    path = emit_csv(result, tmp_path / "one.csv")
    lines = path.read_text(encoding="utf-8").split("\n")
    assert lines[-1] == ""
    assert len(lines[:-1]) == 2
    assert lines[0].split(",")[:3] == ["temperature", "stability", "c_s"]


def test_round_trip(tmp_path):
    axis = SweepAxis.of("temperature", (0.001, 0.1, 10.0))
    rows = [
        _row(temperature=0.001, E_mc=0.123456789012345, c_s=6.155e4, branches=1, nu_min=0.5),
        _row(temperature=0.1, E_mc=0.0, eps_mc=0.5, branches=1),
        _row(temperature=10.0, stability="error", error="params: 缺少 zeta_mc, 请检查"),
    ]
    result = _result(axis, rows=rows)
    columns, loaded = load_csv(emit_csv(result, tmp_path / "t.csv"))
    assert columns == result.columns
    assert loaded[0]["E_mc"] == float(f"{0.123456789012345:.12g}")
    assert loaded[0]["branches"] == 1
    assert loaded[1]["E_ac"] is None
    assert loaded[2]["error"] == "params: 缺少 zeta_mc, 请检查"
    # 再写一遍结果不变
    again = emit_csv(_result(axis, rows=loaded), tmp_path / "t2.csv")
    assert again.read_bytes() == (tmp_path / "t.csv").read_bytes()


def test_unstable_row_has_empty_cells(tmp_path):
    axis = SweepAxis.of("zeta_mc", (5000.0,))
    result = _result(axis, rows=[_row(zeta_mc=5000.0, stability="unstable", max_real_part=1.5e6)])
    _, header_and_row = emit_csv(result, tmp_path / "u.csv").read_text(encoding="utf-8").splitlines()
    cells = dict(zip(result.columns, header_and_row.split(",")))
    assert cells["stability"] == "unstable"
    assert cells["E_mc"] == cells["E_ac"] == cells["E_ma"] == ""
    assert cells["max_real_part"] == "1500000"


def test_write_failure(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    result = _result(SweepAxis.of("temperature", (0.1,)), rows=[_row(temperature=0.1)])
    with pytest.raises(IoFailure):
        emit_csv(result, blocker / "sub" / "out.csv")


def test_load_missing(tmp_path):
    with pytest.raises(IoFailure):
        load_csv(tmp_path / "missing.csv")


def test_resolve_quantities():
    result = _result(SweepAxis.of("temperature", (0.1,)))
    assert resolve_quantities(result, "E_N") == ("E_mc", "E_ac", "E_ma")
    assert resolve_quantities(result, "entanglement") == ("E_mc", "E_ac", "E_ma")
    assert resolve_quantities(result, ["c_s"]) == ("c_s",)
    with pytest.raises(UnknownQuantity):
        resolve_quantities(result, "E_xx")
    with pytest.raises(UnknownQuantity):
        resolve_quantities(result, "stability")


def test_degenerate_heatmap(tmp_path):
    pytest.importorskip("matplotlib")
    axis1 = SweepAxis.of("delta_over_omega_m", (0.4, 0.6))
    axis2 = SweepAxis.of("zeta_mc", (10.0, 20.0, 30.0, 40.0, 50.0))
    rows = [
        _row(delta_over_omega_m=x, zeta_mc=z, E_mc=0.0)
        for z in axis2.values
        for x in axis1.values
    ]
    path = emit_svg(_result(axis1, axis2, rows), tmp_path / "heat.svg")
    text = path.read_text(encoding="utf-8")
    assert "<svg" in text


def test_heatmap_with_unstable_cells(tmp_path):
    pytest.importorskip("matplotlib")
    axis1 = SweepAxis.logspace("temperature", 1e-3, 1.0, 3)
    axis2 = SweepAxis.logspace("zeta_ac", 10.0, 1000.0, 5)
    rows = []
    for k, z in enumerate(axis2.values):
        for j, t in enumerate(axis1.values):
            unstable = k == 4
            rows.append(
                _row(
                    temperature=t,
                    zeta_ac=z,
                    stability="unstable" if unstable else "stable",
                    E_ac=None if unstable else 0.1 * (k + j),
                )
            )
    result = _result(axis1, axis2, rows)
    assert emit_svg(result, tmp_path / "h.svg", "E_ac").exists()
    with pytest.raises(UnknownQuantity):
        emit_svg(result, tmp_path / "bad.svg", "E_N")


def test_three_line_plot(tmp_path):
    pytest.importorskip("matplotlib")
    axis = SweepAxis.linspace("delta_over_omega_m", 0.0, 2.0, 5)
    rows = [
        _row(delta_over_omega_m=x, E_mc=0.1 * i, E_ac=0.05 * i, E_ma=0.0)
        for i, x in enumerate(axis.values)
    ]
    rows[0]["stability"] = "unstable"
    rows[0]["E_mc"] = rows[0]["E_ac"] = rows[0]["E_ma"] = None
    path = emit_svg(_result(axis, rows=rows, name="fig3"), tmp_path / "fig3.svg", "E_N")
    text = path.read_text(encoding="utf-8")
    for label in ("E_mc", "E_ac", "E_ma"):
        assert label in text


def test_line_family(tmp_path):
    pytest.importorskip("matplotlib")
    axis1 = SweepAxis.logspace("temperature", 1e-3, 1e2, 4)
    axis2 = SweepAxis.of("zeta_ac", (0.0, 240.0))
    rows = [
        _row(temperature=t, zeta_ac=z, E_mc=max(0.0, 0.3 - 0.1 * j))
        for z in axis2.values
        for j, t in enumerate(axis1.values)
    ]
    path = emit_svg(_result(axis1, axis2, rows), tmp_path / "fam.svg")
    assert "zeta_ac=240" in path.read_text(encoding="utf-8")
