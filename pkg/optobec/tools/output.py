"""扫描结果输出：CSV 表格与 SVG 图。

CSV 每个网格点一行，浮点数保留 12 位有效数字，缺失值写空单元格。
SVG 二维网格画热力图（不稳定点用灰色填充），一维或曲线族画折线。
"""

from __future__ import annotations

import csv
import math
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..utils.errors import OptobecError
from ..utils.log import get_logger
from .sweep import DELTA_OVER_OMEGA_M, ENTANGLEMENT, SweepResult

logger = get_logger("Output")

SIGNIFICANT_DIGITS = 12
TEXT_COLUMNS = ("stability", "error")
INTEGER_COLUMNS = ("branches",)
UNSTABLE_COLOR = "#bdbdbd"
# 曲线族与热力图的分界：第二个轴不超过这么多取值时画成多条曲线
LINE_FAMILY_MAX = 4
QUANTITY_ALIASES = {"E_N": ENTANGLEMENT, "entanglement": ENTANGLEMENT}

AXIS_LABELS = {
    DELTA_OVER_OMEGA_M: "Δ/ω_m",
    "temperature": "T (K)",
    "zeta_mc": "ζ_mc (s⁻¹)",
    "zeta_ac": "ζ_ac (s⁻¹)",
    "power": "P (W)",
    "delta": "Δ (rad/s)",
    "delta_o": "Δ_o (rad/s)",
}


class IoFailure(OptobecError):
    """输出文件无法写入或读取。"""


class UnknownQuantity(OptobecError, KeyError):
    """结果表中没有要绘制的量。"""


def _format_cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    value = float(value)
    if math.isnan(value):
        return ""
    return f"{value:.{SIGNIFICANT_DIGITS}g}"


def _parse_cell(column: str, text: str) -> Any:
    if column in TEXT_COLUMNS:
        return text or None
    if text == "":
        return None
    if column in INTEGER_COLUMNS:
        return int(text)
    return float(text)


def emit_csv(result: SweepResult, path: Union[str, Path]) -> Path:
    """写出 CSV，首行为列名，UTF-8 编码，行尾 ``\\n``。"""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(result.columns)
            for row in result.rows:
                writer.writerow([_format_cell(row.get(name)) for name in result.columns])
    except OSError as exc:
        raise IoFailure(f"无法写入 {path}: {exc}") from exc
    logger.info("已写出 %s（%d 行）", path, len(result.rows))
    return path


def load_csv(path: Union[str, Path]) -> Tuple[Tuple[str, ...], List[Dict[str, Any]]]:
    """读回 ``emit_csv`` 写出的表格，返回 (列名, 行)。"""
    path = Path(path)
    try:
        with path.open("r", encoding="utf-8", newline="") as handle:
            reader = csv.reader(handle)
            header = tuple(next(reader))
            rows = [
                {name: _parse_cell(name, cell) for name, cell in zip(header, record)}
                for record in reader
            ]
    except (OSError, StopIteration) as exc:
        raise IoFailure(f"无法读取 {path}: {exc}") from exc
    except ValueError as exc:
        raise IoFailure(f"{path} 内容格式错误: {exc}") from exc
    return header, rows


def resolve_quantities(result: SweepResult, quantity: Union[str, Sequence[str]]) -> Tuple[str, ...]:
    names = (quantity,) if isinstance(quantity, str) else tuple(quantity)
    expanded: List[str] = []
    for name in names:
        expanded.extend(QUANTITY_ALIASES.get(name, (name,)))
    missing = [name for name in expanded if name not in result.columns or name in TEXT_COLUMNS]
    if missing or not expanded:
        raise UnknownQuantity(f"结果中没有可绘制的量: {missing or names}")
    return tuple(expanded)


def _values(result: SweepResult, quantity: str) -> np.ndarray:
    return np.array(
        [np.nan if v is None else float(v) for v in result.column(quantity)], dtype=float
    )


def _import_pyplot():
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ModuleNotFoundError as exc:
        raise OptobecError("绘图需要 matplotlib，请先安装: pip install matplotlib") from exc
    matplotlib.rcParams["svg.hashsalt"] = "optobec"
    return plt


def emit_svg(
    result: SweepResult,
    path: Union[str, Path],
    quantity: Optional[Union[str, Sequence[str]]] = None,
) -> Path:
    """按结果维度自动选择热力图或曲线图写出 SVG。

    Args:
        result: 扫描结果。
        path: 输出文件路径。
        quantity: 要绘制的列名，``E_N`` 表示三个对数负性，缺省取
            ``result.plot_quantity``。
    """
    quantities = resolve_quantities(result, quantity or result.plot_quantity)
    plt = _import_pyplot()
    path = Path(path)

    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    try:
        axis1 = result.axes[0]
        if len(result.axes) == 2 and len(result.axes[1]) > LINE_FAMILY_MAX:
            if len(quantities) != 1:
                raise UnknownQuantity(f"热力图只能绘制一个量，收到 {quantities}")
            _heatmap(fig, ax, result, quantities[0])
        else:
            _lines(ax, result, quantities)
        ax.set_xlabel(AXIS_LABELS.get(axis1.name, axis1.name))
        if axis1.scale == "log":
            ax.set_xscale("log")
        ax.set_title(result.name)

        path.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(path, format="svg", bbox_inches="tight", metadata={"Date": None})
    except OSError as exc:
        raise IoFailure(f"无法写入 {path}: {exc}") from exc
    finally:
        plt.close(fig)
    logger.info("已写出 %s", path)
    return path


def _heatmap(fig, ax, result: SweepResult, quantity: str) -> None:
    import matplotlib

    axis1, axis2 = result.axes
    grid = _values(result, quantity).reshape(len(axis2), len(axis1))
    masked = np.ma.masked_invalid(grid)

    cmap = matplotlib.colormaps["viridis"].copy()
    cmap.set_bad(UNSTABLE_COLOR)
    finite = grid[np.isfinite(grid)]
    vmax = float(finite.max()) if finite.size else 0.0
    vmin = min(0.0, float(finite.min())) if finite.size else 0.0
    if vmax <= vmin:
        vmax = vmin + 1.0

    mesh = ax.pcolormesh(
        np.asarray(axis1.values),
        np.asarray(axis2.values),
        masked,
        cmap=cmap,
        vmin=vmin,
        vmax=vmax,
        shading="nearest",
    )
    fig.colorbar(mesh, ax=ax, label=quantity)
    ax.set_ylabel(AXIS_LABELS.get(axis2.name, axis2.name))
    if axis2.scale == "log":
        ax.set_yscale("log")


def _lines(ax, result: SweepResult, quantities: Tuple[str, ...]) -> None:
    axis1 = result.axes[0]
    x = np.asarray(axis1.values)
    n1 = len(axis1)
    families: List[Tuple[str, slice]] = [("", slice(0, n1))]
    if len(result.axes) == 2:
        axis2 = result.axes[1]
        families = [
            (f"{axis2.name}={v:.4g}", slice(k * n1, (k + 1) * n1))
            for k, v in enumerate(axis2.values)
        ]

    stability = result.column("stability")
    for name in quantities:
        values = _values(result, name)
        for label, block in families:
            ax.plot(x, values[block], label=f"{name} {label}".strip())

    unstable = [
        x[i % n1] for i, flag in enumerate(stability) if flag not in ("stable", None)
    ]
    if unstable:
        ax.scatter(
            unstable,
            np.zeros(len(unstable)),
            marker="|",
            color=UNSTABLE_COLOR,
            label="unstable",
        )
    ax.set_ylabel(quantities[0] if len(quantities) == 1 else "E_N")
    ax.legend(loc="best", fontsize="small")
