"""参数扫描引擎。

``run_point`` 串起整条流程：参数换算 → 平均场 → 漂移/扩散矩阵 → 稳定性 →
Lyapunov 方程 → 三个两体约化的对数负性。``run_sweep`` 在网格上逐点调用，
单点失败只记录在该行的 ``error`` 列，不会中断整个扫描。
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from ..utils.config import build_params
from ..utils.dynamics import build_diffusion, build_drift, stability
from ..utils.errors import OptobecError
from ..utils.gaussian import (
    BipartitePartition,
    UnphysicalState,
    check_physicality,
    log_negativity,
    reduce,
)
from ..utils.log import get_logger
from ..utils.meanfield import steady_state_given_delta, steady_state_given_delta_o
from ..utils.params import SystemParams, derive_constants
from ..utils.steadystate import solve_lyapunov

logger = get_logger("Sweep")

DELTA_OVER_OMEGA_M = "delta_over_omega_m"
SWEEPABLE = SystemParams.field_names() + (DELTA_OVER_OMEGA_M,)
SCALES = ("linear", "log")

QUANTITIES = (
    "c_s",
    "max_real_part",
    "E_mc",
    "E_ac",
    "E_ma",
    "eps_mc",
    "eps_ac",
    "eps_ma",
    "nu_min",
    "branches",
)
ENTANGLEMENT = ("E_mc", "E_ac", "E_ma")
DEFAULT_STABILITY_TOL = 1e-6


class PipelineError(OptobecError):
    """单点流程中某一阶段失败，``stage`` 指明阶段。"""

    def __init__(self, stage: str, cause: BaseException) -> None:
        super().__init__(f"{stage}: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass(frozen=True)
class SweepAxis:
    """扫描轴：参数名、严格单调的取值网格与刻度类型。"""

    name: str
    values: Tuple[float, ...]
    scale: str = "linear"

    def __post_init__(self) -> None:
        if self.name not in SWEEPABLE:
            raise ValueError(f"不可扫描的参数: {self.name!r}")
        if self.scale not in SCALES:
            raise ValueError(f"未知的刻度类型: {self.scale!r}")
        values = tuple(float(v) for v in self.values)
        object.__setattr__(self, "values", values)
        if not values:
            raise ValueError(f"扫描轴 {self.name} 为空")
        steps = np.diff(values)
        if len(values) > 1 and not (np.all(steps > 0) or np.all(steps < 0)):
            raise ValueError(f"扫描轴 {self.name} 必须严格单调")

    def __len__(self) -> int:
        return len(self.values)

    @classmethod
    def linspace(cls, name: str, start: float, stop: float, num: int) -> "SweepAxis":
        return cls(name, tuple(np.linspace(start, stop, num)), "linear")

    @classmethod
    def logspace(cls, name: str, start: float, stop: float, num: int) -> "SweepAxis":
        return cls(name, tuple(np.geomspace(start, stop, num)), "log")

    @classmethod
    def of(cls, name: str, values: Sequence[float]) -> "SweepAxis":
        return cls(name, tuple(values), "linear")


@dataclass(frozen=True)
class DerivedLink:
    """把一个参数绑定到另一个参数：target = factor × source。"""

    target: str
    source: str
    factor: float

    def __post_init__(self) -> None:
        for name in (self.target, self.source):
            if name not in SWEEPABLE:
                raise ValueError(f"未知的参数: {name!r}")

    def __str__(self) -> str:
        return f"{self.target}={self.factor:g}*{self.source}"


@dataclass(frozen=True)
class Curve:
    """单条曲线：在基础参数上覆盖若干字段后只取一个输出量。"""

    quantity: str
    overrides: Tuple[Tuple[str, float], ...] = ()

    def __post_init__(self) -> None:
        if self.quantity not in QUANTITIES:
            raise ValueError(f"未知的输出量: {self.quantity!r}")
        unknown = [name for name, _ in self.overrides if name not in SystemParams.field_names()]
        if unknown:
            raise ValueError(f"未知的参数: {unknown}")

    def __str__(self) -> str:
        given = ", ".join(f"{name}={value:g}" for name, value in self.overrides)
        return f"{self.quantity}({given})" if given else self.quantity


@dataclass(frozen=True)
class SweepSpec:
    name: str
    base: SystemParams
    axis1: SweepAxis
    axis2: Optional[SweepAxis] = None
    links: Tuple[DerivedLink, ...] = ()
    outputs: Tuple[str, ...] = QUANTITIES
    plot_quantity: str = "E_mc"
    stability_tol: Optional[float] = None
    description: str = ""
    # 非空时每条曲线在各自的基础参数上计算，只输出各自的量
    curves: Tuple[Curve, ...] = ()

    def __post_init__(self) -> None:
        unknown = [q for q in self.outputs if q not in QUANTITIES]
        if unknown:
            raise ValueError(f"未知的输出量: {unknown}")
        if self.axis2 is not None and self.axis2.name == self.axis1.name:
            raise ValueError("两个扫描轴不能是同一参数")
        if self.curves:
            if self.axis2 is not None:
                raise ValueError("曲线组只支持一维扫描")
            quantities = [curve.quantity for curve in self.curves]
            if len(set(quantities)) != len(quantities):
                raise ValueError(f"曲线组的输出量重复: {quantities}")

    @property
    def axes(self) -> Tuple[SweepAxis, ...]:
        return (self.axis1,) if self.axis2 is None else (self.axis1, self.axis2)

    @property
    def columns(self) -> Tuple[str, ...]:
        if self.curves:
            return (
                tuple(axis.name for axis in self.axes)
                + ("stability",)
                + tuple(curve.quantity for curve in self.curves)
                + ("error",)
            )
        return (
            tuple(axis.name for axis in self.axes)
            + ("stability",)
            + tuple(q for q in QUANTITIES if q in self.outputs)
            + ("error",)
        )

    def grid(self) -> Iterator[Dict[str, float]]:
        """按 axis2 为外层、axis1 为内层的固定顺序生成网格点。"""
        outer = self.axis2.values if self.axis2 is not None else (None,)
        for v2 in outer:
            for v1 in self.axis1.values:
                point = {self.axis1.name: v1}
                if self.axis2 is not None:
                    point[self.axis2.name] = v2
                yield point

    def point_params(self, point: Dict[str, float]) -> SystemParams:
        """把网格点与派生绑定应用到基础参数上。"""
        values: Dict[str, Any] = {name: getattr(self.base, name) for name in SystemParams.field_names()}
        values[DELTA_OVER_OMEGA_M] = None
        values.update(point)
        for link in self.links:
            source = values.get(link.source)
            if source is None:
                raise ValueError(f"派生绑定 {link} 的源参数未设置")
            values[link.target] = link.factor * source

        overrides = {name: values[name] for name in list(point) + [lk.target for lk in self.links]}
        ratio = overrides.pop(DELTA_OVER_OMEGA_M, None)
        if ratio is not None:
            overrides["delta"] = ratio * values["mirror_freq"]
        return build_params(self.base, overrides)

    def curve_spec(self, curve: Curve) -> "SweepSpec":
        """单条曲线对应的普通扫描配置。"""
        return replace(
            self,
            base=build_params(self.base, dict(curve.overrides)),
            outputs=(curve.quantity,),
            curves=(),
        )


@dataclass
class PointResult:
    stability: str
    c_s: Optional[float] = None
    max_real_part: Optional[float] = None
    negativity: Dict[str, Optional[float]] = field(default_factory=dict)
    epsilon: Dict[str, Optional[float]] = field(default_factory=dict)
    nu_min: Optional[float] = None
    branches: Optional[int] = None
    error: Optional[str] = None
    covariance: Optional[np.ndarray] = field(default=None, repr=False, compare=False)

    @property
    def stable(self) -> bool:
        return self.stability == "stable"

    def as_row(self) -> Dict[str, Any]:
        row: Dict[str, Any] = {
            "stability": self.stability,
            "c_s": self.c_s,
            "max_real_part": self.max_real_part,
            "nu_min": self.nu_min,
            "branches": self.branches,
            "error": self.error,
        }
        for partition in BipartitePartition:
            row[f"E_{partition.label}"] = self.negativity.get(partition.label)
            row[f"eps_{partition.label}"] = self.epsilon.get(partition.label)
        return row


def run_point(
    params: SystemParams,
    *,
    paper_sign_convention: bool = False,
    stability_tol: float = DEFAULT_STABILITY_TOL,
) -> PointResult:
    """计算单个参数点。

    Args:
        params: 实验参数。
        paper_sign_convention: Δ_o 模式下有效失谐使用另一种符号约定。
        stability_tol: 稳定性容差，相对 ω_m。

    Raises:
        PipelineError: 任一阶段失败，``stage`` 为 params / meanfield /
            dynamics / lyapunov / gaussian 之一。
    """
    with _stage("params"):
        dp = derive_constants(params)

    with _stage("meanfield"):
        if dp.delta is not None:
            mf = steady_state_given_delta(dp, dp.delta)
            n_branches = 1
        else:
            branches = steady_state_given_delta_o(
                dp, dp.delta_o, paper_sign_convention=paper_sign_convention
            )
            n_branches = len(branches)
            # 功率从零缓慢升高时到达的是强度最低的稳定支
            mf = next((m for m, ok in branches if ok), branches[0][0])

    with _stage("dynamics"):
        M = build_drift(dp, mf)
        D = build_diffusion(dp)
        tol = stability_tol * dp.mirror_freq
        report = stability(M, tol)

    result = PointResult(
        stability=report.label,
        c_s=mf.c_s,
        max_real_part=report.max_real_part,
        branches=n_branches,
    )
    if not report.eigen_stable:
        return result

    with _stage("lyapunov"):
        V = solve_lyapunov(M, D, check_stability=False)

    with _stage("gaussian"):
        physical, nu_min = check_physicality(V)
        result.nu_min = nu_min
        if not physical:
            raise UnphysicalState(f"稳态协方差矩阵 ν_min = {nu_min:.12g} < 1/2")
        for partition in BipartitePartition:
            value, epsilon = log_negativity(reduce(V, partition))
            result.negativity[partition.label] = value
            result.epsilon[partition.label] = epsilon
    result.covariance = V
    return result


class _stage:
    """把阶段内抛出的异常包装成 ``PipelineError``。"""

    def __init__(self, name: str) -> None:
        self.name = name

    def __enter__(self) -> None:
        return None

    def __exit__(self, exc_type, exc, tb) -> bool:
        if exc is None or isinstance(exc, PipelineError):
            return False
        if isinstance(exc, (OptobecError, ValueError, ArithmeticError, np.linalg.LinAlgError)):
            raise PipelineError(self.name, exc) from exc
        return False


@dataclass
class SweepResult:
    """扫描结果表，每个网格点一行，行序与执行顺序无关。"""

    name: str
    axes: Tuple[SweepAxis, ...]
    columns: Tuple[str, ...]
    rows: List[Dict[str, Any]]
    plot_quantity: str = "E_mc"

    @property
    def shape(self) -> Tuple[int, ...]:
        return tuple(len(axis) for axis in self.axes)

    @property
    def error_count(self) -> int:
        return sum(1 for row in self.rows if row.get("error"))

    def column(self, name: str) -> List[Any]:
        if name not in self.columns:
            raise KeyError(name)
        return [row.get(name) for row in self.rows]


def _evaluate(task: Tuple[Dict[str, float], SweepSpec, bool, float]) -> Dict[str, Any]:
    point, spec, paper_sign, tol = task
    if spec.curves:
        return _evaluate_curves(task)
    row: Dict[str, Any] = dict(point)
    try:
        params = spec.point_params(point)
        row.update(run_point(params, paper_sign_convention=paper_sign, stability_tol=tol).as_row())
    except PipelineError as exc:
        row.update(stability="error", error=str(exc))
    except (OptobecError, ValueError) as exc:
        row.update(stability="error", error=f"params: {exc}")
    return {name: row.get(name) for name in spec.columns}


# 曲线组一行的稳定性取各条曲线中最差的一个
_STABILITY_RANK = {"stable": 0, "marginal": 1, "unstable": 2, "error": 3}


def _evaluate_curves(task: Tuple[Dict[str, float], SweepSpec, bool, float]) -> Dict[str, Any]:
    point, spec, paper_sign, tol = task
    row: Dict[str, Any] = dict(point)
    labels: List[str] = []
    errors: List[str] = []
    for curve in spec.curves:
        try:
            single = spec.curve_spec(curve)
        except (OptobecError, ValueError) as exc:
            labels.append("error")
            errors.append(f"params: {exc}")
            continue
        values = _evaluate((point, single, paper_sign, tol))
        row[curve.quantity] = values[curve.quantity]
        labels.append(values["stability"])
        if values["error"]:
            errors.append(values["error"])
    row["stability"] = max(labels, key=_STABILITY_RANK.__getitem__)
    row["error"] = "; ".join(errors) or None
    return {name: row.get(name) for name in spec.columns}


def run_sweep(
    spec: SweepSpec,
    *,
    workers: int = 1,
    paper_sign_convention: bool = False,
    stability_tol: Optional[float] = None,
) -> SweepResult:
    """在整个网格上运行 ``run_point``。

    ``workers > 1`` 时用进程池并行；``Executor.map`` 保持提交顺序，
    结果行序始终是 axis2 外层、axis1 内层。
    """
    tol = stability_tol if stability_tol is not None else (spec.stability_tol or DEFAULT_STABILITY_TOL)
    tasks = [(point, spec, paper_sign_convention, tol) for point in spec.grid()]
    started = time.perf_counter()

    if workers > 1 and len(tasks) > 1:
        chunksize = max(1, math.ceil(len(tasks) / (workers * 8)))
        with ProcessPoolExecutor(max_workers=workers) as executor:
            rows = list(executor.map(_evaluate, tasks, chunksize=chunksize))
    else:
        rows = [_evaluate(task) for task in tasks]

    result = SweepResult(
        name=spec.name,
        axes=spec.axes,
        columns=spec.columns,
        rows=rows,
        plot_quantity=spec.plot_quantity,
    )
    elapsed = time.perf_counter() - started
    stable = sum(1 for row in rows if row["stability"] == "stable")
    logger.info("%s: %d 个点完成，其中稳定 %d 个，用时 %.2f s", spec.name, len(rows), stable, elapsed)
    if result.error_count:
        logger.warning("%s: %d 个点计算失败，详见 error 列", spec.name, result.error_count)
    return result
