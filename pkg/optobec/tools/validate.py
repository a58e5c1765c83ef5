"""自检：解析极限、两种稳态求解的一致性、纠缠度量自洽性与各图的定性特征。

不变量与对照检查失败时 ``optobec validate`` 以退出码 1 结束；各图的定性
特征检查只报告差异（discrepancy），不影响退出码。
"""

from __future__ import annotations

import time
from dataclasses import dataclass, replace
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
from scipy import linalg

from ..utils.dynamics import build_diffusion, build_drift, stability
from ..utils.gaussian import (
    log_negativity,
    ppt_epsilon,
    simon_criterion,
    symplectic_form,
)
from ..utils.log import get_logger
from ..utils.meanfield import steady_state_given_delta
from ..utils.params import SystemParams, derive_constants
from ..utils.steadystate import integrate_moments, solve_lyapunov
from . import presets
from .sweep import SweepAxis, SweepResult, SweepSpec, run_sweep

logger = get_logger("Validate")

ORACLE_TOL = 1e-6
EPSILON_TOL = 1e-9
PHYSICALITY_TOL = 1e-9


@dataclass
class CheckResult:
    name: str
    status: str
    detail: str
    invariant: bool = True
    elapsed: float = 0.0

    @property
    def passed(self) -> bool:
        return self.status != "fail"

    def __str__(self) -> str:
        return f"{self.status.upper():<11} {self.name}: {self.detail} ({self.elapsed:.2f} s)"


def _timed(name: str, check: Callable[[], Tuple[str, str]], *, invariant: bool = True) -> CheckResult:
    started = time.perf_counter()
    try:
        status, detail = check()
    except Exception as exc:  # noqa: BLE001 - 任何异常都记为该项失败
        status, detail = "fail", f"{type(exc).__name__}: {exc}"
    result = CheckResult(name, status, detail, invariant, time.perf_counter() - started)
    log = logger.info if result.passed else logger.error
    log("%s", result)
    return result


def _system(params: SystemParams):
    dp = derive_constants(params)
    mf = steady_state_given_delta(dp, dp.delta)
    return dp, build_drift(dp, mf), build_diffusion(dp)


def _subsample(n: int, k: int) -> np.ndarray:
    return np.unique(np.linspace(0, n - 1, min(n, k)).round().astype(int))


def check_analytic_limits() -> Tuple[str, str]:
    """单独的腔模应回到真空 I/2；弱阻尼机械振子应回到热态 (n̄+1/2)I。"""
    params = replace(presets.BASE, zeta_mc=0.0, zeta_ac=0.0)
    dp, M, D = _system(params)
    cavity = solve_lyapunov(M[4:, 4:], D[4:, 4:])
    cavity_err = float(np.max(np.abs(cavity - 0.5 * np.eye(2))))

    mirror_params = replace(params, mirror_damping=1e-5 * params.mirror_freq)
    dp, M, D = _system(mirror_params)
    mirror = solve_lyapunov(M[:2, :2], D[:2, :2])
    expected = dp.n_thermal + 0.5
    mirror_err = float(np.max(np.abs(mirror - expected * np.eye(2)))) / expected

    ok = cavity_err < 1e-12 and mirror_err < 1e-3
    return ("pass" if ok else "fail"), f"腔真空误差 {cavity_err:.2e}，热态相对误差 {mirror_err:.2e}"


def check_oracle(quick: bool = False) -> Tuple[str, str]:
    """在 fig1a 网格的子样本上比较 Lyapunov 解与 RK4 长时间积分。"""
    spec = presets.fig1a()
    k = 6 if quick else 20
    worst, compared = 0.0, 0
    for j in _subsample(len(spec.axis2), k):
        for i in _subsample(len(spec.axis1), k):
            point = {spec.axis1.name: spec.axis1.values[i], spec.axis2.name: spec.axis2.values[j]}
            dp, M, D = _system(spec.point_params(point))
            if not stability(M, 1e-6 * dp.mirror_freq).eigen_stable:
                continue
            exact = solve_lyapunov(M, D, check_stability=False)
            thermal = dp.n_thermal + 0.5
            V0 = np.diag([thermal, thermal, thermal, thermal, 0.5, 0.5])
            horizon = 50.0 / min(dp.mirror_damping, dp.kappa)
            integrated = integrate_moments(M, D, V0, horizon)
            worst = max(worst, float(np.max(np.abs(exact - integrated))))
            compared += 1
    if compared == 0:
        return "fail", "子样本中没有稳定点"
    ok = worst < ORACLE_TOL
    return ("pass" if ok else "fail"), f"{compared} 个稳定点，最大偏差 {worst:.2e}"


def _random_state(rng: np.random.Generator) -> np.ndarray:
    sigma = symplectic_form(2)
    H = rng.normal(scale=0.6, size=(4, 4))
    S = linalg.expm(sigma @ (H + H.T) / 2.0)
    nu = 0.5 + rng.exponential(0.5, size=2)
    return S @ np.diag([nu[0], nu[0], nu[1], nu[1]]) @ S.T


def check_entanglement_consistency(quick: bool = False, seed: int = 20240601) -> Tuple[str, str]:
    """随机物理态上 ε 闭式与特征值路径一致，Simon 判据与 E_N > 0 一致。"""
    rng = np.random.default_rng(seed)
    n = 200 if quick else 1000
    worst, disagreements, entangled = 0.0, 0, 0
    for _ in range(n):
        V = _random_state(rng)
        value, epsilon = log_negativity(V)
        worst = max(worst, abs(epsilon - ppt_epsilon(V)) / max(1.0, epsilon))
        if simon_criterion(V) != (value > 0):
            disagreements += 1
        entangled += value > 0
    ok = worst < EPSILON_TOL and disagreements == 0
    detail = f"{n} 个随机态（纠缠 {entangled} 个），ε 最大偏差 {worst:.2e}，判据不一致 {disagreements} 次"
    return ("pass" if ok else "fail"), detail


def check_two_mode_squeezed() -> Tuple[str, str]:
    """双模压缩真空态 E_N = 2r。"""
    worst = 0.0
    Z = np.diag([1.0, -1.0])
    for r in (0.0, 0.25, 0.5, 1.0, 2.0):
        c, s = np.cosh(2 * r), np.sinh(2 * r)
        V = 0.5 * np.block([[c * np.eye(2), s * Z], [s * Z, c * np.eye(2)]])
        worst = max(worst, abs(log_negativity(V).value - 2 * r))
    ok = worst < 1e-9
    return ("pass" if ok else "fail"), f"最大偏差 {worst:.2e}"


def check_stability_agreement(quick: bool = False) -> Tuple[str, str]:
    """fig1a 网格子样本上特征值判据与 Routh-Hurwitz 判据一致（临界点除外）。"""
    spec = presets.fig1a()
    k = 10 if quick else 40
    disagreements, checked, marginal = 0, 0, 0
    for j in _subsample(len(spec.axis2), k):
        for i in _subsample(len(spec.axis1), k):
            point = {spec.axis1.name: spec.axis1.values[i], spec.axis2.name: spec.axis2.values[j]}
            dp, M, _ = _system(spec.point_params(point))
            report = stability(M, 1e-6 * dp.mirror_freq)
            if report.marginal:
                marginal += 1
                continue
            checked += 1
            disagreements += report.eigen_stable != report.hurwitz_stable
    ok = disagreements == 0
    detail = f"{checked} 个点，不一致 {disagreements} 个，临界点 {marginal} 个已跳过"
    return ("pass" if ok else "fail"), detail


def _positive(values) -> np.ndarray:
    return np.array([v is not None and v > 0 for v in values])


def _line(result: SweepResult, quantity: str, k: int) -> List[Optional[float]]:
    n1 = len(result.axes[0])
    return result.column(quantity)[k * n1 : (k + 1) * n1]


def _shape_fig1a(result: SweepResult) -> Tuple[bool, str]:
    axis1, axis2 = result.axes
    x = np.asarray(axis1.values)
    peaks = []
    for k in range(len(axis2)):
        line = _line(result, "E_mc", k)
        mask = _positive(line)
        if not mask.any():
            peaks.append(None)
            continue
        hits = np.flatnonzero(mask)
        contiguous = hits[-1] - hits[0] + 1 == hits.size
        peak = int(np.nanargmax([v if v is not None else np.nan for v in line]))
        peaks.append((contiguous, x[peak]))
    found = [(k, p) for k, p in enumerate(peaks) if p is not None]
    if not found:
        return False, "E_mc 在整个网格上为零"
    k_top, (contiguous, peak_x) = found[-1]
    if not contiguous or not 0.3 <= peak_x <= 0.7:
        return False, f"最大 ζ_mc 处 E_mc 区间连续={contiguous}，峰值位于 Δ/ω_m = {peak_x:.3g}"
    peak_index = int(np.argmin(np.abs(x - peak_x)))
    along = [
        _line(result, "E_mc", k)[peak_index] for k in range(len(axis2))
    ]
    along = [v for v in along if v is not None]
    increasing = all(b >= a for a, b in zip(along, along[1:]))
    return increasing, f"峰值 Δ/ω_m = {peak_x:.3g}，沿 ζ_mc 递增={increasing}"


def _shape_fig2a(result: SweepResult) -> Tuple[bool, str]:
    temps = np.asarray(result.axes[0].values)
    line = [v if v is not None else 0.0 for v in _line(result, "E_mc", 0)]
    at_10k = line[int(np.argmin(np.abs(np.log(temps / 10.0))))]
    vanishes = [t for t, v in zip(temps, line) if v == 0.0 and t <= 100.0]
    monotone = all(b <= a + 1e-12 for a, b in zip(line, line[1:]))
    ok = at_10k > 0 and bool(vanishes) and monotone
    first_zero = f"{vanishes[0]:.3g} K" if vanishes else "无"
    return ok, f"E_mc(10 K) = {at_10k:.3g}，消失温度 {first_zero}，单调不增={monotone}"


def _shape_fig2c(result: SweepResult) -> Tuple[bool, str]:
    temps = np.asarray(result.axes[0].values)
    k = list(result.axes[1].values).index(max(result.axes[1].values))
    line = _line(result, "E_ma", k)
    cold = line[int(np.argmin(np.abs(np.log(temps / 1e-6))))]
    warm = line[int(np.argmin(np.abs(np.log(temps / 1.0))))]
    ok = cold is not None and cold > 0 and (warm is None or warm == 0.0)
    return ok, f"ζ = ω_m 时 E_ma(1 μK) = {cold}，E_ma(1 K) = {warm}"


def _shape_fig3(result: SweepResult) -> Tuple[bool, str]:
    x = np.asarray(result.axes[0].values)
    mc, ac, ma = (_positive(result.column(q)) for q in ("E_mc", "E_ac", "E_ma"))
    overlap = bool((mc & ac).any())
    if not ma.any():
        return False, f"E_mc/E_ac 同时为正={overlap}，E_ma 处处为零"
    later = x[ma].min() > x[mc].min() if mc.any() else False
    return overlap and later, f"E_mc/E_ac 同时为正={overlap}，E_ma 起始 Δ/ω_m = {x[ma].min():.3g}"


def _shrink(axis: SweepAxis, n: int) -> SweepAxis:
    if len(axis) <= n:
        return axis
    low, high = axis.values[0], axis.values[-1]
    if axis.scale == "log":
        return SweepAxis.logspace(axis.name, low, high, n)
    return SweepAxis.linspace(axis.name, low, high, n)


def _coarse(spec: SweepSpec, quick: bool) -> SweepSpec:
    spec = replace(spec, axis1=_shrink(spec.axis1, 21 if quick else 41))
    if spec.axis2 is not None:
        spec = replace(spec, axis2=_shrink(spec.axis2, 5 if quick else 9))
    return spec


SHAPES = (
    ("fig1a", _shape_fig1a),
    ("fig2a", _shape_fig2a),
    ("fig2c", _shape_fig2c),
    ("fig3", _shape_fig3),
)


def _paper_convention_detail(spec: SweepSpec, shape, workers: int) -> str:
    """定性特征不符时在另一种符号约定下重算。

    η 只出现在 Δ_o 模式的自洽方程里，Δ 直接给定时两种约定结果相同，不必重算。
    """
    if spec.base.delta is not None:
        return "Δ 直接给定，η 的符号约定不影响结果，未重算"
    paper = run_sweep(spec, workers=workers, paper_sign_convention=True)
    ok_paper, detail_paper = shape(paper)
    return f"paper 符号约定下{'通过' if ok_paper else '仍不符'}: {detail_paper}"


def _preset_ids() -> List[str]:
    """每个预设只取一个编号（别名去重）。"""
    seen: Dict[Callable[[], SweepSpec], str] = {}
    for figure_id, builder in presets.FIGURES.items():
        seen.setdefault(builder, figure_id)
    return list(seen.values())


def unphysical_rows(rows: List[Dict[str, Any]]) -> List[Dict[str, Any]]:
    return [
        row
        for row in rows
        if (row.get("nu_min") is not None and row["nu_min"] < 0.5 - PHYSICALITY_TOL)
        or any(part.startswith("gaussian") for part in (row.get("error") or "").split("; "))
    ]


def run_checks(quick: bool = False, workers: int = 1) -> List[CheckResult]:
    results = [
        _timed("analytic_limits", check_analytic_limits),
        _timed("two_mode_squeezed", check_two_mode_squeezed),
        _timed("entanglement_consistency", lambda: check_entanglement_consistency(quick)),
        _timed("stability_agreement", lambda: check_stability_agreement(quick)),
        _timed("oracle_equivalence", lambda: check_oracle(quick)),
    ]

    swept: Dict[str, SweepResult] = {}
    for figure_id, shape in SHAPES:
        spec = _coarse(presets.preset(figure_id), quick)

        def check(figure_id=figure_id, spec=spec, shape=shape) -> Tuple[str, str]:
            result = run_sweep(spec, workers=workers)
            swept[figure_id] = result
            ok, detail = shape(result)
            if ok:
                return "pass", detail
            return "discrepancy", f"{detail}；{_paper_convention_detail(spec, shape, workers)}"

        results.append(_timed(f"shape_{figure_id}", check, invariant=False))

    def physicality() -> Tuple[str, str]:
        # 所有预设（粗网格）都要经过物理性检查
        for figure_id in _preset_ids():
            if figure_id not in swept:
                swept[figure_id] = run_sweep(_coarse(presets.preset(figure_id), quick), workers=workers)
        rows = [row for result in swept.values() for row in result.rows]
        bad = unphysical_rows(rows)
        detail = f"{len(swept)} 个预设共 {len(rows)} 个点，非物理 {len(bad)} 个"
        return ("pass" if not bad else "fail"), detail

    results.append(_timed("physicality_guard", physicality))
    return results


def exit_code(results: List[CheckResult]) -> int:
    return 0 if all(r.passed for r in results if r.invariant) else 1
