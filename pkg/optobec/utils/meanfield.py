"""腔场、机械镜与 BEC 原子镜的经典稳态（不动点）。

两种工作模式:

* Δ 模式: 有效失谐 Δ 直接作为自变量（各图均如此），闭式求解；
* Δ_o 模式: 给定 Δ_o，腔内强度 I = |c_s|² 满足三次自洽方程
  ``I·(κ² + (Δ_o − ηI)²) = |E|²``，可能出现光学双稳。
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from .errors import OptobecError
from .log import get_logger
from .params import DerivedParams

logger = get_logger("MeanField")

ROOT_RESIDUAL_TOL = 1e-10
_IMAG_TOL = 1e-7
_DOUBLE_ROOT_TOL = 1e-6
_NEWTON_STEPS = 50


class NoRealRoot(OptobecError):
    """三次自洽方程没有非负实根（κ > 0 时不应出现）。"""


class SolverTolerance(OptobecError):
    """根的相对残差超过 ``ROOT_RESIDUAL_TOL``。"""


@dataclass(frozen=True)
class MeanField:
    """经典不动点。c_s 取实数且非负，p_ms = p_as = 0。"""

    c_s: float
    q_ms: float
    q_as: float
    chi_mc: float
    chi_ac: float
    delta_eff: float

    @property
    def intensity(self) -> float:
        return self.c_s * self.c_s


def effective_nonlinearity(dp: DerivedParams, paper_sign_convention: bool = False) -> float:
    """η：有效失谐随腔内强度的移动率，Δ = Δ_o − η·|c_s|²。

    由不动点直接代入得到 η = ζ_mc²/ω_m + ζ_ac²/Ω；``paper_sign_convention``
    为真时取原子项的相反符号。
    """
    sign = -1.0 if paper_sign_convention else 1.0
    return dp.zeta_mc**2 / dp.mirror_freq + sign * dp.zeta_ac**2 / dp.atom_freq


def _mean_field(dp: DerivedParams, c_s: float, delta_eff: float) -> MeanField:
    intensity = c_s * c_s
    return MeanField(
        c_s=c_s,
        q_ms=dp.zeta_mc * intensity / dp.mirror_freq,
        q_as=-dp.zeta_ac * intensity / dp.atom_freq,
        chi_mc=dp.zeta_mc * c_s * math.sqrt(2.0),
        chi_ac=dp.zeta_ac * c_s * math.sqrt(2.0),
        delta_eff=delta_eff,
    )


def steady_state_given_delta(dp: DerivedParams, delta: float) -> MeanField:
    """有效失谐 Δ 已知时的不动点：c_s = |E|/sqrt(κ² + Δ²)。"""
    if not dp.kappa > 0:
        raise ValueError("kappa 必须为正数")
    c_s = dp.drive_amplitude / math.hypot(dp.kappa, delta)
    return _mean_field(dp, c_s, delta)


def steady_state_given_delta_o(
    dp: DerivedParams, delta_o: float, *, paper_sign_convention: bool = False
) -> List[Tuple[MeanField, bool]]:
    """Δ_o 已知时求三次方程的全部非负实根。

    返回按强度递增排列的 ``(MeanField, stable_branch)`` 列表；斜率判据
    dI/d|E|² < 0 的根（双稳中间支）标记为不稳定。双稳折点处的重根只
    返回一次，同样标记为不稳定。
    """
    if not dp.kappa > 0:
        raise ValueError("kappa 必须为正数")
    kappa = dp.kappa
    eta = effective_nonlinearity(dp, paper_sign_convention)
    drive_sq = dp.drive_amplitude**2

    if eta == 0.0:
        intensity = drive_sq / (kappa**2 + delta_o**2)
        return [(_mean_field(dp, math.sqrt(intensity), delta_o), True)]

    # 无量纲化: u = ηI/κ, d = Δ_o/κ, s = |E|²η/κ³  =>  u³ − 2d·u² + (1 + d²)·u − s = 0
    d = delta_o / kappa
    s = drive_sq * eta / kappa**3
    coeffs = np.array([1.0, -2.0 * d, 1.0 + d * d, -s])

    # 伴随矩阵特征值；相距在 _DOUBLE_ROOT_TOL 内的实根按重根（双稳折点）处理
    raw = np.roots(coeffs)
    real = sorted(
        float(root.real) for root in raw if abs(root.imag) <= _IMAG_TOL * max(1.0, abs(root))
    )
    candidates = []
    for cluster in _clusters(real):
        fold = len(cluster) > 1
        if fold:
            u = _newton_polish(np.polyder(coeffs), float(np.mean(cluster)))
        else:
            u = _newton_polish(coeffs, cluster[0])
        intensity = u * kappa / eta
        if intensity < 0.0:
            if intensity > -_IMAG_TOL * max(1.0, drive_sq / kappa**2):
                intensity, u = 0.0, 0.0
            else:
                continue
        candidates.append((intensity, u, fold))

    if not candidates:
        raise NoRealRoot(f"Δ_o={delta_o:.6g} 时三次方程无非负实根")

    branches: List[Tuple[MeanField, bool]] = []
    seen: List[float] = []
    for intensity, u, fold in sorted(candidates):
        if any(abs(intensity - other) <= 1e-9 * max(1.0, intensity) for other in seen):
            continue
        seen.append(intensity)
        residual = _relative_residual(coeffs, u)
        if residual > ROOT_RESIDUAL_TOL:
            raise SolverTolerance(f"根 I={intensity:.6g} 相对残差 {residual:.3g} 超出容差")
        slope = 3.0 * u * u - 4.0 * d * u + 1.0 + d * d
        c_s = math.sqrt(intensity)
        branches.append((_mean_field(dp, c_s, delta_o - eta * intensity), not fold and slope > 0.0))
        if fold:
            logger.debug("Δ_o=%.6g 处于双稳折点，I=%.6g 为重根", delta_o, intensity)

    if len(branches) > 1:
        logger.debug("Δ_o=%.6g 处出现 %d 个不动点分支", delta_o, len(branches))
    return branches


def _clusters(values: List[float]) -> List[List[float]]:
    groups: List[List[float]] = []
    for value in values:
        if groups and abs(value - groups[-1][-1]) <= _DOUBLE_ROOT_TOL * max(1.0, abs(value)):
            groups[-1].append(value)
        else:
            groups.append([value])
    return groups


def _newton_polish(coeffs: np.ndarray, u: float) -> float:
    """Newton 迭代，只接受使相对残差下降的步长。"""
    derivative = np.polyder(coeffs)
    best = _relative_residual(coeffs, u)
    for _ in range(_NEWTON_STEPS):
        slope = float(np.polyval(derivative, u))
        if best == 0.0 or slope == 0.0:
            break
        trial = u - float(np.polyval(coeffs, u)) / slope
        residual = _relative_residual(coeffs, trial)
        if not residual < best:
            break
        u, best = trial, residual
    return float(u)


def _relative_residual(coeffs: np.ndarray, u: float) -> float:
    terms = coeffs * u ** np.arange(len(coeffs) - 1, -1, -1)
    scale = float(np.sum(np.abs(terms)))
    if scale == 0.0:
        return 0.0
    return abs(float(np.sum(terms))) / scale


if __name__ == "__main__":
    from .params import SystemParams, derive_constants, hz_to_rad

    demo = derive_constants(
        SystemParams(
            cavity_length=1e-3,
            wavelength=1e-6,
            power=0.05,
            mirror_freq=hz_to_rad(10e6),
            mirror_damping=hz_to_rad(100),
            temperature=0.1,
            finesse=1.07e4,
            atom_freq=hz_to_rad(10e6),
            zeta_mc=300.0,
            zeta_ac=200.0,
            delta=hz_to_rad(5e6),
        )
    )
    print(steady_state_given_delta(demo, demo.delta))
