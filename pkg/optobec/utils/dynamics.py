"""线性化涨落动力学：漂移矩阵、扩散矩阵与稳定性判定。

固定模式顺序 R = (δq_m, δp_m, δq_a, δp_a, δX, δY)，所有 6×6 矩阵共用。
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum
from fractions import Fraction
from typing import List, Optional

import numpy as np

from .errors import OptobecError
from .log import get_logger
from .meanfield import MeanField
from .params import DerivedParams

logger = get_logger("Dynamics")

N_QUADRATURES = 6


class Mode(IntEnum):
    Q_M = 0
    P_M = 1
    Q_A = 2
    P_A = 3
    X = 4
    Y = 5


MODE_ORDERING = tuple(mode.name.lower() for mode in Mode)


class EigenSolverFailure(OptobecError):
    """特征值求解不收敛。"""


@dataclass(frozen=True)
class StabilityReport:
    """稳定性判定结果。

    ``hurwitz_determinants`` 是按 ``scale`` 缩放后的特征多项式
    det(xI − M/scale) 的 Hurwitz 主子式；缩放不改变符号。
    """

    max_real_part: float
    eigen_stable: bool
    hurwitz_stable: bool
    hurwitz_determinants: List[float]
    marginal: bool
    tol: float
    scale: float = 1.0
    eigenvalues: Optional[np.ndarray] = field(default=None, repr=False, compare=False)

    @property
    def label(self) -> str:
        if self.eigen_stable:
            return "stable"
        return "marginal" if self.marginal else "unstable"


def build_drift(dp: DerivedParams, mf: MeanField) -> np.ndarray:
    """按线性化 Heisenberg-Langevin 方程组装漂移矩阵 M。"""
    M = np.zeros((N_QUADRATURES, N_QUADRATURES))
    M[Mode.Q_M, Mode.P_M] = dp.mirror_freq
    M[Mode.P_M, Mode.Q_M] = -dp.mirror_freq
    M[Mode.P_M, Mode.P_M] = -dp.mirror_damping
    M[Mode.P_M, Mode.X] = mf.chi_mc
    M[Mode.Q_A, Mode.P_A] = dp.atom_freq
    M[Mode.P_A, Mode.Q_A] = -dp.atom_freq
    M[Mode.P_A, Mode.P_A] = -dp.atom_damping
    M[Mode.P_A, Mode.X] = -mf.chi_ac
    M[Mode.X, Mode.X] = -dp.kappa
    M[Mode.X, Mode.Y] = mf.delta_eff
    M[Mode.Y, Mode.X] = -mf.delta_eff
    M[Mode.Y, Mode.Y] = -dp.kappa
    M[Mode.Y, Mode.Q_M] = mf.chi_mc
    M[Mode.Y, Mode.Q_A] = -mf.chi_ac
    return M


def build_diffusion(dp: DerivedParams) -> np.ndarray:
    """扩散矩阵 D = diag(0, γ_m(2n̄+1), 0, γ_a, κ, κ)。

    真空协方差取 I/2；腔输入噪声给出 X、Y 的 κ，机械布朗噪声给出 p_m 的
    γ_m(2n̄+1)。γ_a 为可选的原子阻尼（默认 0），配真空噪声。
    """
    return np.diag(
        [
            0.0,
            dp.mirror_damping * (2.0 * dp.n_thermal + 1.0),
            0.0,
            dp.atom_damping,
            dp.kappa,
            dp.kappa,
        ]
    )


def characteristic_polynomial(M: np.ndarray) -> np.ndarray:
    """Faddeev–LeVerrier 递推求 det(xI − M) 的系数（首项为 1）。

    不依赖特征值求解器，可与 ``np.poly`` 交叉校验。
    """
    n = M.shape[0]
    coeffs = np.zeros(n + 1)
    coeffs[0] = 1.0
    identity = np.eye(n)
    aux = np.zeros_like(M)
    for k in range(1, n + 1):
        aux = M @ aux + coeffs[k - 1] * identity
        coeffs[k] = -np.trace(M @ aux) / k
    return coeffs


def hurwitz_matrix(coeffs: np.ndarray) -> np.ndarray:
    n = len(coeffs) - 1
    H = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            idx = 2 * i - j + 1
            if 0 <= idx <= n:
                H[i, j] = coeffs[idx]
    return H


def hurwitz_determinants(coeffs: np.ndarray) -> List[float]:
    """Hurwitz 矩阵的各阶顺序主子式，整数精确运算。

    浮点系数都是二进制有理数，统一乘以 2 的幂后成为整数矩阵，
    每个主子式用带行交换的无分数消元（Bareiss）精确求出。
    """
    H = hurwitz_matrix(coeffs)
    n = H.shape[0]
    exact = [[Fraction(float(v)) for v in row] for row in H]
    denominator = 1
    for row in exact:
        for v in row:
            denominator = max(denominator, v.denominator)
    ints = [[int(v * denominator) for v in row] for row in exact]

    return [
        float(Fraction(_bareiss_det([row[:k] for row in ints[:k]]), denominator**k))
        for k in range(1, n + 1)
    ]


def _bareiss_det(rows: List[List[int]]) -> int:
    a = [row[:] for row in rows]
    n = len(a)
    sign = 1
    previous = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // previous
        previous = a[k][k]
    return sign * a[n - 1][n - 1]


def stability(M: np.ndarray, tol: float) -> StabilityReport:
    """特征值判据与 Routh-Hurwitz 判据同时给出。

    ``max_real_part`` 落在 (−tol, tol) 内视为临界（marginal），按不稳定处理。
    """
    if not tol > 0:
        raise ValueError("tol 必须为正数")
    try:
        eigenvalues = np.linalg.eigvals(M)
    except np.linalg.LinAlgError as exc:
        raise EigenSolverFailure(f"漂移矩阵特征值求解失败: {exc}") from exc
    if not np.all(np.isfinite(eigenvalues)):
        raise EigenSolverFailure("漂移矩阵特征值包含非有限值")

    max_real = float(np.max(eigenvalues.real))
    scale = float(np.max(np.abs(M))) or 1.0
    coeffs = characteristic_polynomial(M / scale)
    minors = hurwitz_determinants(coeffs)
    hurwitz_ok = coeffs[0] > 0 and all(m > 0 for m in minors)

    report = StabilityReport(
        max_real_part=max_real,
        eigen_stable=max_real < -tol,
        hurwitz_stable=bool(hurwitz_ok),
        hurwitz_determinants=minors,
        marginal=abs(max_real) < tol,
        tol=tol,
        scale=scale,
        eigenvalues=eigenvalues,
    )
    if report.eigen_stable != report.hurwitz_stable and not report.marginal:
        logger.debug("特征值判据与 Hurwitz 判据不一致: max Re λ = %.6g", max_real)
    return report
