"""稳态协方差矩阵：Lyapunov 方程求解与二阶矩方程积分。

约定 V_ij = ⟨δR_i δR_j + δR_j δR_i⟩/2，单模真空为 I/2。
"""

from __future__ import annotations

import math
from typing import Optional

import numpy as np
from scipy import linalg

from .errors import OptobecError
from .log import get_logger

logger = get_logger("Lyapunov")
moments_logger = get_logger("Moments")

RESIDUAL_TOL = 1e-10
DIVERGENCE_FACTOR = 1e12


class UnstableDrift(OptobecError):
    """漂移矩阵不稳定，稳态不存在。"""


class SingularSystem(OptobecError):
    """Kronecker 线性系统奇异（存在 λ_i + λ_j = 0）。"""


class StepTooLarge(OptobecError):
    """积分发散，通常是步长过大。"""


def symmetrize(V: np.ndarray) -> np.ndarray:
    return 0.5 * (V + V.T)


def _generator(M: np.ndarray) -> np.ndarray:
    # 行优先展平: vec(MV) = (M ⊗ I)vec(V), vec(VMᵀ) = (I ⊗ M)vec(V)
    identity = np.eye(M.shape[0])
    return np.kron(M, identity) + np.kron(identity, M)


def lyapunov_residual(M: np.ndarray, V: np.ndarray, D: np.ndarray) -> float:
    return float(np.max(np.abs(M @ V + V @ M.T + D)))


def solve_lyapunov(
    M: np.ndarray,
    D: np.ndarray,
    *,
    check_stability: bool = True,
    tol: Optional[float] = None,
) -> np.ndarray:
    """求解 MV + VMᵀ = −D。

    向量化为 (I⊗M + M⊗I)·vec(V) = −vec(D) 的 36×36 稠密线性方程，
    部分主元 LU 分解后做一步迭代精化，最后对称化。

    Args:
        M: 漂移矩阵。
        D: 扩散矩阵。
        check_stability: 为假时跳过稳定性前置检查（仅用于诊断）。
        tol: 稳定性容差，缺省为 1e-6·max|M|。
    """
    M = np.asarray(M, dtype=float)
    D = np.asarray(D, dtype=float)
    n = M.shape[0]

    if check_stability:
        max_real = float(np.max(np.linalg.eigvals(M).real))
        threshold = tol if tol is not None else 1e-6 * (float(np.max(np.abs(M))) or 1.0)
        if not max_real < -threshold:
            raise UnstableDrift(f"漂移矩阵不稳定: max Re λ = {max_real:.6g}")

    K = _generator(M)
    rhs = -D.reshape(-1)
    lu, piv = linalg.lu_factor(K, check_finite=True)
    pivots = np.abs(np.diag(lu))
    if pivots.min() <= np.finfo(float).eps * n * n * pivots.max():
        raise SingularSystem("Lyapunov 线性系统奇异，M 存在互为相反数的特征值")

    vec = linalg.lu_solve((lu, piv), rhs)
    vec = vec + linalg.lu_solve((lu, piv), rhs - K @ vec)
    V = symmetrize(vec.reshape(n, n))

    residual = lyapunov_residual(M, V, D)
    bound = RESIDUAL_TOL * float(np.max(np.abs(D)))
    if residual > bound and residual > 0.0:
        logger.warning("Lyapunov 残差 %.3g 超出界限 %.3g", residual, bound)
    return V


def default_step(M: np.ndarray) -> float:
    """默认积分步长: 最快振荡与最快衰减都至少分辨 100 步。"""
    eigenvalues = np.linalg.eigvals(M)
    omega_max = float(np.max(np.abs(eigenvalues.imag)))
    decay_max = float(np.max(np.abs(np.diag(M))))
    rate = max(omega_max, decay_max)
    if rate == 0.0:
        return 1.0
    return 0.01 / rate


def integrate_moments(
    M: np.ndarray,
    D: np.ndarray,
    V0: np.ndarray,
    horizon: float,
    step: Optional[float] = None,
) -> np.ndarray:
    """经典四阶 Runge-Kutta 积分 V̇ = MV + VMᵀ + D。

    方程线性且系数恒定，单步 RK4 是 vec(V) 上的仿射映射
    v → P·v + q。步数 N = ceil(horizon/step)（步长随之微调以恰好落在
    horizon），N 步迭代按二进制倍增合成，与逐步迭代结果相同，
    因而 50/γ_m 量级的长时间窗也可以直接计算。
    """
    M = np.asarray(M, dtype=float)
    D = np.asarray(D, dtype=float)
    V = symmetrize(np.asarray(V0, dtype=float))
    if step is None:
        step = default_step(M)
    if not step > 0:
        raise ValueError("step 必须为正数")
    if not horizon >= step:
        raise ValueError("horizon 不能小于 step")

    n = M.shape[0]
    n_steps = int(math.ceil(horizon / step - 1e-9))
    h = horizon / n_steps

    Z = h * _generator(M)
    identity = np.eye(n * n)
    Z2 = Z @ Z
    Z3 = Z2 @ Z
    P = identity + Z + Z2 / 2.0 + Z3 / 6.0 + Z3 @ Z / 24.0
    q = h * (identity + Z / 2.0 + Z2 / 6.0 + Z3 / 24.0) @ D.reshape(-1)

    start_norm = max(float(np.max(np.abs(V))), float(np.max(np.abs(D))) * h, np.finfo(float).tiny)
    remaining = n_steps
    while remaining:
        if remaining & 1:
            V = symmetrize((P @ V.reshape(-1) + q).reshape(n, n))
            _check_divergence(V, start_norm)
        remaining >>= 1
        if remaining:
            q = P @ q + q
            P = P @ P
    moments_logger.debug("RK4 积分 %d 步，步长 %.3g s", n_steps, h)
    return V


def _check_divergence(V: np.ndarray, start_norm: float) -> None:
    norm = float(np.max(np.abs(V)))
    if not math.isfinite(norm) or norm > DIVERGENCE_FACTOR * start_norm:
        raise StepTooLarge(f"矩阵范数增长到 {norm:.3g}，请减小步长")
