"""高斯态两体约化与纠缠度量：对数负性、Simon 判据、物理性检查。"""

from __future__ import annotations

import math
from enum import Enum
from typing import NamedTuple, Tuple

import numpy as np
from scipy import linalg

from .errors import OptobecError
from .log import get_logger

logger = get_logger("Gaussian")

PHYSICALITY_TOL = 1e-9
DISCRIMINANT_TOL = 1e-12


class UnphysicalState(OptobecError):
    """协方差矩阵违反不确定性关系，通常意味着上游求解或稳定性出错。"""


class OddDimension(OptobecError, ValueError):
    """协方差矩阵维数必须为偶数。"""


class BipartitePartition(Enum):
    """两体划分：保留的两个模式（A 在前）及其在 6×6 矩阵中的下标。"""

    MIRROR_FIELD = ("mc", (0, 1, 4, 5))
    ATOM_FIELD = ("ac", (2, 3, 4, 5))
    MIRROR_ATOM = ("ma", (0, 1, 2, 3))

    @property
    def label(self) -> str:
        return self.value[0]

    @property
    def indices(self) -> Tuple[int, ...]:
        return self.value[1]


class Negativity(NamedTuple):
    value: float
    epsilon: float


def symplectic_form(n_modes: int) -> np.ndarray:
    return linalg.block_diag(*([np.array([[0.0, 1.0], [-1.0, 0.0]])] * n_modes))


def reduce(V: np.ndarray, partition: BipartitePartition) -> np.ndarray:
    """去掉被追迹模式的行与列，得到 4×4 约化协方差矩阵。"""
    idx = np.array(partition.indices)
    return np.array(V[np.ix_(idx, idx)], dtype=float)


def blocks(Vr: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """拆分为 𝒳（模式 A）、𝒴（模式 B）、𝒵（关联）三个 2×2 块。"""
    return Vr[:2, :2], Vr[2:, 2:], Vr[:2, 2:]


def seralian(Vr: np.ndarray) -> float:
    """Σ(V) = det𝒳 + det𝒴 − 2det𝒵（部分转置形式）。"""
    X, Y, Z = blocks(Vr)
    return float(np.linalg.det(X) + np.linalg.det(Y) - 2.0 * np.linalg.det(Z))


def symplectic_eigenvalues(V: np.ndarray) -> np.ndarray:
    """辛本征值：iσV 特征值的绝对值，每对只取一个，升序排列。"""
    V = np.asarray(V, dtype=float)
    if V.ndim != 2 or V.shape[0] != V.shape[1]:
        raise ValueError("协方差矩阵必须是方阵")
    if V.shape[0] % 2:
        raise OddDimension(f"维数 {V.shape[0]} 不是偶数")
    sigma = symplectic_form(V.shape[0] // 2)
    values = np.sort(np.abs(np.linalg.eigvals(1j * sigma @ V)))
    return values[::2]


def check_physicality(V: np.ndarray) -> Tuple[bool, float]:
    """所有辛本征值 ≥ 1/2 − 1e-9 时为物理态，同时返回最小辛本征值。"""
    nu_min = float(symplectic_eigenvalues(V)[0])
    return nu_min >= 0.5 - PHYSICALITY_TOL, nu_min


def partial_transpose(Vr: np.ndarray) -> np.ndarray:
    """对模式 B 做 p_B → −p_B。"""
    flip = np.diag([1.0, 1.0, 1.0, -1.0])
    return flip @ Vr @ flip


def ppt_epsilon(Vr: np.ndarray) -> float:
    """部分转置后协方差矩阵的最小辛本征值（特征值路径）。"""
    return float(symplectic_eigenvalues(partial_transpose(Vr))[0])


def _epsilon(Vr: np.ndarray) -> float:
    physical, nu_min = check_physicality(Vr)
    if not physical:
        raise UnphysicalState(f"约化态不满足不确定性关系: ν_min = {nu_min:.12g}")

    sigma = seralian(Vr)
    det_v = float(np.linalg.det(Vr))
    disc = sigma * sigma - 4.0 * det_v
    if disc < 0.0:
        if disc < -DISCRIMINANT_TOL * max(1.0, sigma * sigma):
            raise UnphysicalState(f"Σ² − 4detV = {disc:.6g} < 0")
        disc = 0.0
    # (Σ − √disc)/2 = 2detV/(Σ + √disc)，后者没有相消误差
    denom = sigma + math.sqrt(disc)
    if denom <= 0.0:
        raise UnphysicalState(f"Σ(V) = {sigma:.6g} 非正")
    return math.sqrt(max(2.0 * det_v / denom, 0.0))


def log_negativity(Vr: np.ndarray) -> Negativity:
    """E_N = max(0, −ln 2ε)，同时返回 ε 便于阈值附近的后处理。

    ε = 2^{-1/2}·{Σ − [Σ² − 4detV]^{1/2}}^{1/2}。
    """
    epsilon = _epsilon(Vr)
    if epsilon == 0.0:
        raise UnphysicalState("ε = 0")
    return Negativity(max(0.0, -math.log(2.0 * epsilon)), epsilon)


def simon_criterion(Vr: np.ndarray) -> bool:
    """Simon PPT 判据：4detV < Σ(V) − 1/4 时纠缠。

    对物理态该不等式与 ε < 1/2 等价；这里直接比较与对数负性共用的 ε，
    两者的判定因而严格一致。
    """
    return _epsilon(Vr) < 0.5
