"""实验参数到物理量的换算。

所有内部频率一律使用角频率 (rad/s)。``SystemParams`` 保存实验层面的输入
（腔长、激光、机械镜、BEC、温度），``derive_constants`` 把它们换算成后续
模块直接使用的 ``DerivedParams``。

示例:

>>> p = SystemParams(cavity_length=1e-3, wavelength=1e-6, power=0.05,
...                  mirror_freq=hz_to_rad(10e6), mirror_damping=hz_to_rad(100),
...                  temperature=0.1, finesse=1.07e4, atom_freq=hz_to_rad(10e6),
...                  zeta_mc=300.0, zeta_ac=200.0, delta=hz_to_rad(5e6))
>>> dp = derive_constants(p)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import Optional

import numpy as np
from scipy import constants

from .errors import OptobecError
from .log import get_logger

HBAR = constants.hbar
K_B = constants.k
C_LIGHT = constants.c

logger = get_logger("Params")


class MissingField(OptobecError):
    """缺少必需字段，或互斥字段同时给出/都未给出。"""


class NonPositiveInput(OptobecError, ValueError):
    """长度、质量、功率等物理量不满足正值要求。"""


class NonPositiveFrequency(NonPositiveInput):
    """频率必须严格为正。"""


def hz_to_rad(freq_hz: float) -> float:
    return 2.0 * math.pi * freq_hz


def rad_to_hz(omega: float) -> float:
    return omega / (2.0 * math.pi)


@dataclass(frozen=True)
class SystemParams:
    """实验层面的输入，单位为 SI，频率为 rad/s。

    互斥字段: ``finesse`` / ``cavity_decay`` 二选一；``delta`` / ``delta_o`` /
    ``delta_c`` 三选一；``atom_freq`` / ``atom_mass`` 二选一。
    """

    cavity_length: float
    wavelength: float
    power: float
    mirror_freq: float
    mirror_damping: float
    temperature: float
    finesse: Optional[float] = None
    cavity_decay: Optional[float] = None
    mirror_mass: Optional[float] = None
    atom_freq: Optional[float] = None
    atom_mass: Optional[float] = None
    zeta_mc: Optional[float] = None
    zeta_ac: Optional[float] = None
    atom_number: Optional[float] = None
    lattice_depth_per_photon: Optional[float] = None
    delta: Optional[float] = None
    delta_o: Optional[float] = None
    delta_c: Optional[float] = None
    cavity_freq: Optional[float] = None
    atom_damping: float = 0.0

    @classmethod
    def field_names(cls) -> tuple:
        return tuple(f.name for f in fields(cls))

    def validate(self) -> None:
        """检查字段约束，不满足时抛出 ``MissingField`` 或 ``NonPositiveInput``。"""
        _exactly_one(self, ("finesse", "cavity_decay"))
        _exactly_one(self, ("delta", "delta_o", "delta_c"))
        _exactly_one(self, ("atom_freq", "atom_mass"))

        positive = (
            "cavity_length",
            "wavelength",
            "finesse",
            "cavity_decay",
            "mirror_mass",
            "atom_freq",
            "atom_mass",
            "cavity_freq",
            "atom_number",
        )
        for name in positive:
            value = getattr(self, name)
            if value is not None and not value > 0:
                raise NonPositiveInput(f"{name} 必须为正数，当前值 {value!r}")
        if not self.mirror_freq > 0:
            raise NonPositiveFrequency(f"mirror_freq 必须为正数，当前值 {self.mirror_freq!r}")
        for name in ("power", "mirror_damping", "temperature", "atom_damping"):
            value = getattr(self, name)
            if not value >= 0:
                raise NonPositiveInput(f"{name} 不能为负，当前值 {value!r}")
        for name in ("zeta_mc", "zeta_ac"):
            value = getattr(self, name)
            if value is not None and not value >= 0:
                raise NonPositiveInput(f"{name} 不能为负，当前值 {value!r}")

        if self.zeta_mc is None and self.mirror_mass is None:
            raise MissingField("未给出 zeta_mc 时必须提供 mirror_mass")
        if self.zeta_ac is None and (
            self.atom_number is None or self.lattice_depth_per_photon is None
        ):
            raise MissingField("未给出 zeta_ac 时必须同时提供 atom_number 与 lattice_depth_per_photon")
        if self.delta_c is not None and (
            self.atom_number is None or self.lattice_depth_per_photon is None
        ):
            raise MissingField("使用 delta_c 时必须同时提供 atom_number 与 lattice_depth_per_photon")


@dataclass(frozen=True)
class DerivedParams:
    """换算后的物理量，频率单位 rad/s。

    ``delta`` 与 ``delta_o`` 只有一个非空：前者表示直接给定的有效失谐 Δ，
    后者表示需要自洽求解的 Δ_o。
    """

    kappa: float
    laser_freq: float
    cavity_freq: float
    wavenumber: float
    drive_amplitude: float
    zeta_mc: float
    zeta_ac: float
    atom_freq: float
    recoil_freq: float
    n_thermal: float
    mirror_freq: float
    mirror_damping: float
    temperature: float
    atom_damping: float = 0.0
    delta: Optional[float] = None
    delta_o: Optional[float] = None


def _exactly_one(params: SystemParams, names: tuple) -> None:
    given = [name for name in names if getattr(params, name) is not None]
    if len(given) != 1:
        raise MissingField(f"{' / '.join(names)} 必须且只能给出一个，当前给出: {given or '无'}")


def thermal_occupation(omega_m: float, temperature: float) -> float:
    """机械振子的平衡声子数 n̄ = 1/(exp(ħω_m/k_B T) − 1)，T = 0 时为 0。"""
    if not omega_m > 0:
        raise NonPositiveFrequency(f"omega_m 必须为正数，当前值 {omega_m!r}")
    if temperature < 0:
        raise NonPositiveInput(f"temperature 不能为负，当前值 {temperature!r}")
    if temperature == 0:
        return 0.0
    x = HBAR * omega_m / (K_B * temperature)
    # e^{-x}/(1 - e^{-x})，x 很大或很小时都不会溢出
    return float(np.exp(-x) / -np.expm1(-x))


def mirror_field_coupling(
    cavity_freq: float, mirror_mass: float, mirror_freq: float, cavity_length: float
) -> float:
    """辐射压耦合 ζ = ω_c·sqrt(ħ/(m·ω_m))/L。"""
    return cavity_freq * math.sqrt(HBAR / (mirror_mass * mirror_freq)) / cavity_length


def derive_constants(params: SystemParams) -> DerivedParams:
    """把实验输入换算为 ``DerivedParams``。

    约定:
        - κ = πc/(2LF)，即振幅衰减率（半线宽）；
        - |E| = sqrt(Pκ/(ħω_L))；
        - ζ_mc 未直接给出时用 ω_c ≈ ω_L 计算；
        - Ω 未直接给出时 Ω = 2ħk²/m_a；
        - ζ_ac 未直接给出时 ζ_ac = sqrt(N)·U_o/2；
        - 给出 Δ_c 时 Δ_o = Δ_c + N·U_o/2。
    """
    params.validate()

    if params.cavity_decay is not None:
        kappa = params.cavity_decay
    else:
        kappa = math.pi * C_LIGHT / (2.0 * params.cavity_length * params.finesse)

    wavenumber = 2.0 * math.pi / params.wavelength
    laser_freq = 2.0 * math.pi * C_LIGHT / params.wavelength
    cavity_freq = params.cavity_freq if params.cavity_freq is not None else laser_freq
    drive_amplitude = math.sqrt(params.power * kappa / (HBAR * laser_freq))

    if params.zeta_mc is not None:
        zeta_mc = params.zeta_mc
    else:
        zeta_mc = mirror_field_coupling(
            cavity_freq, params.mirror_mass, params.mirror_freq, params.cavity_length
        )

    if params.zeta_ac is not None:
        zeta_ac = params.zeta_ac
    else:
        zeta_ac = math.sqrt(params.atom_number) * params.lattice_depth_per_photon / 2.0

    if params.atom_freq is not None:
        atom_freq = params.atom_freq
    else:
        atom_freq = 2.0 * HBAR * wavenumber**2 / params.atom_mass

    delta_o = params.delta_o
    if params.delta_c is not None:
        delta_o = params.delta_c + params.atom_number * params.lattice_depth_per_photon / 2.0

    derived = DerivedParams(
        kappa=kappa,
        laser_freq=laser_freq,
        cavity_freq=cavity_freq,
        wavenumber=wavenumber,
        drive_amplitude=drive_amplitude,
        zeta_mc=zeta_mc,
        zeta_ac=zeta_ac,
        atom_freq=atom_freq,
        recoil_freq=atom_freq / 4.0,
        n_thermal=thermal_occupation(params.mirror_freq, params.temperature),
        mirror_freq=params.mirror_freq,
        mirror_damping=params.mirror_damping,
        temperature=params.temperature,
        atom_damping=params.atom_damping,
        delta=params.delta,
        delta_o=delta_o,
    )
    logger.debug("kappa=%.6g rad/s |E|=%.6g rad/s n=%.6g", kappa, drive_amplitude, derived.n_thermal)
    return derived


if __name__ == "__main__":
    demo = SystemParams(
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
    print(derive_constants(demo))
