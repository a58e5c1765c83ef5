"""各图的参数预设。

公共参数: L = 1 mm，λ = 1000 nm，P = 50 mW，ω_m/2π = 10 MHz，
γ_m/2π = 100 Hz，T = 100 mK，F = 1.07×10⁴，Ω = ω_m。

耦合强度 ζ 以 "Hz" 给出的数值按 s⁻¹ 使用，不乘 2π。
``ζ_mc = i·ζ`` 形式的参照耦合按 5 ng 的镜子质量计算。
"""

from __future__ import annotations

import math
from dataclasses import replace
from typing import Callable, Dict, Tuple

from ..utils.errors import OptobecError
from ..utils.params import C_LIGHT, SystemParams, hz_to_rad, mirror_field_coupling
from .sweep import DELTA_OVER_OMEGA_M, Curve, DerivedLink, SweepAxis, SweepSpec

OMEGA_M = hz_to_rad(10e6)
GAMMA_M = hz_to_rad(100)
REFERENCE_MIRROR_MASS = 5e-12

DETUNING_POINTS = 200
COUPLING_POINTS = 50
TEMPERATURE_POINTS = 51
# 温度图里 ζ_ac = 0 时 BEC 模式完全解耦，需要一个小阻尼才有唯一稳态
FIG2_STABILITY_TOL = 1e-8

BASE = SystemParams(
    cavity_length=1e-3,
    wavelength=1e-6,
    power=50e-3,
    mirror_freq=OMEGA_M,
    mirror_damping=GAMMA_M,
    temperature=0.1,
    finesse=1.07e4,
    atom_freq=OMEGA_M,
    zeta_mc=300.0,
    zeta_ac=210.0,
    delta=0.5 * OMEGA_M,
)


class UnknownFigure(OptobecError, KeyError):
    """未知的图编号。"""

    def __str__(self) -> str:
        return f"未知的图编号: {self.args[0]!r}，可选 {', '.join(FIGURES)}"


def reference_coupling(base: SystemParams = BASE) -> float:
    """ζ = ω_c·sqrt(ħ/(m·ω_m))/L，取 ω_c ≈ ω_L、m = 5 ng。"""
    laser_freq = 2.0 * math.pi * C_LIGHT / base.wavelength
    return mirror_field_coupling(
        laser_freq, REFERENCE_MIRROR_MASS, base.mirror_freq, base.cavity_length
    )


ZETA_REF = reference_coupling()


def _detuning_axis() -> SweepAxis:
    return SweepAxis.linspace(DELTA_OVER_OMEGA_M, 0.0, 2.0, DETUNING_POINTS)


def _temperature_axis(low: float, high: float) -> SweepAxis:
    return SweepAxis.logspace("temperature", low, high, TEMPERATURE_POINTS)


def fig1a() -> SweepSpec:
    return SweepSpec(
        name="fig1a",
        base=BASE,
        axis1=_detuning_axis(),
        axis2=SweepAxis.logspace("zeta_mc", 10.0, 1000.0, COUPLING_POINTS),
        links=(DerivedLink("zeta_ac", "zeta_mc", 0.7),),
        plot_quantity="E_mc",
        description="E_mc vs Δ/ω_m 与 ζ_mc，ζ_ac = 0.7ζ_mc",
    )


def fig1b() -> SweepSpec:
    return SweepSpec(
        name="fig1b",
        base=replace(BASE, zeta_mc=0.01 * ZETA_REF),
        axis1=_detuning_axis(),
        axis2=SweepAxis.logspace("zeta_ac", 10.0, 1000.0, COUPLING_POINTS),
        plot_quantity="E_ac",
        description="E_ac vs Δ/ω_m 与 ζ_ac，ζ_mc = 0.01ζ",
    )


def fig1c() -> SweepSpec:
    return SweepSpec(
        name="fig1c",
        base=replace(BASE, delta=0.6 * OMEGA_M, temperature=1e-6),
        axis1=SweepAxis.logspace("zeta_mc", 1e-7 * OMEGA_M, 1e-5 * OMEGA_M, COUPLING_POINTS),
        axis2=SweepAxis.logspace("zeta_ac", 1e-7 * OMEGA_M, 1e-5 * OMEGA_M, COUPLING_POINTS),
        plot_quantity="E_ma",
        description="E_ma vs ζ_mc/ω_m 与 ζ_ac/ω_m，Δ = 0.6ω_m，T = 1 μK",
    )


# ζ_mc 与 Δ 取在标注范围内，E_mc 在 10 K 仍为正、100 K 以内消失
FIG2A_ZETA_MC = 860.0
FIG2A_DELTA = 0.55 * OMEGA_M


def fig2a() -> SweepSpec:
    return SweepSpec(
        name="fig2a",
        base=replace(
            BASE, zeta_mc=FIG2A_ZETA_MC, zeta_ac=0.0, atom_damping=GAMMA_M, delta=FIG2A_DELTA
        ),
        axis1=_temperature_axis(1e-3, 1e2),
        axis2=SweepAxis.of("zeta_ac", (0.0, 0.4 * FIG2A_ZETA_MC)),
        plot_quantity="E_mc",
        stability_tol=FIG2_STABILITY_TOL,
        description="E_mc vs T，Δ = 0.55ω_m，ζ_mc = 860，ζ_ac ∈ {0, 0.4ζ_mc}",
    )


def _fig2b(name: str, fractions: Tuple[float, float]) -> SweepSpec:
    return SweepSpec(
        name=name,
        base=replace(BASE, zeta_ac=100.0),
        axis1=_temperature_axis(1e-3, 1e2),
        axis2=SweepAxis.of("zeta_mc", tuple(f * ZETA_REF for f in fractions)),
        plot_quantity="E_ac",
        stability_tol=FIG2_STABILITY_TOL,
        description=f"E_ac vs T，ζ_ac = 100，ζ_mc ∈ {{{fractions[0]:g}, {fractions[1]:g}}}·ζ",
    )


def fig2b_caption() -> SweepSpec:
    return _fig2b("fig2b_caption", (0.0, 0.4))


def fig2b_text() -> SweepSpec:
    return _fig2b("fig2b_text", (0.1, 0.4))


def fig2c() -> SweepSpec:
    return SweepSpec(
        name="fig2c",
        base=replace(BASE, delta=0.6 * OMEGA_M),
        axis1=_temperature_axis(1e-7, 1e1),
        axis2=SweepAxis.of("zeta_mc", (1e-3 * OMEGA_M, OMEGA_M)),
        links=(DerivedLink("zeta_ac", "zeta_mc", 1.0),),
        plot_quantity="E_ma",
        stability_tol=FIG2_STABILITY_TOL,
        description="E_ma vs T，ζ_mc = ζ_ac ∈ {0.001, 1}·ω_m",
    )


def fig3() -> SweepSpec:
    return SweepSpec(
        name="fig3",
        base=replace(BASE, zeta_mc=300.0, zeta_ac=200.0, temperature=1e-6, atom_freq=0.9 * OMEGA_M),
        axis1=_detuning_axis(),
        outputs=("c_s", "max_real_part", "E_mc", "E_ac", "E_ma", "nu_min"),
        plot_quantity="E_N",
        description="E_mc、E_ac、E_ma vs Δ/ω_m，Ω = 0.9ω_m，T = 1 μK",
    )


FIG3_CAPTION_FREQ = hz_to_rad(1e6)


def fig3_caption() -> SweepSpec:
    """fig3 的三条曲线各用各的参数：E_mc 去掉 BEC 耦合，E_ac 去掉机械镜耦合，
    E_ma 取 Ω = ω_m = 2π×1 MHz。"""
    return SweepSpec(
        name="fig3_caption",
        base=fig3().base,
        axis1=_detuning_axis(),
        curves=(
            Curve("E_mc", (("zeta_ac", 0.0), ("atom_damping", GAMMA_M))),
            Curve("E_ac", (("zeta_mc", 0.0),)),
            Curve("E_ma", (("mirror_freq", FIG3_CAPTION_FREQ), ("atom_freq", FIG3_CAPTION_FREQ))),
        ),
        plot_quantity="E_N",
        description="E_mc（ζ_ac = 0）、E_ac（ζ_mc = 0）、E_ma（Ω = ω_m = 2π×1 MHz）vs Δ/ω_m",
    )


FIGURES: Dict[str, Callable[[], SweepSpec]] = {
    "fig1a": fig1a,
    "fig1b": fig1b,
    "fig1c": fig1c,
    "fig2a": fig2a,
    "fig2b": fig2b_caption,
    "fig2b_caption": fig2b_caption,
    "fig2b_text": fig2b_text,
    "fig2c": fig2c,
    "fig3": fig3,
    "fig3_caption": fig3_caption,
}


def preset(figure_id: str) -> SweepSpec:
    """按图编号返回扫描配置，``fig2b`` 等同于 ``fig2b_caption``。"""
    try:
        builder = FIGURES[figure_id.strip().lower()]
    except KeyError:
        raise UnknownFigure(figure_id) from None
    return builder()


# 调用示例
if __name__ == "__main__":
    for figure_id in FIGURES:
        spec = preset(figure_id)
        shape = "×".join(str(len(axis)) for axis in spec.axes)
        print(f"{figure_id:<14}{shape:<10}{spec.description}")
