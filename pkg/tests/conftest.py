from dataclasses import replace

import numpy as np
import pytest

from optobec.tools import presets
from optobec.utils.params import DerivedParams, SystemParams, hz_to_rad


@pytest.fixture
def base_params() -> SystemParams:
    """Fig. 1 公共参数，Δ = 0.5ω_m。"""
    return presets.BASE


@pytest.fixture
def entangled_params() -> SystemParams:
    """ζ_ac = 0、BEC 模式带小阻尼的 fig2a 基础参数点，E_mc > 0。"""
    return replace(presets.fig2a().base, zeta_ac=0.0)


@pytest.fixture
def detuned_atom_params() -> SystemParams:
    """Ω = 0.9ω_m，机械镜与原子镜不简并，所有模式都有光学阻尼。"""
    return replace(presets.BASE, atom_freq=0.9 * hz_to_rad(10e6))


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)


def make_derived(**overrides) -> DerivedParams:
    """无量纲的 DerivedParams，便于手算。"""
    values = dict(
        kappa=1.0,
        laser_freq=1.0,
        cavity_freq=1.0,
        wavenumber=1.0,
        drive_amplitude=2.0,
        zeta_mc=1.0,
        zeta_ac=0.0,
        atom_freq=1.0,
        recoil_freq=0.25,
        n_thermal=0.0,
        mirror_freq=1.0,
        mirror_damping=0.0,
        temperature=0.0,
    )
    values.update(overrides)
    return DerivedParams(**values)


@pytest.fixture
def derived_factory():
    return make_derived
