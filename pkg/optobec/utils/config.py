"""配置读取：参数文件（带单位后缀）与运行期设置（环境变量）。

参数文件为扁平的 ``key = value``，键名与 ``SystemParams`` 字段一致::

    cavity_length = 1 mm
    wavelength    = 1000 nm
    power         = 50 mW
    mirror_freq   = 10 MHz      # 带 Hz 类后缀时自动乘 2π
    temperature   = 100 mK

运行期设置可通过参数或环境变量给出:

* ``OPTOBEC_WORKERS``: 扫描使用的进程数，默认 1
* ``OPTOBEC_SIGN_CONVENTION``: ``derived`` 或 ``paper``
* ``OPTOBEC_STABILITY_TOL``: 稳定性容差（相对 ω_m），默认 1e-6
* ``OPTOBEC_STRICT``: ``true`` 时单点出错即以退出码 1 结束
* ``OPTOBEC_NOTIFY``: ``true`` 时长任务结束后发送桌面通知
* ``OPTOBEC_OUT_DIR``: 输出目录，默认 ``results``
"""

from __future__ import annotations

import configparser
import math
import os
import re
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Union

from .errors import ConfigError
from .params import SystemParams

_SECTION = "params"

# 耦合常数与其推导输入
DERIVED_COUPLINGS = {
    "zeta_mc": ("mirror_mass",),
    "zeta_ac": ("atom_number", "lattice_depth_per_photon"),
}

_TWO_PI = 2.0 * math.pi
UNIT_FACTORS: Dict[str, float] = {
    "hz": _TWO_PI,
    "khz": _TWO_PI * 1e3,
    "mhz": _TWO_PI * 1e6,
    "ghz": _TWO_PI * 1e9,
    "rad/s": 1.0,
    "k": 1.0,
    "mk": 1e-3,
    "uk": 1e-6,
    "nk": 1e-9,
    "m": 1.0,
    "mm": 1e-3,
    "um": 1e-6,
    "nm": 1e-9,
    "w": 1.0,
    "mw": 1e-3,
    "uw": 1e-6,
    "kg": 1.0,
    "g": 1e-3,
    "mg": 1e-6,
    "ug": 1e-9,
    "ng": 1e-12,
}
# 仅这两个后缀区分大小写：MHz 为兆赫，mHz 为毫赫
_CASE_SENSITIVE = {"MHz": _TWO_PI * 1e6, "mHz": _TWO_PI * 1e-3}

_VALUE_RE = re.compile(
    r"^\s*(?P<number>[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*(?P<unit>[A-Za-z/]+)?\s*$"
)


def parse_quantity(text: str) -> float:
    """解析 ``"1.07e4"``、``"10 MHz"``、``"100mK"`` 这类数值。"""
    match = _VALUE_RE.match(text)
    if not match:
        raise ConfigError(f"无法解析的数值: {text!r}")
    value = float(match.group("number"))
    unit = match.group("unit")
    if unit is None:
        return value
    if unit in _CASE_SENSITIVE:
        return value * _CASE_SENSITIVE[unit]
    factor = UNIT_FACTORS.get(unit.lower())
    if factor is None:
        raise ConfigError(f"未知的单位后缀: {unit!r}")
    return value * factor


def parse_params_mapping(raw: Mapping[str, Any]) -> Dict[str, float]:
    """把键值映射（字符串或数值）转换为 ``SystemParams`` 可接受的字段字典。"""
    known = set(SystemParams.field_names())
    values: Dict[str, float] = {}
    for key, value in raw.items():
        name = key.strip()
        if name not in known:
            raise ConfigError(f"未知的参数键: {name!r}")
        if value is None:
            continue
        values[name] = parse_quantity(value) if isinstance(value, str) else float(value)
    return values


def read_params_file(path: Union[str, Path]) -> Dict[str, float]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"无法读取配置文件 {path}: {exc}") from exc

    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    parser.optionxform = str  # type: ignore[assignment]
    if not re.search(r"^\s*\[", text, flags=re.MULTILINE):
        text = f"[{_SECTION}]\n{text}"
    try:
        parser.read_string(text, source=str(path))
    except configparser.Error as exc:
        raise ConfigError(f"配置文件格式错误 {path}: {exc}") from exc

    raw: Dict[str, str] = {}
    for section in parser.sections():
        raw.update(parser[section])
    return parse_params_mapping(raw)


def build_params(
    base: Optional[SystemParams] = None, overrides: Optional[Mapping[str, float]] = None
) -> SystemParams:
    """由基础参数与覆盖值组装 ``SystemParams``。

    覆盖值中出现互斥组里的某个键时，同组其它键会被清空，例如给出
    ``delta`` 会清掉基础参数里的 ``delta_o``。覆盖值给出耦合的推导输入
    （``mirror_mass``，或 ``atom_number``/``lattice_depth_per_photon``）
    而没有给出对应的 ``zeta_mc``/``zeta_ac`` 时，基础参数里的耦合值被清空，
    改由推导得到。
    """
    values: Dict[str, Any] = {}
    if base is not None:
        values.update({name: getattr(base, name) for name in SystemParams.field_names()})
    overrides = dict(overrides or {})
    for group in (("finesse", "cavity_decay"), ("delta", "delta_o", "delta_c"), ("atom_freq", "atom_mass")):
        chosen = [name for name in group if name in overrides]
        if chosen:
            for name in group:
                if name not in overrides:
                    values[name] = None
    for target, inputs in DERIVED_COUPLINGS.items():
        if target not in overrides and any(name in overrides for name in inputs):
            values[target] = None
    values.update(overrides)
    try:
        return SystemParams(**values)
    except TypeError as exc:
        raise ConfigError(f"参数不完整: {exc}") from exc


class Settings:
    """运行期设置，参数优先，其次环境变量，最后默认值。"""

    SIGN_CONVENTIONS = ("derived", "paper")

    def __init__(
        self,
        workers: Optional[int] = None,
        sign_convention: Optional[str] = None,
        stability_tol: Optional[float] = None,
        *,
        strict: Optional[bool] = None,
        notify: Optional[bool] = None,
        out_dir: Optional[Union[str, Path]] = None,
    ) -> None:
        try:
            self.workers = workers if workers is not None else int(os.getenv("OPTOBEC_WORKERS", "1"))
            self.stability_tol = (
                stability_tol
                if stability_tol is not None
                else float(os.getenv("OPTOBEC_STABILITY_TOL", "1e-6"))
            )
        except ValueError as exc:
            raise ConfigError(f"环境变量格式错误: {exc}") from exc
        self.sign_convention = (
            sign_convention or os.getenv("OPTOBEC_SIGN_CONVENTION", "derived")
        ).strip().lower()
        self.strict = strict if strict is not None else self._env_flag(os.getenv("OPTOBEC_STRICT", "false"))
        self.notify = notify if notify is not None else self._env_flag(os.getenv("OPTOBEC_NOTIFY", "false"))
        self.out_dir = Path(out_dir or os.getenv("OPTOBEC_OUT_DIR", "results"))

        if self.workers < 1:
            raise ConfigError("workers 至少为 1")
        if not self.stability_tol > 0:
            raise ConfigError("stability_tol 必须为正数")
        if self.sign_convention not in self.SIGN_CONVENTIONS:
            raise ConfigError(f"未知的符号约定: {self.sign_convention!r}，可选 derived / paper")

    @property
    def paper_sign_convention(self) -> bool:
        return self.sign_convention == "paper"

    @staticmethod
    def _env_flag(value: str) -> bool:
        return value.strip().lower() not in {"0", "false", "no", "off", ""}

    def __repr__(self) -> str:
        return (
            f"Settings(workers={self.workers}, sign_convention={self.sign_convention!r}, "
            f"stability_tol={self.stability_tol!r}, strict={self.strict}, notify={self.notify}, "
            f"out_dir={str(self.out_dir)!r})"
        )
