"""optobec 异常基类。"""

from __future__ import annotations


class OptobecError(RuntimeError):
    """所有计算流程异常的公共基类。"""


class ConfigError(OptobecError, ValueError):
    """配置文件、命令行参数或环境变量无法解析。"""
