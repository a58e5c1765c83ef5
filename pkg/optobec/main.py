"""optobec 命令行入口。

子命令:
    point                 计算单个参数点
    sweep                 自定义一维/二维扫描
    preset <id>           按图编号运行预设扫描
    validate              运行自检

示例:
    optobec preset fig1a --workers 4 --format both
    optobec point --config cavity.ini --temperature 1uK
    optobec sweep --axis delta_over_omega_m 0 2 101 --zeta_mc 300 --zeta_ac 210
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence

if not __package__:
    sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from optobec.tools import presets
from optobec.tools.output import emit_csv, emit_svg
from optobec.tools.sweep import (
    DerivedLink,
    PipelineError,
    SweepAxis,
    SweepSpec,
    run_point,
    run_sweep,
)
from optobec.tools.validate import exit_code, run_checks
from optobec.utils.config import Settings, build_params, parse_quantity, read_params_file
from optobec.utils.errors import ConfigError, OptobecError
from optobec.utils.log import configure_logging, get_logger
from optobec.utils.notify import desktop_notification
from optobec.utils.params import SystemParams

logger = get_logger("CLI")

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
FORMATS = ("csv", "svg", "both")


def _common_parser() -> argparse.ArgumentParser:
    # 默认值一律 SUPPRESS，全局选项写在子命令前后都可以
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--config", type=Path, help="参数文件（key = value，可带单位后缀）")
    common.add_argument("--out", type=Path, help="输出目录，默认 $OPTOBEC_OUT_DIR 或 results")
    common.add_argument("--format", choices=FORMATS, help="输出格式，默认 csv")
    common.add_argument("--sign-convention", choices=Settings.SIGN_CONVENTIONS)
    common.add_argument("--workers", type=int, help="并行进程数")
    common.add_argument("--stability-tol", type=float, help="稳定性容差（相对 ω_m）")
    common.add_argument("--strict", action="store_true", help="任一点出错即以退出码 1 结束")
    common.add_argument("--notify", action="store_true", help="结束后发送桌面通知")
    common.add_argument("-v", "--verbose", action="store_true")

    group = common.add_argument_group("参数覆盖", "与参数文件的键同名，可带单位后缀")
    for name in SystemParams.field_names():
        flags = [f"--{name}"]
        if "_" in name:
            flags.append(f"--{name.replace('_', '-')}")
        group.add_argument(*flags, dest=f"param_{name}", metavar="VALUE")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(
        prog="optobec",
        description="混合光机械腔（机械镜 + BEC）稳态纠缠计算",
        parents=[common],
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("point", parents=[common], help="计算单个参数点")

    sweep = sub.add_parser("sweep", parents=[common], help="自定义扫描")
    sweep.add_argument(
        "--axis", nargs=4, required=True, metavar=("NAME", "START", "STOP", "NUM"), help="第一扫描轴"
    )
    sweep.add_argument("--scale", choices=("linear", "log"), default="linear")
    sweep.add_argument("--axis2", nargs=4, metavar=("NAME", "START", "STOP", "NUM"), help="第二扫描轴")
    sweep.add_argument("--scale2", choices=("linear", "log"), default="linear")
    sweep.add_argument(
        "--link", action="append", default=[], metavar="TARGET=FACTOR*SOURCE", help="派生绑定，可重复"
    )
    sweep.add_argument("--name", default="sweep")
    sweep.add_argument("--quantity", default="E_N", help="SVG 绘制的量，默认 E_N（三个对数负性）")

    figure = sub.add_parser("preset", parents=[common], help="按图编号运行预设扫描")
    figure.add_argument("figure_id", metavar="ID", help=f"可选: {', '.join(presets.FIGURES)}")
    figure.add_argument("--quantity", default=None, help="SVG 绘制的量，缺省使用预设")

    check = sub.add_parser("validate", parents=[common], help="运行自检")
    check.add_argument("--quick", action="store_true", help="缩小网格与样本数")
    return parser


def _settings(args: argparse.Namespace) -> Settings:
    return Settings(
        workers=getattr(args, "workers", None),
        sign_convention=getattr(args, "sign_convention", None),
        stability_tol=getattr(args, "stability_tol", None),
        strict=getattr(args, "strict", None),
        notify=getattr(args, "notify", None),
        out_dir=getattr(args, "out", None),
    )


def _overrides(args: argparse.Namespace) -> Dict[str, float]:
    values: Dict[str, float] = {}
    config = getattr(args, "config", None)
    if config is not None:
        values.update(read_params_file(config))
    for name in SystemParams.field_names():
        text = getattr(args, f"param_{name}", None)
        if text is not None:
            values[name] = parse_quantity(text)
    return values


def _axis(spec: Sequence[str], scale: str) -> SweepAxis:
    name, start, stop, num = spec
    try:
        count = int(num)
    except ValueError:
        raise ConfigError(f"点数必须是整数: {num!r}") from None
    low, high = parse_quantity(start), parse_quantity(stop)
    try:
        if scale == "log":
            return SweepAxis.logspace(name, low, high, count)
        return SweepAxis.linspace(name, low, high, count)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _link(text: str) -> DerivedLink:
    try:
        target, expr = text.split("=", 1)
        factor, source = expr.split("*", 1)
        return DerivedLink(target.strip(), source.strip(), parse_quantity(factor))
    except ValueError as exc:
        raise ConfigError(f"无法解析的派生绑定 {text!r}，格式为 TARGET=FACTOR*SOURCE") from exc


def _write_outputs(result, settings: Settings, fmt: str, quantity: Optional[str]) -> List[Path]:
    written: List[Path] = []
    if fmt in ("csv", "both"):
        written.append(emit_csv(result, settings.out_dir / f"{result.name}.csv"))
    if fmt in ("svg", "both"):
        written.append(emit_svg(result, settings.out_dir / f"{result.name}.svg", quantity))
    return written


def _run_spec(spec: SweepSpec, args: argparse.Namespace, settings: Settings, quantity: Optional[str]) -> int:
    logger.info("开始扫描 %s：%s 个点（%d 进程）", spec.name, "×".join(str(len(a)) for a in spec.axes), settings.workers)
    # 命令行 --stability-tol 优先，其次是预设自带的容差，最后是 Settings（含环境变量）
    tol = getattr(args, "stability_tol", None)
    if tol is None and spec.stability_tol is None:
        tol = settings.stability_tol
    result = run_sweep(
        spec,
        workers=settings.workers,
        paper_sign_convention=settings.paper_sign_convention,
        stability_tol=tol,
    )
    for path in _write_outputs(result, settings, getattr(args, "format", "csv"), quantity):
        print(path)
    if settings.notify:
        desktop_notification(f"{spec.name} 完成，{len(result.rows)} 个点", title="optobec")
    if settings.strict and result.error_count:
        logger.error("--strict: %d 个点计算失败", result.error_count)
        return EXIT_FAILURE
    return EXIT_OK


def cmd_point(args: argparse.Namespace, settings: Settings) -> int:
    params = build_params(presets.BASE, _overrides(args))
    try:
        point = run_point(
            params,
            paper_sign_convention=settings.paper_sign_convention,
            stability_tol=settings.stability_tol,
        )
    except PipelineError as exc:
        logger.error("计算失败 [%s]: %s", exc.stage, exc.cause)
        return EXIT_FAILURE if settings.strict else EXIT_OK

    for key, value in point.as_row().items():
        if value is not None:
            print(f"{key:<14}{value}")
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace, settings: Settings) -> int:
    base = build_params(presets.BASE, _overrides(args))
    try:
        spec = SweepSpec(
            name=args.name,
            base=base,
            axis1=_axis(args.axis, args.scale),
            axis2=_axis(args.axis2, args.scale2) if args.axis2 else None,
            links=tuple(_link(text) for text in args.link),
            plot_quantity=args.quantity,
            stability_tol=settings.stability_tol,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return _run_spec(spec, args, settings, args.quantity)


def cmd_preset(args: argparse.Namespace, settings: Settings) -> int:
    spec = presets.preset(args.figure_id)
    overrides = _overrides(args)
    if overrides:
        spec = replace(spec, base=build_params(spec.base, overrides))
    return _run_spec(spec, args, settings, args.quantity)


def cmd_validate(args: argparse.Namespace, settings: Settings) -> int:
    results = run_checks(quick=args.quick, workers=settings.workers)
    for result in results:
        print(result)
    code = exit_code(results)
    if settings.notify:
        desktop_notification("自检通过" if code == EXIT_OK else "自检失败", title="optobec")
    return code


COMMANDS = {
    "point": cmd_point,
    "sweep": cmd_sweep,
    "preset": cmd_preset,
    "validate": cmd_validate,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(getattr(args, "verbose", False))
    try:
        settings = _settings(args)
        return COMMANDS[args.command](args, settings)
    except (ConfigError, presets.UnknownFigure) as exc:
        logger.error("%s", exc)
        return EXIT_USAGE
    except OptobecError as exc:
        logger.error("%s", exc)
        return EXIT_FAILURE
    except KeyboardInterrupt:
        logger.warning("已中断")
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
