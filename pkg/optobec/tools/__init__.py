from .sweep import Curve, SweepAxis, SweepSpec, SweepResult, DerivedLink, PipelineError, run_point, run_sweep
from .presets import preset, UnknownFigure
from .output import emit_csv, emit_svg, load_csv
from .validate import run_checks

__all__ = [
    "Curve",
    "SweepAxis",
    "SweepSpec",
    "SweepResult",
    "DerivedLink",
    "PipelineError",
    "run_point",
    "run_sweep",
    "preset",
    "UnknownFigure",
    "emit_csv",
    "emit_svg",
    "load_csv",
    "run_checks",
]
