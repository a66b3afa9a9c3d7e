import logging, math, os
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path

import numpy as np

logger = logging.getLogger(__name__)

FORMAT_VERSION = "1"
JOBS_ENV_VAR = "RSL_JOBS"


class PreconditionError(ValueError):
    """A documented precondition of an operation does not hold. The message names it."""


class PrecisionExhaustedError(PreconditionError):
    """A continued-fraction prefix is too short to decide the requested claim."""


class DirectLimitError(PreconditionError):
    """A prime-power Gauss sum component is too large to evaluate term by term."""


class QuadratureError(RuntimeError):
    def __init__(self, message: str, achieved: float):
        super().__init__(f"{message} (achieved tolerance {achieved:.3e})")
        self.achieved = achieved


def get_rslab_version() -> str:
    try:
        return version("rslab")
    except PackageNotFoundError:
        return "0+unknown"


def relative_to_absolute_path(path: str | Path, pwd: str | Path) -> Path:
    if Path(path).is_absolute():
        return Path(path)
    return Path(Path(pwd) / path).resolve(False)


def default_jobs() -> int:
    """Worker count from ``RSL_JOBS``, or 1 when unset."""
    raw = os.environ.get(JOBS_ENV_VAR, "")
    if not raw:
        return 1
    if not raw.strip().isdigit() or int(raw) < 1:
        raise ValueError(f"{JOBS_ENV_VAR} must be a positive integer. Got: {raw}")
    return int(raw)


def parse_grid(text: str) -> np.ndarray:
    """Parses ``start:stop:step``; the stop value is included when within half a step."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"Expecting a grid of the form START:STOP:STEP. Got: {text}")
    start, stop, step = (float(part) for part in parts)
    if step <= 0 or stop < start:
        raise ValueError(f"Grid needs step > 0 and stop >= start. Got: {text}")
    count = int(math.floor((stop - start) / step + 0.5)) + 1
    return start + step * np.arange(count, dtype=float)


def parse_int_list(text: str) -> list[int]:
    try:
        values = [int(item) for item in text.split(",") if item.strip()]
    except ValueError:
        raise ValueError(f"Expecting a comma-separated list of integers. Got: {text}") from None
    if not values:
        raise ValueError("Expecting at least one integer")
    return values


def fit_slope(xs, ys) -> float:
    """Least-squares slope of ys against xs."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.size < 2:
        return float("nan")
    slope, _ = np.polyfit(xs, ys, 1)
    return float(slope)
