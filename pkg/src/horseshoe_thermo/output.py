"""Artifact writers: CSV, JSON and SVG, all written atomically.

Floats are serialised with ``repr`` and plots carry no timestamps, so equal
inputs produce byte-identical files.
"""

import csv
import dataclasses
import enum
import io
import json
import logging
import math
import os
import tempfile
from collections.abc import Sequence
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from pydantic import BaseModel  # noqa: E402

from horseshoe_thermo.errors import (  # noqa: E402
    EmptyDataError,
    PreconditionError,
    ResourceError,
)

logger = logging.getLogger(__name__)

FIGURE_SIZE = (6.4, 4.0)
PLOT_KINDS = ("line", "scatter")

plt.rcParams["svg.hashsalt"] = "horseshoe-thermo"
plt.rcParams["svg.fonttype"] = "path"


def atomic_write(path: Path, data: bytes) -> Path:
    """Write ``data`` to a temporary file next to ``path``, then rename it into place.

    Raises:
        ResourceError: If the directory cannot be created or written.
    """
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
        try:
            with os.fdopen(fd, "wb") as handle:
                handle.write(data)
            os.replace(tmp, path)
        except BaseException:
            Path(tmp).unlink(missing_ok=True)
            raise
    except OSError as exc:
        raise ResourceError(f"cannot write {path}: {exc}") from exc
    logger.debug("Wrote %s (%d bytes)", path, len(data))
    return path


def _cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, enum.Enum):
        return str(value.value)
    return str(value)


def write_csv(path: Path, header: Sequence[str], rows: Sequence[Sequence]) -> Path:
    """Write an RFC-4180 CSV table.

    Raises:
        EmptyDataError: If ``rows`` is empty.
    """
    if not rows:
        raise EmptyDataError(f"refusing to write an empty table to {path}")
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\r\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return atomic_write(path, buffer.getvalue().encode("utf-8"))


def to_jsonable(value):
    """Convert reports, enums, arrays and paths into plain JSON values.

    Non-finite floats become the strings ``"inf"``, ``"-inf"`` and ``"nan"``.
    """
    if isinstance(value, BaseModel):
        return to_jsonable(value.model_dump(mode="json"))
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return {f.name: to_jsonable(getattr(value, f.name)) for f in dataclasses.fields(value)}
    if isinstance(value, enum.Enum):
        return value.value
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isfinite(value):
            return value
        return "nan" if math.isnan(value) else ("inf" if value > 0 else "-inf")
    if isinstance(value, Path):
        return value.as_posix()
    if value is None or isinstance(value, str):
        return value
    return str(value)


def write_json(path: Path, payload) -> Path:
    """Write UTF-8 JSON with sorted keys and two-space indentation."""
    text = json.dumps(to_jsonable(payload), indent=2, sort_keys=True, ensure_ascii=False)
    return atomic_write(path, (text + "\n").encode("utf-8"))


def emit_plot(
    path: Path,
    x: Sequence[float],
    series: dict[str, Sequence[float]],
    kind: str = "line",
    title: str = "",
    xlabel: str = "",
    ylabel: str = "",
) -> Path:
    """Render one or more series against ``x`` as a deterministic SVG.

    Args:
        path: Target ``.svg`` file.
        x: Shared abscissae.
        series: Label → ordinates, each the length of ``x``.
        kind: ``"line"`` or ``"scatter"``.
        title: Axes title.
        xlabel: x-axis label.
        ylabel: y-axis label.

    Raises:
        EmptyDataError: If there is no data to plot.
        PreconditionError: If ``kind`` is unknown.
    """
    if kind not in PLOT_KINDS:
        raise PreconditionError(f"plot kind must be one of {PLOT_KINDS}, got {kind!r}")
    xs = np.asarray(x, dtype=float)
    if xs.size == 0 or not series:
        raise EmptyDataError(f"nothing to plot for {path}")

    fig, ax = plt.subplots(figsize=FIGURE_SIZE)
    try:
        for label, ys in series.items():
            ys = np.asarray(ys, dtype=float)
            if kind == "line":
                ax.plot(xs, ys, label=label, linewidth=1.2)
            else:
                ax.scatter(xs, ys, label=label, s=8)
        ax.set_title(title)
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        ax.grid(True, linewidth=0.3)
        if len(series) > 1:
            ax.legend(loc="best", fontsize="small")
        buffer = io.BytesIO()
        fig.savefig(buffer, format="svg", metadata={"Date": None})
    finally:
        plt.close(fig)
    return atomic_write(path, buffer.getvalue())
