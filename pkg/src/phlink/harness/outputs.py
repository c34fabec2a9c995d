"""Deterministic artifact serialization: CSV tables and SVG figures.

Artifacts are produced as in-memory ``name -> text`` bundles so the same
code path serves both the HTTP service (which returns them inline) and
the CLI (which writes them to disk).  Runs are reproducible to the byte:
CSV floats use shortest round-trip formatting and SVG output is rendered
with a fixed hash salt and no embedded timestamps.
"""

from __future__ import annotations

import csv
import io
from pathlib import Path
from typing import Any, Sequence

import numpy as np

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

__all__ = [
    "ArtifactExistsError",
    "format_cell",
    "render_csv",
    "render_figure",
    "write_bundle",
    "run_directory",
]


class ArtifactExistsError(FileExistsError):
    """An output path already exists and overwrite was not requested."""


def format_cell(value: Any) -> str:
    """One CSV cell: shortest round-trip float text, lowercase booleans."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(float(value))
    if isinstance(value, np.integer):
        return str(int(value))
    return str(value)


def render_csv(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_cell(cell) for cell in row])
    return buf.getvalue()


def render_figure(fig: "plt.Figure", salt: str) -> str:
    """Serialize a figure to SVG text with run-stable identifiers."""
    with plt.rc_context({"svg.hashsalt": salt}):
        buf = io.StringIO()
        fig.savefig(buf, format="svg", metadata={"Date": None})
    plt.close(fig)
    return buf.getvalue()


def run_directory(out_dir: str | Path, run_id: str) -> Path:
    return Path(out_dir) / run_id


def write_bundle(
    bundle: dict[str, str],
    out_dir: str | Path,
    run_id: str,
    force: bool = False,
) -> Path:
    """Write every artifact under ``out_dir/run_id/``.

    Refuses to overwrite an existing artifact unless ``force`` is set, so
    identical reruns cannot silently clobber earlier results.
    """
    target = run_directory(out_dir, run_id)
    if not force:
        clashes = [name for name in bundle if (target / name).exists()]
        if clashes:
            raise ArtifactExistsError(
                f"refusing to overwrite existing artifacts in {target}: "
                f"{', '.join(sorted(clashes))} (use --force to replace)"
            )
    target.mkdir(parents=True, exist_ok=True)
    for name, content in bundle.items():
        (target / name).write_text(content)
    return target
