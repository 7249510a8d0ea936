"""Artifact writers: CSV tables, JSON documents, CCF1 point files, SVG plots.

Every writer is atomic (temp file next to the target, then os.replace), so a
crash never leaves a partial file under the final name.  JSON artifacts embed
the effective config and the code-version tag; CSV artifacts carry the same
information in a single leading comment line.  Apart from fields named
``seconds`` two runs with the same config produce identical bytes.

The CCF1 binary format is the one exception to config embedding: it is the
magic bytes b"CCF1" followed by raw little-endian float64 (re, im) pairs,
nothing else, so it stays trivially parseable from any language.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from dataclasses import asdict
from typing import Iterable, Sequence

import numpy as np

from .cache import CODE_TAG
from .limitset import BoxCountResult, PointCloud
from .solver import DimensionBracket, Rung
from .sweep import AnalysisReport, SweepGrid

CCF1_MAGIC = b"CCF1"


def _atomic_write_bytes(path: str, data: bytes) -> None:
    d = os.path.dirname(os.path.abspath(path)) or "."
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp_", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _atomic_write_text(path: str, text: str) -> None:
    _atomic_write_bytes(path, text.encode("utf-8"))


def _num(x: float) -> str:
    # shortest round-trip decimal; "inf" doubles as the divergence sentinel
    if math.isinf(x):
        return "inf"
    return repr(float(x))


def config_echo(config, command: str, **extra) -> dict:
    """Effective-config dictionary embedded in every artifact."""
    doc = {"command": command, "code_version": CODE_TAG}
    if config is not None:
        doc.update(asdict(config) if not isinstance(config, dict) else config)
    doc.update(extra)
    # normalize tuples to lists and paths to strings for stable json
    return json.loads(json.dumps(doc, default=str))


def _csv_text(header: Sequence[str], rows: Iterable[Sequence[str]], echo: dict) -> str:
    lines = ["# " + json.dumps(echo, sort_keys=True)]
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def write_ladder_csv(path: str, par, rungs: Sequence[Rung], echo: dict) -> None:
    header = ["tau_u", "tau_v", "N", "n", "t_eval_count", "h_lo", "h_hi", "seconds"]
    rows = [
        [
            _num(par.u),
            _num(par.v),
            str(r.N),
            str(r.n),
            str(r.t_evals),
            _num(r.h_lo),
            _num(r.h_hi),
            _num(r.seconds),
        ]
        for r in rungs
    ]
    _atomic_write_text(path, _csv_text(header, rows, echo))


def write_bracket_json(path: str, bracket: DimensionBracket, echo: dict) -> None:
    doc = {
        "artifact": "dimension_bracket",
        "config": echo,
        "tau": [bracket.par.u, bracket.par.v],
        "h_lo": bracket.h_lo,
        "h_hi": bracket.h_hi,
        "width": bracket.width,
        "converged": bracket.converged,
        "flags": list(bracket.flags),
        "rungs": [asdict(r) for r in bracket.rungs],
        "seconds": bracket.seconds,
    }
    _atomic_write_text(path, json.dumps(doc, sort_keys=True, indent=2) + "\n")


def deepest_live_rung(bracket: DimensionBracket) -> Rung | None:
    live = [r for r in bracket.rungs if not r.skipped]
    return live[-1] if live else None


def write_sweep_csv(path: str, grid: SweepGrid, echo: dict) -> None:
    header = ["u", "v", "h_lo", "h_hi", "N", "n", "seconds"]
    rows = []
    for i, j, u, v, br in grid.cells():
        deep = deepest_live_rung(br)
        rows.append(
            [
                _num(grid.us[i]),
                _num(grid.vs[j]),
                _num(br.h_lo),
                _num(br.h_hi),
                str(deep.N if deep else 0),
                str(deep.n if deep else 0),
                _num(br.seconds),
            ]
        )
    _atomic_write_text(path, _csv_text(header, rows, echo))


def write_sweep_json(path: str, grid: SweepGrid, echo: dict) -> None:
    cells = []
    for i, j, u, v, br in grid.cells():
        cells.append(
            {
                "u": grid.us[i],
                "v": grid.vs[j],
                "h_lo": br.h_lo,
                "h_hi": br.h_hi,
                "flags": list(br.flags),
                "seconds": br.seconds,
            }
        )
    doc = {
        "artifact": "sweep_grid",
        "config": echo,
        "region": [grid.u0, grid.u1, grid.v0, grid.v1],
        "step": grid.step,
        "shape": list(grid.shape),
        "cells": cells,
        "seconds": grid.seconds,
    }
    _atomic_write_text(path, json.dumps(doc, sort_keys=True, indent=2) + "\n")


def write_report_json(path: str, report: AnalysisReport, echo: dict) -> None:
    doc = {
        "artifact": "analysis_report",
        "config": echo,
        "check": report.check,
        "passed": report.passed,
        "entries": [asdict(e) for e in report.entries],
        "seconds": report.seconds,
    }
    _atomic_write_text(path, json.dumps(doc, sort_keys=True, indent=2) + "\n")


def write_points_csv(path: str, cloud: PointCloud, echo: dict) -> None:
    header = ["re", "im"]
    rows = [[_num(p.real), _num(p.imag)] for p in cloud.points]
    _atomic_write_text(path, _csv_text(header, rows, echo))


def write_points_ccf1(path: str, points: np.ndarray) -> None:
    pairs = np.empty((len(points), 2), dtype="<f8")
    pairs[:, 0] = np.real(points)
    pairs[:, 1] = np.imag(points)
    _atomic_write_bytes(path, CCF1_MAGIC + pairs.tobytes())


def read_points_ccf1(path: str) -> np.ndarray:
    with open(path, "rb") as f:
        data = f.read()
    if data[:4] != CCF1_MAGIC:
        raise ValueError(f"{path}: not a CCF1 file (bad magic {data[:4]!r})")
    body = data[4:]
    if len(body) % 16 != 0:
        raise ValueError(f"{path}: truncated CCF1 payload ({len(body)} bytes)")
    pairs = np.frombuffer(body, dtype="<f8").reshape(-1, 2)
    return pairs[:, 0] + 1j * pairs[:, 1]


def write_boxcount_csv(path: str, result: BoxCountResult, echo: dict) -> None:
    header = ["scale", "count"]
    rows = [[_num(s), str(int(c))] for s, c in zip(result.scales, result.counts)]
    _atomic_write_text(path, _csv_text(header, rows, echo))


def write_pressure_csv(
    path: str, ts: Sequence[float], p_lo: Sequence[float], p_hi: Sequence[float], echo: dict
) -> None:
    header = ["t", "P_lo", "P_hi"]
    rows = [[_num(t), _num(lo), _num(hi)] for t, lo, hi in zip(ts, p_lo, p_hi)]
    _atomic_write_text(path, _csv_text(header, rows, echo))


# ---------------------------------------------------------------------------
# SVG plots (1.1, no raster dependencies)

_COLOR_LO = (29, 53, 87)      # dark blue at the low end of the midpoint range
_COLOR_HI = (255, 224, 138)   # pale yellow at the high end


def _lerp_color(x: float) -> str:
    x = min(1.0, max(0.0, x))
    rgb = [round(a + (b - a) * x) for a, b in zip(_COLOR_LO, _COLOR_HI)]
    return "#{:02x}{:02x}{:02x}".format(*rgb)


def _svg_doc(width: int, height: int, body: list[str], echo: dict) -> str:
    head = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        "<desc>" + json.dumps(echo, sort_keys=True).replace("<", "&lt;") + "</desc>",
    ]
    return "\n".join(head + body + ["</svg>"]) + "\n"


def write_sweep_svg(path: str, grid: SweepGrid, echo: dict) -> None:
    """Heatmap of bracket midpoints with the bracket printed in each cell."""
    cw, ch, margin = 150, 48, 56
    nu, nv = grid.shape
    width = margin + nu * cw + 16
    height = margin + nv * ch + 16
    mids = [br.midpoint for _, _, _, _, br in grid.cells()]
    vmin, vmax = min(mids), max(mids)
    span = (vmax - vmin) or 1.0
    body = [
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<text x="{margin}" y="20" font-family="monospace" font-size="13">'
        f"dimension bracket midpoints, region "
        f"[{_num(grid.u0)},{_num(grid.u1)}]x[{_num(grid.v0)},{_num(grid.v1)}]</text>",
    ]
    for i, j, u, v, br in grid.cells():
        x = margin + i * cw
        # v axis points up: largest v in the top row
        y = margin + (nv - 1 - j) * ch
        fill = _lerp_color((br.midpoint - vmin) / span)
        mid_lum = sum(_COLOR_LO) / 3 + (sum(_COLOR_HI) - sum(_COLOR_LO)) / 3 * (
            (br.midpoint - vmin) / span
        )
        text_fill = "#111111" if mid_lum > 140 else "#f5f5f5"
        body.append(
            f'<rect x="{x}" y="{y}" width="{cw}" height="{ch}" fill="{fill}" '
            f'stroke="#888888" stroke-width="1"/>'
        )
        body.append(
            f'<text x="{x + cw / 2:.1f}" y="{y + ch / 2 - 4:.1f}" text-anchor="middle" '
            f'font-family="monospace" font-size="11" fill="{text_fill}">'
            f"tau={_num(grid.us[i])}+{_num(grid.vs[j])}i</text>"
        )
        body.append(
            f'<text x="{x + cw / 2:.1f}" y="{y + ch / 2 + 12:.1f}" text-anchor="middle" '
            f'font-family="monospace" font-size="11" fill="{text_fill}">'
            f"[{br.h_lo:.4f}, {br.h_hi:.4f}]</text>"
        )
    _atomic_write_text(path, _svg_doc(width, height, body, echo))


def write_scatter_svg(path: str, points: np.ndarray, echo: dict, title: str = "") -> None:
    """Scatter plot of a point cloud inside X = disk(1/2, 1/2)."""
    size, margin = 640, 40
    width = size + 2 * margin
    height = size + 2 * margin + 20
    # X sits in the unit square [0,1] x [-1/2,1/2]; equal scale on both axes
    def sx(re: float) -> float:
        return margin + re * size

    def sy(im: float) -> float:
        return margin + 20 + (0.5 - im) * size

    body = [
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<text x="{margin}" y="24" font-family="monospace" font-size="13">{title}</text>',
        f'<circle cx="{sx(0.5)}" cy="{sy(0.0)}" r="{size / 2}" '
        f'fill="none" stroke="#bbbbbb" stroke-width="1"/>',
    ]
    # cap the element count; SVG with 10^5+ circles stops being a plot
    stride = max(1, len(points) // 20000)
    for p in points[::stride]:
        body.append(
            f'<circle cx="{sx(p.real):.2f}" cy="{sy(p.imag):.2f}" r="0.6" fill="#1d3557"/>'
        )
    _atomic_write_text(path, _svg_doc(width, height, body, echo))
