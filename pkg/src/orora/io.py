"""Plain-text correspondence and trajectory files (see docs/formats.md)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from orora.core import CorrespondenceSet, Pose2, ScanGeometry, polar_to_cartesian
from orora.pipeline import STAGES, FrameResult

CORR_MAGIC = "orora-correspondences"
TRAJ_MAGIC = "orora-trajectory"
VERSION = "v1"
KINDS = ("cartesian", "polar")


class FormatError(ValueError):
    """A file does not follow the documented grammar."""

    def __init__(self, path, line: int | None, message: str):
        where = f"{path}:{line}" if line is not None else str(path)
        super().__init__(f"{where}: {message}")


@dataclass
class CorrespondenceHeader:
    kind: str = "cartesian"
    frames: tuple[str, str] | None = None
    geometry: ScanGeometry | None = None


def _floats(tokens: Sequence[str], path, lineno: int, count: int) -> list[float]:
    if len(tokens) != count:
        raise FormatError(path, lineno, f"expected {count} values, got {len(tokens)}")
    try:
        values = [float(tok) for tok in tokens]
    except ValueError as exc:
        raise FormatError(path, lineno, f"not a number: {exc}") from None
    if not all(math.isfinite(v) for v in values):
        raise FormatError(path, lineno, "values must be finite")
    return values


def _check_magic(lines: list[str], path, magic: str) -> None:
    first = lines[0].split() if lines else []
    if first != ["#", magic, VERSION]:
        raise FormatError(path, 1, f"missing header line '# {magic} {VERSION}'")


def parse_correspondences(text: str, path="<string>") -> tuple[CorrespondenceHeader, CorrespondenceSet]:
    lines = text.splitlines()
    _check_magic(lines, path, CORR_MAGIC)
    header = CorrespondenceHeader()
    rows: list[list[float]] = []
    for lineno, line in enumerate(lines[1:], start=2):
        tokens = line.split()
        if not tokens:
            continue
        if tokens[0].startswith("#"):
            if rows:
                continue  # comments are allowed anywhere; directives only before data
            directive = tokens[1:] if tokens[0] == "#" else [tokens[0][1:], *tokens[1:]]
            _apply_directive(header, directive, path, lineno)
            continue
        rows.append(_floats(tokens, path, lineno, 4))
        if header.kind == "polar":
            _check_polar_row(rows[-1], header, path, lineno)
    data = np.array(rows, dtype=float).reshape(-1, 4)
    if header.kind == "polar":
        if header.geometry is None:
            raise FormatError(path, None, "polar rows require a '# geometry' header")
        src = [polar_to_cartesian(h, w, header.geometry) for h, w in data[:, :2]]
        dst = [polar_to_cartesian(h, w, header.geometry) for h, w in data[:, 2:]]
        corr = CorrespondenceSet.from_polar(
            np.array([(p.range, p.azimuth) for p in src]).reshape(-1, 2),
            np.array([(p.range, p.azimuth) for p in dst]).reshape(-1, 2),
        )
        if not (np.all(np.isfinite(corr.src_xy)) and np.all(np.isfinite(corr.dst_xy))):
            raise FormatError(path, None, "polar rows overflow to non-finite coordinates")
    else:
        corr = CorrespondenceSet.from_arrays(data[:, :2], data[:, 2:])
    return header, corr


def _apply_directive(header: CorrespondenceHeader, tokens: list[str], path, lineno: int) -> None:
    if not tokens:
        return
    key, args = tokens[0], tokens[1:]
    if key == "kind":
        if len(args) != 1 or args[0] not in KINDS:
            raise FormatError(path, lineno, f"kind must be one of {KINDS}")
        header.kind = args[0]
    elif key == "frames":
        if len(args) != 2:
            raise FormatError(path, lineno, "frames takes two ids")
        header.frames = (args[0], args[1])
    elif key == "geometry":
        if len(args) != 3:
            raise FormatError(path, lineno, "geometry takes rows, cols, metres-per-bin")
        try:
            header.geometry = ScanGeometry(int(args[0]), int(args[1]), float(args[2]))
        except ValueError as exc:
            raise FormatError(path, lineno, f"bad geometry: {exc}") from None
    # any other '#' line is a comment


def _check_polar_row(row: list[float], header: CorrespondenceHeader, path, lineno: int) -> None:
    geometry = header.geometry
    if geometry is None:
        raise FormatError(path, lineno, "polar rows require a '# geometry' header")
    h_src, w_src, h_dst, w_dst = row
    if min(row) < 0 or w_src >= geometry.cols or w_dst >= geometry.cols:
        raise FormatError(path, lineno, f"pixel outside geometry {geometry}")


def read_correspondences(path) -> CorrespondenceSet:
    path = Path(path)
    return parse_correspondences(path.read_text(), path)[1]


def format_correspondences(corr: CorrespondenceSet, frames: tuple[str, str] | None = None) -> str:
    out = [f"# {CORR_MAGIC} {VERSION}", "# kind cartesian"]
    if frames is not None:
        out.append(f"# frames {frames[0]} {frames[1]}")
    for (xs, ys), (xd, yd) in zip(corr.src_xy, corr.dst_xy):
        out.append(f"{xs:.17g} {ys:.17g} {xd:.17g} {yd:.17g}")
    return "\n".join(out) + "\n"


def write_correspondences(path, corr: CorrespondenceSet, frames=None) -> None:
    Path(path).write_text(format_correspondences(corr, frames))


def _fixed(value: float) -> str:
    text = f"{value:.9f}"
    return text[1:] if text.startswith("-") and float(text) == 0.0 else text


def format_trajectory(
    trajectory: Sequence[Pose2],
    results: Sequence[FrameResult] | None = None,
    timings: bool = False,
) -> str:
    """One line per pose; frame 0 is the start pose and has no diagnostics.

    With ``results`` (one per frame after the first) the diagnostic columns
    are appended; ``timings`` adds per-stage microseconds after those.
    """
    if not trajectory:
        raise ValueError("trajectory is empty")
    columns = ["frame", "x", "y", "yaw"]
    if results is not None:
        if len(results) != len(trajectory) - 1:
            raise ValueError(f"{len(results)} results for {len(trajectory)} poses")
        columns += ["inliers", "outliers", "gnc_iters", "flags"]
        if timings:
            columns += [f"{stage}_us" for stage in STAGES]
    out = [f"# {TRAJ_MAGIC} {VERSION}", "# " + " ".join(columns)]
    for k, pose in enumerate(trajectory):
        fields = [str(k), _fixed(pose.x), _fixed(pose.y), _fixed(pose.angle)]
        if results is not None:
            res = results[k - 1] if k > 0 else None
            if res is None:
                fields += ["0", "0", "0", "-"]
            else:
                fields += [
                    str(res.inlier_count), str(res.outlier_count), str(res.gnc_iterations),
                    ",".join(res.flags) or "-",
                ]
            if timings:
                fields += [str(res.timings_us.get(stage, 0)) if res else "0" for stage in STAGES]
        out.append(" ".join(fields))
    return "\n".join(out) + "\n"


def write_trajectory(path, trajectory, results=None, timings: bool = False) -> None:
    Path(path).write_text(format_trajectory(trajectory, results, timings))


def parse_trajectory(text: str, path="<string>") -> list[Pose2]:
    lines = text.splitlines()
    _check_magic(lines, path, TRAJ_MAGIC)
    poses = []
    for lineno, line in enumerate(lines[1:], start=2):
        tokens = line.split()
        if not tokens or tokens[0].startswith("#"):
            continue
        if len(tokens) < 4:
            raise FormatError(path, lineno, f"expected at least 4 columns, got {len(tokens)}")
        if tokens[0] != str(len(poses)):
            raise FormatError(path, lineno, f"expected frame {len(poses)}, got {tokens[0]!r}")
        x, y, yaw = _floats(tokens[1:4], path, lineno, 3)
        poses.append(Pose2(yaw, (x, y)))
    if not poses:
        raise FormatError(path, None, "trajectory has no poses")
    return poses


def read_trajectory(path) -> list[Pose2]:
    path = Path(path)
    return parse_trajectory(path.read_text(), path)
