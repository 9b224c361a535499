"""Session container and its on-disk format.

A session directory holds four files (UTF-8, LF newlines, '.' decimals):

    meta.json  {"id", "fps", "grid", "half_extent_m", "num_frames", "source", "seed"}
    scan.csv   frame,angle_deg,range_m     one row per detection, frames nondecreasing
    kin.csv    frame,x,y,vx,vy,theta       exactly one row per frame
    cmd.csv    frame,right,left            values in {-1,1}, one row per frame

A dataset root carries manifest.json: {"sessions": [relative paths]}.
Angles live in degrees on disk (sensor-native) and radians in memory.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .raster import (DEFAULT_HALF_EXTENT_M, GRID, LidarDetection, SpikeFrame,
                     rasterize_scan)

VALID_COMMANDS = ((1, 1), (-1, 1), (1, -1), (-1, -1))

META_NAME = "meta.json"
SCAN_NAME = "scan.csv"
KIN_NAME = "kin.csv"
CMD_NAME = "cmd.csv"
MANIFEST_NAME = "manifest.json"


class SessionFormatError(Exception):
    """A session directory violates the on-disk contract."""


@dataclass(frozen=True)
class KinematicsVector:
    """Robot state sample: position, velocity, pose angle. All finite."""

    x: float
    y: float
    vx: float
    vy: float
    pose: float

    def __post_init__(self):
        for name in ("x", "y", "vx", "vy", "pose"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"kinematics entry {name} must be finite")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.vx, self.vy, self.pose], dtype=np.float64)


@dataclass(frozen=True)
class CommandVector:
    """Motor rotation directions, one of (1,1), (-1,1), (1,-1), (-1,-1)."""

    right: int
    left: int

    def __post_init__(self):
        if (self.right, self.left) not in VALID_COMMANDS:
            raise ValueError(f"invalid command value ({self.right}, {self.left})")

    def as_array(self) -> np.ndarray:
        return np.array([self.right, self.left], dtype=np.int64)


@dataclass(frozen=True)
class Session:
    """Time-aligned {scan, kinematics, command} streams at a fixed frame rate."""

    id: str
    fps: float
    detections: tuple[tuple[LidarDetection, ...], ...]
    kinematics: tuple[KinematicsVector, ...]
    commands: tuple[CommandVector, ...]
    source: str = "synthetic"
    seed: int | None = None
    half_extent_m: float = DEFAULT_HALF_EXTENT_M
    goal_reached: bool | None = None

    def __post_init__(self):
        if self.fps <= 0:
            raise ValueError("fps must be > 0")
        if self.source not in ("synthetic", "imported"):
            raise ValueError(f"unknown source {self.source!r}")
        n = len(self.detections)
        if not (len(self.kinematics) == len(self.commands) == n):
            raise ValueError(
                "stream length mismatch: "
                f"{n} scans, {len(self.kinematics)} kinematics, {len(self.commands)} commands")
        object.__setattr__(self, "detections",
                           tuple(tuple(frame) for frame in self.detections))
        object.__setattr__(self, "kinematics", tuple(self.kinematics))
        object.__setattr__(self, "commands", tuple(self.commands))

    def __len__(self) -> int:
        return len(self.detections)

    def spike_frame(self, k: int) -> SpikeFrame:
        return rasterize_scan(list(self.detections[k]), self.half_extent_m, frame_index=k)

    def spike_frames(self) -> np.ndarray:
        """All frames rasterized, shape (n, 59, 59) uint8."""
        out = np.zeros((len(self), GRID, GRID), dtype=np.uint8)
        for k in range(len(self)):
            out[k] = self.spike_frame(k).grid
        return out

    def kinematics_array(self) -> np.ndarray:
        return np.stack([kv.as_array() for kv in self.kinematics]) \
            if self.kinematics else np.zeros((0, 5))

    def commands_array(self) -> np.ndarray:
        return np.stack([cv.as_array() for cv in self.commands]) \
            if self.commands else np.zeros((0, 2), dtype=np.int64)


def sessions_equal(a: Session, b: Session, angle_tol: float = 1e-12) -> bool:
    """Field-by-field equality.

    Angles pass through a degree-valued CSV, which costs up to 1 ulp, so they
    compare to within ``angle_tol``; every other field compares exactly.
    """
    if (a.id, a.fps, a.source, a.seed, a.half_extent_m, a.goal_reached) != \
       (b.id, b.fps, b.source, b.seed, b.half_extent_m, b.goal_reached):
        return False
    if len(a) != len(b):
        return False
    for fa, fb in zip(a.detections, b.detections):
        if len(fa) != len(fb):
            return False
        for da, db in zip(fa, fb):
            if da.range_m != db.range_m or abs(da.angle_rad - db.angle_rad) > angle_tol:
                return False
    return a.kinematics == b.kinematics and a.commands == b.commands


@dataclass(frozen=True)
class Window:
    """A contiguous non-overlapping chunk of one session, tensorized."""

    session_id: str
    start: int
    length: int
    frames: np.ndarray      # (length, 59, 59) uint8
    kinematics: np.ndarray  # (length, 5) float64
    labels: np.ndarray      # (length, 2) int64 in {-1, 1}

    def __post_init__(self):
        if self.frames.shape != (self.length, GRID, GRID):
            raise ValueError("frames shape does not match window length")
        if self.kinematics.shape != (self.length, 5):
            raise ValueError("kinematics shape does not match window length")
        if self.labels.shape != (self.length, 2):
            raise ValueError("labels shape does not match window length")


@lru_cache(maxsize=256)
def _windows_cached(s: Session, length: int) -> tuple[Window, ...]:
    n = len(s) // length
    if n == 0:
        return ()
    frames = s.spike_frames()
    kin = s.kinematics_array()
    cmd = s.commands_array()
    out = []
    for i in range(n):
        lo, hi = i * length, (i + 1) * length
        out.append(Window(session_id=s.id, start=lo, length=length,
                          frames=frames[lo:hi], kinematics=kin[lo:hi],
                          labels=cmd[lo:hi]))
    return tuple(out)


def make_windows(s: Session, length: int = 20) -> list[Window]:
    """Chop a session into consecutive non-overlapping windows.

    A trailing remainder shorter than ``length`` is discarded; a session
    shorter than one window yields an empty list. Sessions are immutable,
    so repeated windowing (folds, sweep points) hits a cache instead of
    re-rasterizing the scans.
    """
    if length < 1:
        raise ValueError("window length must be >= 1")
    return list(_windows_cached(s, length))


def _fmt(x: float) -> str:
    """Shortest decimal that round-trips to the same float."""
    return repr(float(x))


def save_session(s: Session, dir_path: str | os.PathLike) -> None:
    """Write the four-file session layout; load_session round-trips it."""
    dir_path = os.fspath(dir_path)
    try:
        os.makedirs(dir_path, exist_ok=True)
        meta = {
            "id": s.id,
            "fps": float(s.fps),
            "grid": GRID,
            "half_extent_m": float(s.half_extent_m),
            "num_frames": len(s),
            "source": s.source,
            "seed": s.seed,
        }
        if s.goal_reached is not None:
            meta["goal_reached"] = s.goal_reached
        with open(os.path.join(dir_path, META_NAME), "w", encoding="utf-8", newline="\n") as f:
            json.dump(meta, f, indent=2)
            f.write("\n")
        with open(os.path.join(dir_path, SCAN_NAME), "w", encoding="utf-8", newline="\n") as f:
            f.write("frame,angle_deg,range_m\n")
            for k, frame in enumerate(s.detections):
                for d in frame:
                    f.write(f"{k},{_fmt(math.degrees(d.angle_rad))},{_fmt(d.range_m)}\n")
        with open(os.path.join(dir_path, KIN_NAME), "w", encoding="utf-8", newline="\n") as f:
            f.write("frame,x,y,vx,vy,theta\n")
            for k, kv in enumerate(s.kinematics):
                f.write(f"{k},{_fmt(kv.x)},{_fmt(kv.y)},{_fmt(kv.vx)},"
                        f"{_fmt(kv.vy)},{_fmt(kv.pose)}\n")
        with open(os.path.join(dir_path, CMD_NAME), "w", encoding="utf-8", newline="\n") as f:
            f.write("frame,right,left\n")
            for k, cv in enumerate(s.commands):
                f.write(f"{k},{cv.right},{cv.left}\n")
    except OSError as e:
        raise SessionFormatError(f"cannot write session to {dir_path}: {e}") from e


def _read_csv(path: str, header: str, ncols: int) -> list[list[str]]:
    if not os.path.exists(path):
        raise SessionFormatError(f"missing file: {path}")
    rows = []
    with open(path, encoding="utf-8") as f:
        first = f.readline().rstrip("\n")
        if first != header:
            raise SessionFormatError(f"{path}: expected header {header!r}, got {first!r}")
        for ln, line in enumerate(f, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != ncols:
                raise SessionFormatError(f"{path}:{ln}: expected {ncols} fields, got {len(parts)}")
            rows.append(parts)
    return rows


def load_session(dir_path: str | os.PathLike) -> Session:
    """Load and validate one session directory."""
    dir_path = os.fspath(dir_path)
    meta_path = os.path.join(dir_path, META_NAME)
    if not os.path.exists(meta_path):
        raise SessionFormatError(f"missing file: {meta_path}")
    with open(meta_path, encoding="utf-8") as f:
        try:
            meta = json.load(f)
        except json.JSONDecodeError as e:
            raise SessionFormatError(f"{meta_path}: invalid JSON: {e}") from e
    for key in ("id", "fps", "grid", "half_extent_m", "num_frames", "source"):
        if key not in meta:
            raise SessionFormatError(f"{meta_path}: missing key {key!r}")
    if meta["grid"] != GRID:
        raise SessionFormatError(f"{meta_path}: unsupported grid size {meta['grid']}")
    n = int(meta["num_frames"])

    def parse_float(path, ln, text):
        try:
            v = float(text)
        except ValueError:
            raise SessionFormatError(f"{path}:{ln}: malformed number {text!r}") from None
        if not math.isfinite(v):
            raise SessionFormatError(f"{path}:{ln}: non-finite number {text!r}")
        return v

    scan_path = os.path.join(dir_path, SCAN_NAME)
    detections: list[list[LidarDetection]] = [[] for _ in range(n)]
    last_frame = -1
    for ln, row in enumerate(_read_csv(scan_path, "frame,angle_deg,range_m", 3), start=2):
        try:
            k = int(row[0])
        except ValueError:
            raise SessionFormatError(f"{scan_path}:{ln}: malformed frame index {row[0]!r}") from None
        if k < last_frame:
            raise SessionFormatError(f"{scan_path}:{ln}: frame indices must be nondecreasing")
        if not (0 <= k < n):
            raise SessionFormatError(f"{scan_path}:{ln}: frame index {k} out of range [0, {n})")
        last_frame = k
        angle_deg = parse_float(scan_path, ln, row[1])
        range_m = parse_float(scan_path, ln, row[2])
        try:
            detections[k].append(LidarDetection(range_m=range_m,
                                                angle_rad=math.radians(angle_deg)))
        except ValueError as e:
            raise SessionFormatError(f"{scan_path}:{ln}: {e}") from e

    def read_indexed(path, header, ncols):
        rows = _read_csv(path, header, ncols)
        if len(rows) != n:
            raise SessionFormatError(f"{path}: expected {n} rows, got {len(rows)}")
        for ln, row in enumerate(rows, start=2):
            try:
                k = int(row[0])
            except ValueError:
                raise SessionFormatError(f"{path}:{ln}: malformed frame index {row[0]!r}") from None
            if k != ln - 2:
                raise SessionFormatError(
                    f"{path}:{ln}: frame index gap (expected {ln - 2}, got {k})")
        return rows

    kin_path = os.path.join(dir_path, KIN_NAME)
    kin_rows = read_indexed(kin_path, "frame,x,y,vx,vy,theta", 6)
    kinematics = []
    for ln, row in enumerate(kin_rows, start=2):
        vals = [parse_float(kin_path, ln, v) for v in row[1:]]
        kinematics.append(KinematicsVector(*vals))

    cmd_path = os.path.join(dir_path, CMD_NAME)
    cmd_rows = read_indexed(cmd_path, "frame,right,left", 3)
    commands = []
    for ln, row in enumerate(cmd_rows, start=2):
        try:
            right, left = int(row[1]), int(row[2])
            commands.append(CommandVector(right=right, left=left))
        except ValueError as e:
            raise SessionFormatError(f"{cmd_path}:{ln}: {e}") from e

    return Session(
        id=str(meta["id"]),
        fps=float(meta["fps"]),
        detections=tuple(tuple(f) for f in detections),
        kinematics=tuple(kinematics),
        commands=tuple(commands),
        source=str(meta["source"]),
        seed=meta.get("seed"),
        half_extent_m=float(meta["half_extent_m"]),
        goal_reached=meta.get("goal_reached"),
    )


def write_manifest(root: str | os.PathLike, session_dirs: list[str]) -> None:
    root = os.fspath(root)
    os.makedirs(root, exist_ok=True)
    with open(os.path.join(root, MANIFEST_NAME), "w", encoding="utf-8", newline="\n") as f:
        json.dump({"sessions": list(session_dirs)}, f, indent=2)
        f.write("\n")


def load_dataset(root: str | os.PathLike) -> list[Session]:
    """Load every session listed in manifest.json under ``root``."""
    root = os.fspath(root)
    manifest_path = os.path.join(root, MANIFEST_NAME)
    if not os.path.exists(manifest_path):
        raise SessionFormatError(f"missing file: {manifest_path}")
    with open(manifest_path, encoding="utf-8") as f:
        manifest = json.load(f)
    return [load_session(os.path.join(root, rel)) for rel in manifest["sessions"]]
