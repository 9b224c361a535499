"""Synthetic session generator.

A differential-drive robot is steered by a scripted driver around wall
obstacles toward a goal behind them, while a raycast LIDAR records scans.
Each run yields a labeled session: spike-frame scans, noisy kinematics, and
the driver's 4-valued motor commands at 10 fps.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, replace

import numpy as np

from .raster import LidarDetection, wrap_angle
from .session import (CommandVector, KinematicsVector, Session, save_session,
                      write_manifest)

DT = 0.1            # seconds per frame at 10 fps
GOAL_TOL_M = 0.25   # distance at which the goal counts as reached


@dataclass(frozen=True)
class Rect:
    """Rectangle with center, size and yaw (counterclockwise, radians)."""

    cx: float
    cy: float
    width: float
    height: float
    yaw: float = 0.0

    def corners(self) -> np.ndarray:
        """4x2 array of corner coordinates, counterclockwise."""
        c, s = math.cos(self.yaw), math.sin(self.yaw)
        hw, hh = self.width / 2.0, self.height / 2.0
        local = np.array([[-hw, -hh], [hw, -hh], [hw, hh], [-hw, hh]])
        rot = np.array([[c, -s], [s, c]])
        return local @ rot.T + np.array([self.cx, self.cy])

    def segments(self) -> np.ndarray:
        """4x2x2 array of edge segments (p, q)."""
        c = self.corners()
        return np.stack([np.stack([c[i], c[(i + 1) % 4]]) for i in range(4)])

    def contains(self, x: float, y: float) -> bool:
        """True iff (x, y) lies strictly inside the rectangle."""
        c, s = math.cos(self.yaw), math.sin(self.yaw)
        dx, dy = x - self.cx, y - self.cy
        u = c * dx + s * dy
        v = -s * dx + c * dy
        return abs(u) < self.width / 2.0 and abs(v) < self.height / 2.0

    def inflated(self, margin: float) -> "Rect":
        return Rect(self.cx, self.cy, self.width + 2.0 * margin,
                    self.height + 2.0 * margin, self.yaw)


@dataclass(frozen=True)
class Bounds:
    """Axis-aligned world boundary box."""

    xmin: float
    ymin: float
    xmax: float
    ymax: float

    def contains(self, x: float, y: float) -> bool:
        return self.xmin < x < self.xmax and self.ymin < y < self.ymax

    def segments(self) -> np.ndarray:
        corners = np.array([[self.xmin, self.ymin], [self.xmax, self.ymin],
                            [self.xmax, self.ymax], [self.xmin, self.ymax]])
        return np.stack([np.stack([corners[i], corners[(i + 1) % 4]]) for i in range(4)])


@dataclass(frozen=True)
class WorldSpec:
    """One obstacle-avoidance scenario: walls, goal, bounds, seed."""

    walls: tuple[Rect, ...]
    goal: tuple[float, float]
    bounds: Bounds
    seed: int = 0
    start: tuple[float, float] = (0.0, -1.2)
    start_pose: float = math.pi / 2.0
    name: str = "scenario"

    def __post_init__(self):
        object.__setattr__(self, "walls", tuple(self.walls))
        if not self.bounds.contains(*self.goal):
            raise ValueError("goal must lie inside bounds")
        if not self.bounds.contains(*self.start):
            raise ValueError("start must lie inside bounds")
        for w in self.walls:
            for cx, cy in w.corners():
                if not self.bounds.contains(cx, cy):
                    raise ValueError("walls must lie inside bounds")


@dataclass(frozen=True)
class RobotState:
    """Differential-drive pose plus fixed drive-train constants.

    Wheel rotation speed is a constant 2*pi rad/s; commands only choose each
    wheel's direction, so speed never modulates within a session.
    """

    x: float
    y: float
    pose: float
    wheel_radius_m: float = 0.03
    wheel_base_m: float = 0.15
    wheel_speed_rad_s: float = 2.0 * math.pi
    vx: float = 0.0
    vy: float = 0.0

    def __post_init__(self):
        if self.wheel_radius_m <= 0 or self.wheel_base_m <= 0:
            raise ValueError("wheel geometry must be positive")
        if self.wheel_speed_rad_s <= 0:
            raise ValueError("wheel speed must be positive")


@dataclass(frozen=True)
class LidarModel:
    """Beam fan stand-in for a 2D scanning LIDAR."""

    num_beams: int = 360
    max_range_m: float = 6.0
    range_noise_sigma_m: float = 0.01

    def __post_init__(self):
        if self.num_beams < 1:
            raise ValueError("num_beams must be >= 1")
        if self.max_range_m <= 0:
            raise ValueError("max_range_m must be > 0")
        if self.range_noise_sigma_m < 0:
            raise ValueError("range_noise_sigma_m must be >= 0")


@dataclass(frozen=True)
class OracleConfig:
    """Scripted-driver tuning knobs."""

    heading_deadband_rad: float = 0.15
    reverse_clearance_m: float = 0.25
    waypoint_offset_m: float = 0.5
    path_margin_m: float = 0.2   # wall clearance required before heading straight

    def __post_init__(self):
        if min(self.heading_deadband_rad, self.reverse_clearance_m,
               self.waypoint_offset_m, self.path_margin_m) <= 0:
            raise ValueError("oracle parameters must be positive")


def _world_segments(world: WorldSpec) -> np.ndarray:
    segs = [w.segments() for w in world.walls]
    segs.append(world.bounds.segments())
    return np.concatenate(segs, axis=0)


def raycast(world: WorldSpec, robot: RobotState, lidar: LidarModel,
            rng: np.random.Generator | None = None) -> list[LidarDetection]:
    """Cast one beam fan from the robot; angles are sensor-relative.

    Each beam that hits a wall or the boundary within max range yields a
    detection whose range is the first-hit distance plus Gaussian noise,
    clipped into [0, max_range]. Beams with no hit yield nothing.
    """
    segs = _world_segments(world)                      # (S, 2, 2)
    beam_rel = np.arange(lidar.num_beams) * (2.0 * math.pi / lidar.num_beams)
    beam_world = robot.pose + beam_rel
    d = np.stack([np.cos(beam_world), np.sin(beam_world)], axis=1)   # (B, 2)

    o = np.array([robot.x, robot.y])
    p = segs[:, 0]                  # (S, 2)
    e = segs[:, 1] - segs[:, 0]     # (S, 2)
    po = p - o                      # (S, 2)

    # cross products broadcast beams (B, 1) against segments (1, S)
    denom = d[:, 0:1] * e[:, 1] - d[:, 1:2] * e[:, 0]
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (po[:, 0] * e[:, 1] - po[:, 1] * e[:, 0]) / denom
        u = (po[:, 0] * d[:, 1:2] - po[:, 1] * d[:, 0:1]) / denom
    valid = (np.abs(denom) > 1e-12) & (t > 1e-9) & (u >= 0.0) & (u <= 1.0)
    t = np.where(valid, t, np.inf)
    first_hit = t.min(axis=1)       # (B,)

    detections = []
    for i in range(lidar.num_beams):
        r = first_hit[i]
        if r > lidar.max_range_m:
            continue
        if rng is not None and lidar.range_noise_sigma_m > 0:
            r += rng.normal(0.0, lidar.range_noise_sigma_m)
        r = min(max(r, 0.0), lidar.max_range_m)
        detections.append(LidarDetection(range_m=r, angle_rad=wrap_angle(beam_rel[i])))
    return detections


def step_dynamics(robot: RobotState, cmd: CommandVector, dt: float = DT) -> RobotState:
    """Advance the differential drive one step.

    v = r*omega*(right+left)/2, yaw_rate = r*omega*(right-left)/base;
    pose updates first and the position advances along the new pose.
    """
    if dt <= 0:
        raise ValueError("dt must be > 0")
    wheel_v = robot.wheel_radius_m * robot.wheel_speed_rad_s
    v = wheel_v * (cmd.right + cmd.left) / 2.0
    yaw_rate = wheel_v * (cmd.right - cmd.left) / robot.wheel_base_m
    pose = robot.pose + yaw_rate * dt
    vx, vy = v * math.cos(pose), v * math.sin(pose)
    return replace(robot, x=robot.x + vx * dt, y=robot.y + vy * dt,
                   pose=pose, vx=vx, vy=vy)


def _segment_blocked(p: tuple[float, float], q: tuple[float, float], wall: Rect,
                     margin: float = 0.0) -> bool:
    """True iff segment p->q crosses or ends inside the wall rectangle,
    optionally inflated by a clearance margin."""
    if margin > 0.0:
        wall = wall.inflated(margin)
    if wall.contains(*p) or wall.contains(*q):
        return True
    pv = np.array(p, dtype=float)
    d = np.array(q, dtype=float) - pv
    for a, b in wall.segments():
        e = b - a
        denom = d[0] * e[1] - d[1] * e[0]
        if abs(denom) < 1e-12:
            continue
        ap = a - pv
        t = (ap[0] * e[1] - ap[1] * e[0]) / denom
        u = (ap[0] * d[1] - ap[1] * d[0]) / denom
        if 0.0 <= t <= 1.0 and 0.0 <= u <= 1.0:
            return True
    return False


def _detour_corners(wall: Rect, offset: float) -> np.ndarray:
    """Wall corners pushed outward by ``offset`` along both local axes, so a
    detour point keeps diagonal standoff even from a thin wall's end."""
    c, s = math.cos(wall.yaw), math.sin(wall.yaw)
    rot = np.array([[c, -s], [s, c]])
    hw, hh = wall.width / 2.0 + offset, wall.height / 2.0 + offset
    local = np.array([[-hw, -hh], [hw, -hh], [hw, hh], [-hw, hh]])
    return local @ rot.T + np.array([wall.cx, wall.cy])


def _clear_of_walls(p, q, walls, margin: float) -> bool:
    return not any(_segment_blocked(p, q, w, margin) for w in walls)


def _waypoint(world: WorldSpec, robot: RobotState, cfg: OracleConfig) -> tuple[float, float]:
    """Next steering target: the goal when the straight run clears every wall
    by the path margin, else the first corner of the shortest 1- or 2-hop
    detour route around the blocking wall.

    Route legs after the first must also clear by the margin, and each hop
    costs a small penalty so routes stay stable when lengths tie (standing
    on a corner does not flip the choice back and forth).
    """
    pos = (robot.x, robot.y)
    goal = tuple(world.goal)
    if _clear_of_walls(pos, goal, world.walls, cfg.path_margin_m):
        return goal
    blocking = next(w for w in world.walls
                    if _segment_blocked(pos, goal, w, cfg.path_margin_m))
    corners = [(float(c[0]), float(c[1]))
               for c in _detour_corners(blocking, cfg.waypoint_offset_m)
               if world.bounds.contains(float(c[0]), float(c[1]))]
    hop_penalty = 0.2

    def search(first_margin: float):
        best, best_cost = None, math.inf
        for c1 in corners:
            if math.dist(pos, c1) < 0.05:
                continue
            if not _clear_of_walls(pos, c1, world.walls, first_margin):
                continue
            if _clear_of_walls(c1, goal, world.walls, cfg.path_margin_m):
                cost = math.dist(pos, c1) + math.dist(c1, goal) + hop_penalty
                if cost < best_cost:
                    best, best_cost = c1, cost
            for c2 in corners:
                if c2 == c1:
                    continue
                if not _clear_of_walls(c1, c2, world.walls, cfg.path_margin_m):
                    continue
                if not _clear_of_walls(c2, goal, world.walls, cfg.path_margin_m):
                    continue
                cost = (math.dist(pos, c1) + math.dist(c1, c2)
                        + math.dist(c2, goal) + 2 * hop_penalty)
                if cost < best_cost:
                    best, best_cost = c1, cost
        return best

    # insist on full clearance for the first leg; relax only when pinched
    best = search(cfg.path_margin_m)
    if best is None:
        best = search(0.0)
    if best is None and corners:  # boxed in; head for the nearest corner anyway
        best = min(corners, key=lambda c: math.dist(pos, c))
    return best if best is not None else goal


def _forward_clearance(last_scan: list[LidarDetection] | None, half_beam_rad: float) -> float:
    """Range of the beam looking straight ahead, inf if it saw nothing."""
    if not last_scan:
        return math.inf
    best = math.inf
    for d in last_scan:
        a = d.angle_rad if d.angle_rad <= math.pi else d.angle_rad - 2.0 * math.pi
        if abs(a) <= half_beam_rad:
            best = min(best, d.range_m)
    return best


def oracle_policy(world: WorldSpec, robot: RobotState,
                  last_scan: list[LidarDetection] | None,
                  cfg: OracleConfig) -> CommandVector:
    """Bang-bang pursuit of the current waypoint in the 4-valued command set.

    Forward when the heading error is inside the deadband, rotate toward the
    waypoint otherwise, and back straight up when the forward beam reads
    closer than the reverse clearance.
    """
    if _forward_clearance(last_scan, half_beam_rad=math.radians(1.0)) < cfg.reverse_clearance_m:
        return CommandVector(-1, -1)
    wx, wy = _waypoint(world, robot, cfg)
    heading_err = wrap_angle(math.atan2(wy - robot.y, wx - robot.x) - robot.pose)
    if heading_err > math.pi:
        heading_err -= 2.0 * math.pi
    if abs(heading_err) <= cfg.heading_deadband_rad:
        return CommandVector(1, 1)
    # positive error = waypoint to the left = positive yaw = (right fwd, left back)
    return CommandVector(1, -1) if heading_err > 0 else CommandVector(-1, 1)


def _collides(world: WorldSpec, x: float, y: float) -> bool:
    if not world.bounds.contains(x, y):
        return True
    return any(w.contains(x, y) for w in world.walls)


def generate_session(world: WorldSpec, lidar: LidarModel | None = None,
                     cfg: OracleConfig | None = None, max_frames: int = 250,
                     kin_noise_sigma: float = 0.01,
                     session_id: str | None = None) -> Session:
    """Simulate one labeled run at 10 fps.

    Stops when the goal is reached or after max_frames (the session is still
    emitted, flagged goal_reached=False). Pure function of (world, seed).
    """
    lidar = lidar or LidarModel()
    cfg = cfg or OracleConfig()
    rng = np.random.default_rng(world.seed)
    # small start jitter diversifies repeated runs of one scenario family
    robot = RobotState(x=world.start[0] + rng.normal(0.0, 0.05),
                       y=world.start[1] + rng.normal(0.0, 0.05),
                       pose=world.start_pose + rng.normal(0.0, 0.05))

    detections: list[list[LidarDetection]] = []
    kinematics: list[KinematicsVector] = []
    commands: list[CommandVector] = []
    goal_reached = False
    for _ in range(max_frames):
        scan = raycast(world, robot, lidar, rng)
        cmd = oracle_policy(world, robot, scan, cfg)
        truth = np.array([robot.x, robot.y, robot.vx, robot.vy, robot.pose])
        noisy = truth + rng.normal(0.0, kin_noise_sigma, size=5) \
            if kin_noise_sigma > 0 else truth
        detections.append(scan)
        kinematics.append(KinematicsVector(*noisy))
        commands.append(cmd)

        nxt = step_dynamics(robot, cmd)
        if _collides(world, nxt.x, nxt.y):
            # clipped motion stands in for the hardware security stop:
            # keep the heading change, refuse the translation
            nxt = replace(nxt, x=robot.x, y=robot.y, vx=0.0, vy=0.0)
        robot = nxt
        if math.dist((robot.x, robot.y), world.goal) <= GOAL_TOL_M:
            goal_reached = True
            break

    return Session(
        id=session_id or f"{world.name}_seed{world.seed}",
        fps=1.0 / DT,
        detections=tuple(tuple(f) for f in detections),
        kinematics=tuple(kinematics),
        commands=tuple(commands),
        source="synthetic",
        seed=world.seed,
        goal_reached=goal_reached,
    )


def scenario_families(base_seed: int = 0) -> list[WorldSpec]:
    """Six wall layouts: straight and angled walls of different widths.

    Starts face away from the goal and goals sit diagonally behind the
    walls, so every run opens with a sustained turn and keeps a realistic
    share of turning labels rather than degenerate straight driving.
    """
    bounds = Bounds(-3.2, -3.2, 3.2, 3.2)
    t = 0.2  # wall thickness, meters

    def mk(name, walls, goal, start, pose):
        return WorldSpec(walls=tuple(walls), goal=goal, bounds=bounds,
                         seed=base_seed, name=name, start=start, start_pose=pose)

    return [
        mk("straight_narrow", [Rect(0.0, 0.0, 1.0, t)],
           (0.8, 1.6), (-0.4, -1.2), 0.0),
        mk("straight_wide", [Rect(0.0, 0.0, 1.8, t)],
           (-0.8, 1.6), (0.4, -1.2), math.pi),
        mk("angled_left", [Rect(0.0, 0.0, 1.4, t, yaw=math.radians(30))],
           (0.9, 1.5), (0.0, -1.2), math.pi / 2),
        mk("angled_right", [Rect(0.0, 0.0, 1.4, t, yaw=math.radians(-30))],
           (-0.9, 1.5), (0.0, -1.2), math.pi / 2),
        mk("offset_wide", [Rect(-0.5, 0.1, 1.6, t)],
           (0.6, 1.6), (-0.6, -1.2), -math.pi / 2),
        mk("angled_narrow", [Rect(0.2, -0.1, 1.0, t, yaw=math.radians(45))],
           (-0.7, 1.6), (0.5, -1.2), 0.0),
    ]


def generate_dataset(scenarios: list[WorldSpec], sessions_per_scenario: int | list[int],
                     out_dir: str, lidar: LidarModel | None = None,
                     cfg: OracleConfig | None = None, max_frames: int = 250,
                     kin_noise_sigma: float = 0.01) -> list[str]:
    """Generate a balanced dataset and write a manifest.

    ``sessions_per_scenario`` is either one count applied to every scenario
    (balanced, the default protocol) or an explicit per-scenario list.
    Returns the relative session directories in manifest order.
    """
    if not scenarios:
        raise ValueError("need at least one scenario")
    if isinstance(sessions_per_scenario, int):
        counts = [sessions_per_scenario] * len(scenarios)
    else:
        counts = list(sessions_per_scenario)
        if len(counts) != len(scenarios):
            raise ValueError("per-scenario counts must match the scenario list")
    if any(c < 1 for c in counts):
        raise ValueError("session counts must be >= 1")

    rel_dirs = []
    for world, count in zip(scenarios, counts):
        for i in range(count):
            w = replace(world, seed=world.seed + 1000 * i + 1)
            sid = f"{w.name}_{i:02d}"
            s = generate_session(w, lidar, cfg, max_frames, kin_noise_sigma, session_id=sid)
            save_session(s, os.path.join(out_dir, sid))
            rel_dirs.append(sid)
    write_manifest(out_dir, rel_dirs)
    return rel_dirs


def balanced_counts(total: int = 38, families: int = 6) -> list[int]:
    """Near-equal per-family split, e.g. 38 over 6 -> [7, 7, 6, 6, 6, 6]."""
    base, extra = divmod(total, families)
    return [base + (1 if i < extra else 0) for i in range(families)]
