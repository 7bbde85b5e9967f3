"""Look-compute-move execution engine.

The engine runs oblivious compute functions (Snapshot -> Action) under
FSYNC/SSYNC round schedulers or an event-driven ASYNC scheduler, with
rigid unit-speed motion, continuous collision monitoring, and an
append-only trace.

Algorithms never see robot handles: a Snapshot carries only points in the
observer's local frame, so anonymity holds by construction.
"""

from __future__ import annotations

import heapq
import math
import random
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Optional, Sequence

from .geometry import EPS, MotionSegment, Point, dist, min_separation_during_motion

SAFE_SEPARATION = 2.0 - 1e-9

FRAME_Y_ONLY = "y-only"
FRAME_FULL_AXES = "full-axes"

PHASES = ("wait", "look", "compute", "move")


class SimulationFault(RuntimeError):
    pass


class CollisionFault(SimulationFault):
    def __init__(self, msg: str, separation: float):
        super().__init__(msg)
        self.separation = separation


class InvalidActionFault(SimulationFault):
    pass


@dataclass(frozen=True, slots=True)
class RobotState:
    rid: int
    pos: Point
    vis_radius: float = math.inf
    chirality: int = 1  # +1 keeps world X, -1 mirrors it in the local frame
    frame: str = FRAME_FULL_AXES
    body_radius: float = 1.0


@dataclass(frozen=True, slots=True)
class WorldState:
    robots: tuple[RobotState, ...]
    clock: float = 0.0

    def positions(self) -> list[Point]:
        return [r.pos for r in self.robots]

    def robot(self, rid: int) -> RobotState:
        for r in self.robots:
            if r.rid == rid:
                return r
        raise KeyError(f"unknown robot handle {rid}")


@dataclass(frozen=True, slots=True)
class Snapshot:
    """What one robot perceives: itself and the visible others, local frame."""

    self_pos: Point
    others: tuple[Point, ...]
    vis_radius: float


@dataclass(frozen=True, slots=True)
class Action:
    kind: str  # "stay" | "move"
    dest: Optional[Point] = None  # local frame
    tag: str = ""


STAY = Action("stay")


def move_to(dest: Point, tag: str = "") -> Action:
    return Action("move", dest, tag)


@dataclass(frozen=True, slots=True)
class Schedule:
    kind: str  # "FSYNC" | "SSYNC" | "ASYNC"
    seed: int = 0
    fairness_bound: int = 1

    def __post_init__(self) -> None:
        if self.kind not in ("FSYNC", "SSYNC", "ASYNC"):
            raise ValueError(f"unknown scheduler kind {self.kind!r}")
        if self.fairness_bound < 1:
            raise ValueError("fairness_bound must be >= 1")


@dataclass(frozen=True, slots=True)
class TraceEvent:
    clock: float
    cycle: int
    robot: int
    phase: str
    pos: Point
    dest: Optional[Point] = None
    tag: str = ""

    def to_json_line(self) -> str:
        parts = [
            f'"clock": {self.clock:.17g}',
            f'"cycle": {self.cycle}',
            f'"robot": {self.robot}',
            f'"phase": "{self.phase}"',
            f'"x": {self.pos.x:.17g}',
            f'"y": {self.pos.y:.17g}',
        ]
        if self.dest is not None:
            parts.append(f'"dest_x": {self.dest.x:.17g}')
            parts.append(f'"dest_y": {self.dest.y:.17g}')
        if self.tag:
            parts.append(f'"tag": "{self.tag}"')
        return "{" + ", ".join(parts) + "}"


OUTCOME_CONVERGED = "converged"
OUTCOME_BUDGET = "cycle-budget-exhausted"
OUTCOME_FAULT = "fault"
OUTCOME_STALL = "diagnosed-stall"


@dataclass
class Trace:
    events: list[TraceEvent]
    outcome: str
    initial: WorldState
    final: WorldState
    cycles_used: int
    min_separation: float
    diagnosis: str = ""

    def to_jsonl(self) -> str:
        return "".join(ev.to_json_line() + "\n" for ev in self.events)


# ---------------------------------------------------------------------------
# Snapshots and frames
# ---------------------------------------------------------------------------


def _to_local(observer: RobotState, p: Point) -> Point:
    if observer.frame == FRAME_FULL_AXES:
        return p
    return Point((p.x - observer.pos.x) * observer.chirality, p.y - observer.pos.y)


def _to_world(observer: RobotState, local: Point) -> Point:
    if observer.frame == FRAME_FULL_AXES:
        return local
    return Point(observer.pos.x + local.x * observer.chirality, observer.pos.y + local.y)


def take_snapshot(world: WorldState, rid: int) -> Snapshot:
    obs = world.robot(rid)
    others = tuple(
        _to_local(obs, r.pos)
        for r in world.robots
        if r.rid != rid and dist(r.pos, obs.pos) <= obs.vis_radius + EPS
    )
    return Snapshot(self_pos=_to_local(obs, obs.pos), others=others, vis_radius=obs.vis_radius)


# ---------------------------------------------------------------------------
# Schedulers
# ---------------------------------------------------------------------------


def next_activation(schedule: Schedule, n_robots: int, round_index: int) -> tuple[int, ...]:
    """Deterministic activation set for one scheduler round."""
    if n_robots <= 0:
        return ()
    if schedule.kind == "FSYNC":
        return tuple(range(n_robots))
    rng = random.Random(f"{schedule.seed}:{round_index}:{n_robots}")
    if schedule.kind == "SSYNC":
        fb = schedule.fairness_bound
        active = {i for i in range(n_robots) if rng.random() < 0.5}
        # Fairness backstop: robot i is forced in every round == i mod fb.
        active.update(i for i in range(n_robots) if round_index % fb == i % fb)
        if not active:
            active.add(rng.randrange(n_robots))
        return tuple(sorted(active))
    # ASYNC round view: seeded round-robin singleton (fair with bound n).
    block, pos = divmod(round_index, n_robots)
    perm = list(range(n_robots))
    random.Random(f"{schedule.seed}:blk:{block}:{n_robots}").shuffle(perm)
    return (perm[pos],)


# ---------------------------------------------------------------------------
# Synchronous rounds
# ---------------------------------------------------------------------------


def _check_action(action: Action) -> None:
    if action.kind == "move":
        if action.dest is None or not action.dest.is_finite():
            raise InvalidActionFault(f"non-finite move destination {action.dest}")


def execute_cycle(
    world: WorldState,
    active: Sequence[int],
    algorithm: Callable[[Snapshot], Action],
    cycle: int = 0,
) -> tuple[WorldState, list[TraceEvent], float]:
    """One FSYNC/SSYNC round: active robots look together, then move together.

    Returns (new world, trace events, min pairwise separation of the round).
    Raises CollisionFault when concurrent motions come closer than two units.
    """
    known = {r.rid for r in world.robots}
    for rid in active:
        if rid not in known:
            raise KeyError(f"activation of unknown robot handle {rid}")

    t0 = world.clock
    events: list[TraceEvent] = []
    decisions: dict[int, Action] = {}
    for rid in sorted(active):
        obs = world.robot(rid)
        snap = take_snapshot(world, rid)
        action = algorithm(snap)
        _check_action(action)
        decisions[rid] = action
        events.append(TraceEvent(t0, cycle, rid, "wait", obs.pos))
        events.append(TraceEvent(t0, cycle, rid, "look", obs.pos))
        events.append(TraceEvent(t0, cycle, rid, "compute", obs.pos, tag=action.tag))

    moves: dict[int, Point] = {}
    for rid, action in decisions.items():
        if action.kind != "move":
            continue
        obs = world.robot(rid)
        dest_world = _to_world(obs, action.dest)
        if dist(dest_world, obs.pos) <= EPS:
            continue
        moves[rid] = dest_world
        events.append(TraceEvent(t0, cycle, rid, "move", obs.pos, dest=dest_world, tag=action.tag))

    durations = [dist(world.robot(rid).pos, d) for rid, d in moves.items()]
    round_span = max(durations) if durations else 1.0
    t1 = t0 + round_span

    pieces: dict[int, list[MotionSegment]] = {}
    for r in world.robots:
        if r.rid in moves:
            arrive = t0 + dist(r.pos, moves[r.rid])
            segs = [MotionSegment(r.pos, moves[r.rid], t0, arrive)]
            if arrive < t1:
                segs.append(MotionSegment(moves[r.rid], moves[r.rid], arrive, t1))
        else:
            segs = [MotionSegment(r.pos, r.pos, t0, t1)]
        pieces[r.rid] = segs

    min_sep = math.inf
    rids = [r.rid for r in world.robots]
    for i, a in enumerate(rids):
        for b in rids[i + 1 :]:
            if a not in moves and b not in moves:
                sep = dist(world.robot(a).pos, world.robot(b).pos)
            else:
                sep = min(
                    min_separation_during_motion(s1, s2)
                    for s1 in pieces[a]
                    for s2 in pieces[b]
                )
            if sep < min_sep:
                min_sep = sep
            if sep < SAFE_SEPARATION:
                raise CollisionFault(
                    f"robots {a} and {b} reach separation {sep:.6g} during cycle {cycle}",
                    sep,
                )

    new_robots = tuple(
        replace(r, pos=moves.get(r.rid, r.pos)) for r in world.robots
    )
    return WorldState(new_robots, t1), events, min_sep


# ---------------------------------------------------------------------------
# Full runs
# ---------------------------------------------------------------------------


def _all_would_stay(world: WorldState, algorithm: Callable[[Snapshot], Action]) -> bool:
    for r in world.robots:
        action = algorithm(take_snapshot(world, r.rid))
        if action.kind == "move":
            obs_dest = _to_world(r, action.dest)
            if dist(obs_dest, r.pos) > EPS:
                return False
    return True


def _stall_tags(world: WorldState, algorithm: Callable[[Snapshot], Action]) -> str:
    tags = sorted(
        {algorithm(take_snapshot(world, r.rid)).tag for r in world.robots} - {""}
    )
    return ",".join(tags)


def run(
    world: WorldState,
    algorithm: Callable[[Snapshot], Action],
    schedule: Schedule,
    termination: Callable[[WorldState], bool],
    max_cycles: int,
) -> Trace:
    """Run the scheduler loop until convergence, stall, fault, or budget."""
    if max_cycles < 1:
        raise ValueError("max_cycles must be >= 1")
    if schedule.kind == "ASYNC":
        return _run_async(world, algorithm, schedule, termination, max_cycles)
    return _run_sync(world, algorithm, schedule, termination, max_cycles)


def _run_sync(world, algorithm, schedule, termination, max_cycles) -> Trace:
    initial = world
    events: list[TraceEvent] = []
    min_sep = math.inf
    n = len(world.robots)
    cycle = 0
    while cycle < max_cycles:
        if termination(world):
            return Trace(events, OUTCOME_CONVERGED, initial, world, cycle, min_sep)
        if _all_would_stay(world, algorithm):
            return Trace(
                events,
                OUTCOME_STALL,
                initial,
                world,
                cycle,
                min_sep,
                diagnosis=_stall_tags(world, algorithm) or "fixed-point",
            )
        active = next_activation(schedule, n, cycle)
        try:
            world, evs, sep = execute_cycle(world, active, algorithm, cycle)
        except SimulationFault as exc:
            if isinstance(exc, CollisionFault):
                min_sep = min(min_sep, exc.separation)
            return Trace(
                events, OUTCOME_FAULT, initial, world, cycle, min_sep, diagnosis=str(exc)
            )
        events.extend(evs)
        min_sep = min(min_sep, sep)
        cycle += 1
    if termination(world):
        return Trace(events, OUTCOME_CONVERGED, initial, world, cycle, min_sep)
    return Trace(events, OUTCOME_BUDGET, initial, world, cycle, min_sep)


# --- ASYNC (CORDA-style) event loop ----------------------------------------


@dataclass
class _AsyncRobot:
    state: RobotState
    motion: Optional[MotionSegment] = None  # in-flight move, if any
    history: list[MotionSegment] = field(default_factory=list)
    hold_since: float = 0.0

    def position_at(self, t: float) -> Point:
        if self.motion is not None and t >= self.motion.t0:
            return self.motion.position_at(t)
        return self.state.pos

    def pieces_over(self, a: float, b: float) -> list[MotionSegment]:
        """Piecewise-linear trajectory covering [a, b] (past is fully known)."""
        out: list[MotionSegment] = []
        segs = list(self.history)
        if self.motion is not None:
            segs.append(self.motion)
        prev_end_t = None
        prev_end_p = None
        for seg in segs:
            if prev_end_t is not None and seg.t0 > prev_end_t:
                out.append(MotionSegment(prev_end_p, prev_end_p, prev_end_t, seg.t0))
            out.append(seg)
            prev_end_t, prev_end_p = seg.t1, seg.end
        if prev_end_t is None:
            out.append(MotionSegment(self.state.pos, self.state.pos, a, b))
        elif prev_end_t < b:
            out.append(MotionSegment(prev_end_p, prev_end_p, prev_end_t, b))
        return [s for s in out if s.t1 >= a and s.t0 <= b]


def _run_async(world, algorithm, schedule, termination, max_cycles) -> Trace:
    initial = world
    events: list[TraceEvent] = []
    n = len(world.robots)
    rng = random.Random(f"async:{schedule.seed}:{n}")
    window = float(schedule.fairness_bound)
    robots = {r.rid: _AsyncRobot(state=r, hold_since=world.clock) for r in world.robots}
    min_sep = math.inf
    for i, a in enumerate(world.robots):
        for b in world.robots[i + 1 :]:
            min_sep = min(min_sep, dist(a.pos, b.pos))

    def delay() -> float:
        return 0.05 + rng.random() * window

    # Event queue: (time, robot id, seq, kind). kind in {"look", "arrive"}.
    heap: list[tuple[float, int, int, str]] = []
    seq = 0
    for rid in sorted(robots):
        heapq.heappush(heap, (world.clock + delay(), rid, seq, "look"))
        seq += 1

    looks = 0
    budget_looks = max_cycles * n
    moving = 0

    def instantaneous(t: float) -> WorldState:
        return WorldState(
            tuple(replace(rb.state, pos=rb.position_at(t)) for _, rb in sorted(robots.items())),
            t,
        )

    def static_world(t: float) -> WorldState:
        return WorldState(tuple(rb.state for _, rb in sorted(robots.items())), t)

    while heap:
        t, rid, _, kind = heapq.heappop(heap)
        rb = robots[rid]
        if kind == "arrive":
            seg = rb.motion
            assert seg is not None
            # The past is fully determined: check the finished segment against
            # every other robot's trajectory over its interval.
            for other_id, other in robots.items():
                if other_id == rid:
                    continue
                for piece in other.pieces_over(seg.t0, seg.t1):
                    sep = min_separation_during_motion(seg, piece)
                    min_sep = min(min_sep, sep)
                    if sep < SAFE_SEPARATION:
                        return Trace(
                            events,
                            OUTCOME_FAULT,
                            initial,
                            instantaneous(t),
                            looks // n,
                            min_sep,
                            diagnosis=(
                                f"robots {rid} and {other_id} reach separation {sep:.6g}"
                            ),
                        )
            rb.history.append(seg)
            rb.motion = None
            rb.state = replace(rb.state, pos=seg.end)
            rb.hold_since = t
            moving -= 1
            heapq.heappush(heap, (t + delay(), rid, seq, "look"))
            seq += 1
        else:  # look
            if looks >= budget_looks:
                return Trace(events, OUTCOME_BUDGET, initial, instantaneous(t), max_cycles, min_sep)
            looks += 1
            cycle = (looks - 1) // n
            view = instantaneous(t)
            snap = take_snapshot(view, rid)
            action = algorithm(snap)
            _check_action(action)
            cur = rb.position_at(t)
            events.append(TraceEvent(t, cycle, rid, "wait", cur))
            events.append(TraceEvent(t, cycle, rid, "look", cur))
            events.append(TraceEvent(t, cycle, rid, "compute", cur, tag=action.tag))
            start = t + delay()
            if action.kind == "move":
                dest = _to_world(view.robot(rid), action.dest)
                if dist(dest, rb.state.pos) > EPS:
                    seg = MotionSegment(rb.state.pos, dest, start, start + dist(rb.state.pos, dest))
                    if rb.hold_since < start:
                        rb.history.append(
                            MotionSegment(rb.state.pos, rb.state.pos, rb.hold_since, start)
                        )
                    rb.motion = seg
                    moving += 1
                    events.append(TraceEvent(start, cycle, rid, "move", rb.state.pos, dest=dest, tag=action.tag))
                    heapq.heappush(heap, (seg.t1, rid, seq, "arrive"))
                    seq += 1
                    continue
            heapq.heappush(heap, (start + delay(), rid, seq, "look"))
            seq += 1

        # Quiescent checkpoints: only meaningful when nothing is in flight.
        if moving == 0:
            w = static_world(t)
            if termination(w):
                return Trace(events, OUTCOME_CONVERGED, initial, w, (looks + n - 1) // n, min_sep)
            if _all_would_stay(w, algorithm):
                return Trace(
                    events,
                    OUTCOME_STALL,
                    initial,
                    w,
                    (looks + n - 1) // n,
                    min_sep,
                    diagnosis=_stall_tags(w, algorithm) or "fixed-point",
                )
    raise AssertionError("event queue drained unexpectedly")
