"""Tests for the look-compute-move scheduler core."""

import json
import math

import pytest

from ucircle.geometry import Point, dist
from ucircle.simcore import (
    FRAME_FULL_AXES,
    FRAME_Y_ONLY,
    OUTCOME_BUDGET,
    OUTCOME_CONVERGED,
    OUTCOME_FAULT,
    OUTCOME_STALL,
    STAY,
    CollisionFault,
    RobotState,
    Schedule,
    Snapshot,
    TraceEvent,
    WorldState,
    execute_cycle,
    move_to,
    next_activation,
    run,
    take_snapshot,
)

P = Point


def make_world(positions, **kw):
    return WorldState(tuple(RobotState(i, p, **kw) for i, p in enumerate(positions)))


# ---------------------------------------------------------------------------
# Snapshots and frames
# ---------------------------------------------------------------------------


class TestSnapshots:
    def test_full_axes_sees_world_coordinates(self):
        w = make_world([P(1, 2), P(4, 6)], frame=FRAME_FULL_AXES)
        snap = take_snapshot(w, 0)
        assert snap.self_pos == P(1, 2)
        assert snap.others == (P(4, 6),)

    def test_y_only_translates_to_self(self):
        w = make_world([P(1, 2), P(4, 6)], frame=FRAME_Y_ONLY)
        snap = take_snapshot(w, 0)
        assert snap.self_pos == P(0, 0)
        assert snap.others == (P(3, 4),)

    def test_y_only_mirrors_x_with_chirality(self):
        w = WorldState(
            (
                RobotState(0, P(1, 2), frame=FRAME_Y_ONLY, chirality=-1),
                RobotState(1, P(4, 6)),
            )
        )
        snap = take_snapshot(w, 0)
        assert snap.others == (P(-3, 4),)

    def test_visibility_filter(self):
        w = make_world([P(0, 0), P(3, 0), P(30, 0)], vis_radius=5.0)
        snap = take_snapshot(w, 0)
        assert snap.others == (P(3, 0),)

    def test_visibility_boundary_inclusive(self):
        w = make_world([P(0, 0), P(5, 0)], vis_radius=5.0)
        assert take_snapshot(w, 0).others == (P(5, 0),)

    def test_move_dest_interpreted_in_local_frame(self):
        # A mirrored y-only robot asking to move to local (1, 0) must move
        # to world x - 1.
        w = WorldState((RobotState(0, P(10, 0), frame=FRAME_Y_ONLY, chirality=-1),))
        new, _, _ = execute_cycle(w, [0], lambda s: move_to(P(1, 0)))
        assert dist(new.robot(0).pos, P(9, 0)) < 1e-12


# ---------------------------------------------------------------------------
# Schedulers
# ---------------------------------------------------------------------------


class TestNextActivation:
    def test_fsync_activates_all(self):
        sched = Schedule("FSYNC")
        for rnd in range(5):
            assert next_activation(sched, 4, rnd) == (0, 1, 2, 3)

    def test_ssync_nonempty_and_fair(self):
        fb = 3
        sched = Schedule("SSYNC", seed=17, fairness_bound=fb)
        n = 6
        last_seen = {i: -1 for i in range(n)}
        for rnd in range(60):
            active = next_activation(sched, n, rnd)
            assert active
            assert all(0 <= i < n for i in active)
            for i in active:
                last_seen[i] = rnd
            for i, seen in last_seen.items():
                assert rnd - seen < fb, f"robot {i} starved"

    def test_async_singleton_covers_all_each_block(self):
        sched = Schedule("ASYNC", seed=5)
        n = 7
        for block in range(4):
            seen = set()
            for pos in range(n):
                active = next_activation(sched, n, block * n + pos)
                assert len(active) == 1
                seen.add(active[0])
            assert seen == set(range(n))

    def test_determinism(self):
        sched = Schedule("SSYNC", seed=3, fairness_bound=2)
        a = [next_activation(sched, 5, r) for r in range(20)]
        b = [next_activation(sched, 5, r) for r in range(20)]
        assert a == b

    def test_bad_kind_rejected(self):
        with pytest.raises(ValueError):
            Schedule("RANDOM")

    def test_bad_fairness_rejected(self):
        with pytest.raises(ValueError):
            Schedule("SSYNC", fairness_bound=0)


# ---------------------------------------------------------------------------
# Cycle execution
# ---------------------------------------------------------------------------


class TestExecuteCycle:
    def test_stationary_world_unchanged(self):
        w = make_world([P(0, 0), P(5, 0)])
        new, events, sep = execute_cycle(w, [0, 1], lambda s: STAY)
        assert new.positions() == w.positions()
        assert sep == 5.0
        phases = [e.phase for e in events]
        assert phases == ["wait", "look", "compute"] * 2

    def test_simple_move(self):
        w = make_world([P(0, 0)])

        new, events, _ = execute_cycle(w, [0], lambda s: move_to(P(3, 4), tag="hop"))
        assert dist(new.robot(0).pos, P(3, 4)) < 1e-12
        move_events = [e for e in events if e.phase == "move"]
        assert len(move_events) == 1
        assert move_events[0].dest == P(3, 4)
        assert move_events[0].tag == "hop"

    def test_inactive_robots_do_not_look(self):
        w = make_world([P(0, 0), P(9, 0)])
        _, events, _ = execute_cycle(w, [1], lambda s: STAY)
        assert {e.robot for e in events} == {1}

    def test_head_on_collision_faults(self):
        w = make_world([P(0, 0), P(6, 0)])

        def algo(snap: Snapshot):
            # Both robots charge at the other one.
            return move_to(snap.others[0])

        with pytest.raises(CollisionFault):
            execute_cycle(w, [0, 1], algo)

    def test_moving_past_parked_robot_faults(self):
        w = make_world([P(0, 0), P(5, 1.2)])

        def algo(snap: Snapshot):
            return move_to(P(10, 0)) if snap.self_pos == P(0, 0) else STAY

        with pytest.raises(CollisionFault):
            execute_cycle(w, [0, 1], algo)

    def test_parallel_motion_keeps_separation(self):
        w = make_world([P(0, 0), P(0, 2.5)])

        def algo(snap: Snapshot):
            return move_to(P(snap.self_pos.x + 8, snap.self_pos.y))

        new, _, sep = execute_cycle(w, [0, 1], algo)
        assert abs(sep - 2.5) < 1e-12
        assert dist(new.robot(0).pos, P(8, 0)) < 1e-12

    def test_unknown_robot_rejected(self):
        w = make_world([P(0, 0)])
        with pytest.raises(KeyError):
            execute_cycle(w, [7], lambda s: STAY)


# ---------------------------------------------------------------------------
# Trace format
# ---------------------------------------------------------------------------


class TestTraceFormat:
    def test_event_line_is_json(self):
        ev = TraceEvent(1.5, 3, 2, "move", P(0.1, -2.25), dest=P(1, 1), tag="psi3")
        rec = json.loads(ev.to_json_line())
        assert rec == {
            "clock": 1.5,
            "cycle": 3,
            "robot": 2,
            "phase": "move",
            "x": 0.1,
            "y": -2.25,
            "dest_x": 1.0,
            "dest_y": 1.0,
            "tag": "psi3",
        }

    def test_floats_round_trip_exactly(self):
        x = 1.0 / 3.0
        ev = TraceEvent(0.0, 0, 0, "look", P(x, -x))
        rec = json.loads(ev.to_json_line())
        assert rec["x"] == x and rec["y"] == -x

    def test_optional_fields_omitted(self):
        rec = json.loads(TraceEvent(0.0, 0, 0, "look", P(0, 0)).to_json_line())
        assert "dest_x" not in rec and "tag" not in rec


# ---------------------------------------------------------------------------
# Full runs
# ---------------------------------------------------------------------------


def gather_at_x(target_x):
    """Tiny test algorithm: every robot walks to x=target_x on its own row."""

    def algo(snap: Snapshot):
        if abs(snap.self_pos.x - target_x) <= 1e-12:
            return STAY
        return move_to(P(target_x, snap.self_pos.y), tag="walk")

    return algo


def all_at_x(target_x):
    def term(world: WorldState) -> bool:
        return all(abs(r.pos.x - target_x) <= 1e-9 for r in world.robots)

    return term


class TestRun:
    @pytest.mark.parametrize("kind", ["FSYNC", "SSYNC", "ASYNC"])
    def test_converges_under_all_schedulers(self, kind):
        w = make_world([P(0, 0), P(5, 4), P(-3, 8)])
        sched = Schedule(kind, seed=2, fairness_bound=3)
        trace = run(w, gather_at_x(1.0), sched, all_at_x(1.0), max_cycles=200)
        assert trace.outcome == OUTCOME_CONVERGED
        assert all(abs(r.pos.x - 1.0) <= 1e-9 for r in trace.final.robots)
        assert trace.min_separation >= 2.0

    def test_budget_exhaustion(self):
        w = make_world([P(0, 0)])

        def wander(snap: Snapshot):
            # Never settles: keeps hopping between two columns.
            x = 0.0 if snap.self_pos.x > 0.5 else 1.0
            return move_to(P(x, snap.self_pos.y))

        trace = run(w, wander, Schedule("FSYNC"), lambda w_: False, max_cycles=10)
        assert trace.outcome == OUTCOME_BUDGET
        assert trace.cycles_used == 10

    def test_stall_diagnosis_carries_tags(self):
        from ucircle.simcore import Action

        w = make_world([P(0, 0), P(9, 0)])

        def tagged_stay(snap: Snapshot):
            return Action("stay", tag="blocked")

        trace = run(w, tagged_stay, Schedule("FSYNC"), lambda w_: False, max_cycles=5)
        assert trace.outcome == OUTCOME_STALL
        assert trace.diagnosis == "blocked"

    def test_fault_outcome(self):
        w = make_world([P(0, 0), P(6, 0)])

        def charge(snap: Snapshot):
            return move_to(snap.others[0]) if snap.others else STAY

        trace = run(w, charge, Schedule("FSYNC"), lambda w_: False, max_cycles=5)
        assert trace.outcome == OUTCOME_FAULT
        assert trace.min_separation < 2.0

    def test_convergence_checked_before_moving(self):
        w = make_world([P(1, 0), P(1, 5)])
        trace = run(w, gather_at_x(1.0), Schedule("FSYNC"), all_at_x(1.0), max_cycles=5)
        assert trace.outcome == OUTCOME_CONVERGED
        assert trace.cycles_used == 0
        assert trace.events == []

    def test_async_trace_byte_identical_on_rerun(self):
        w = make_world([P(0, 0), P(5, 4), P(-3, 8)])
        sched = Schedule("ASYNC", seed=77, fairness_bound=9)
        t1 = run(w, gather_at_x(2.0), sched, all_at_x(2.0), max_cycles=300)
        t2 = run(w, gather_at_x(2.0), sched, all_at_x(2.0), max_cycles=300)
        assert t1.outcome == OUTCOME_CONVERGED
        assert t1.to_jsonl() == t2.to_jsonl()

    def test_async_interleaves_observations(self):
        # Under ASYNC a robot can be observed mid-move; the run must still
        # converge for a confluent algorithm.
        w = make_world([P(0, 0), P(10, 6)])
        sched = Schedule("ASYNC", seed=4, fairness_bound=6)
        trace = run(w, gather_at_x(3.0), sched, all_at_x(3.0), max_cycles=100)
        assert trace.outcome == OUTCOME_CONVERGED

    def test_clock_monotone(self):
        w = make_world([P(0, 0), P(7, 3)])
        trace = run(
            w, gather_at_x(1.0), Schedule("SSYNC", seed=9), all_at_x(1.0), max_cycles=50
        )
        clocks = [e.clock for e in trace.events]
        assert clocks == sorted(clocks)

    def test_bad_budget_rejected(self):
        w = make_world([P(0, 0)])
        with pytest.raises(ValueError):
            run(w, lambda s: STAY, Schedule("FSYNC"), lambda w_: True, max_cycles=0)
