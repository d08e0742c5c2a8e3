"""Interactive simulation service.

Runs a drive in real or accelerated time and exposes it over a websocket
with JSON text frames. Clients may adjust the preference weight live;
updates latch at MPC sample boundaries, so every applied control remains
an actually solved Pareto point for a full sample distance. The
simulation loop never blocks on clients: each connection has a small
latest-first queue and slow consumers lose intermediate telemetry only.
"""

from __future__ import annotations

import asyncio
import contextlib
import logging
from dataclasses import dataclass, field

from fastapi import FastAPI, WebSocket, WebSocketDisconnect

from . import _core  # noqa: F401  (warm the jitted kernels at import)
from .controller import (DriveLog, LogSample, MpcConfig, StepResult,
                         load_drive_log, mpc_step)
from .errors import FormatError
from .library import Library
from .model import VehicleState
from .pareto import ObjectivePoint
from .params import KMH, ModelParams
from .track import Track, load_track

SCHEMA_VERSION = 1
log = logging.getLogger("paretodrive.service")


class Broadcaster:
    """Fan-out with per-client bounded queues; publishing never waits."""

    def __init__(self, depth: int = 4):
        self._depth = depth
        self._queues: set[asyncio.Queue] = set()

    def register(self) -> asyncio.Queue:
        q: asyncio.Queue = asyncio.Queue()
        self._queues.add(q)
        return q

    def unregister(self, q: asyncio.Queue) -> None:
        self._queues.discard(q)

    def publish(self, message: dict) -> None:
        """Only telemetry is droppable: a slow client sheds its oldest
        pending state frame, but errors and completion always arrive."""
        for q in self._queues:
            if message.get("type") == "state":
                pending = q._queue  # deque backing the asyncio.Queue
                if sum(1 for m in pending if m.get("type") == "state") >= self._depth:
                    for idx, m in enumerate(pending):
                        if m.get("type") == "state":
                            del pending[idx]
                            break
            q.put_nowait(message)


def _error(message: str) -> dict:
    return {"v": SCHEMA_VERSION, "type": "error", "message": message}


class _Reset(Exception):
    def __init__(self, track: Track):
        self.track = track


@dataclass
class SessionState:
    phase: str = "Idle"  # Idle | Driving | Paused | Finished
    rho: float = 0.5
    speed: float = 1.0


class Session:
    """One simulation loop plus its client fan-out."""

    def __init__(self, track: Track, library: Library, params: ModelParams,
                 config: MpcConfig = MpcConfig(), speed: float = 1.0,
                 rho0: float = 0.5, log_path=None, telemetry_hz: float = 10.0,
                 wait_for_client: bool = False):
        self.track = track
        self.library = library
        self.params = params
        self.config = config
        self.state = SessionState(rho=rho0, speed=speed)
        self.log_path = log_path
        self.telemetry_hz = telemetry_hz
        self.inbox: asyncio.Queue = asyncio.Queue()
        self.broadcaster = Broadcaster()
        self.last_log: DriveLog | None = None
        self.finished = asyncio.Event()
        self._snapshot: dict | None = None
        # at accelerated speeds a whole drive can outrun a connecting
        # client; tests opt in to holding the start for the first one
        self.wait_for_client = wait_for_client

    # -- message handling --------------------------------------------------

    def _handle(self, msg) -> None:
        if not isinstance(msg, dict) or "type" not in msg:
            self.broadcaster.publish(_error("message must be an object with a 'type'"))
            return
        kind = msg["type"]
        if kind == "set_rho":
            value = msg.get("value")
            if not isinstance(value, (int, float)) or not 0.0 <= value <= 1.0:
                self.broadcaster.publish(_error("set_rho value must lie in [0, 1]"))
                return
            self.state.rho = float(value)
        elif kind == "pause":
            if self.state.phase == "Driving":
                self.state.phase = "Paused"
        elif kind == "resume":
            if self.state.phase == "Paused":
                self.state.phase = "Driving"
        elif kind == "set_speed":
            factor = msg.get("factor")
            if not isinstance(factor, (int, float)) or factor <= 0:
                self.broadcaster.publish(_error("set_speed factor must be positive"))
                return
            self.state.speed = float(factor)
        elif kind == "reset":
            track = self.track
            if msg.get("track"):
                try:
                    track = load_track(msg["track"])
                except (OSError, FormatError) as exc:
                    self.broadcaster.publish(_error(f"reset failed: {exc}"))
                    return
            raise _Reset(track)
        else:
            self.broadcaster.publish(_error(f"unknown message type {kind!r}"))
            return
        # acknowledge accepted control messages with a state frame
        if self._snapshot is not None:
            self.broadcaster.publish(self._snapshot)

    def _drain(self) -> None:
        while True:
            try:
                msg = self.inbox.get_nowait()
            except asyncio.QueueEmpty:
                return
            self._handle(msg)

    # -- state frames ------------------------------------------------------

    def _frame(self, sample: LogSample, result: StepResult | None) -> dict:
        v_max = self.track.v_max_at(sample.p)
        front = []
        selected = -1
        if result is not None and result.front is not None:
            front = [{"u": e.u, "J1": e.objectives.J1, "J2": e.objectives.J2}
                     for e in result.front.entries]
            selected = result.selected
        return {
            "v": SCHEMA_VERSION, "type": "state",
            "t": sample.t, "p": sample.p, "v_kmh": sample.v_kmh,
            "S": sample.S, "u": sample.u, "rho": sample.rho,
            "scenario": sample.scenario,
            "limits": {"vmin": 0.8 * v_max, "vmax": v_max},
            "front": front, "selected": selected,
        }

    def _publish_frame(self, sample: LogSample, result: StepResult | None) -> None:
        self._snapshot = self._frame(sample, result)
        self.broadcaster.publish(self._snapshot)

    # -- the loop ----------------------------------------------------------

    async def run(self) -> None:
        while True:
            try:
                while self.wait_for_client and not self.broadcaster._queues:
                    await asyncio.sleep(0.005)
                await self._drive()
                self.finished.set()
                # stay alive for reset requests
                while True:
                    msg = await self.inbox.get()
                    self._handle(msg)
            except _Reset as reset:
                self.track = reset.track
                self.finished = asyncio.Event()
                self.last_log = None
            except asyncio.CancelledError:
                raise
            except Exception as exc:  # surfaced to clients, then stop
                log.exception("simulation loop failed")
                self.broadcaster.publish(_error(f"simulation failed: {exc}"))
                self.state.phase = "Finished"
                self.finished.set()
                return

    async def _drive(self) -> None:
        self.state.phase = "Driving"
        state = VehicleState(v=0.0, S=self.config.soc0)
        cleared: set[float] = set()
        rows: list[LogSample] = []
        while state.p < self.track.length - 1e-6:
            self._drain()
            while self.state.phase == "Paused":
                with contextlib.suppress(asyncio.TimeoutError):
                    msg = await asyncio.wait_for(self.inbox.get(), timeout=0.1)
                    self._handle(msg)
            rho = self.state.rho  # latched for this whole sample
            result = mpc_step(state, self.track, rho, self.library,
                              self.params, self.config, frozenset(cleared))
            start = 1 if rows else 0
            seg_rows = [LogSample(t=t, p=p, v_kmh=v / KMH,
                                  S=S, u=result.u, I=current, rho=rho,
                                  scenario=result.scenario_key)
                        for t, v, S, udl, uds, p, current
                        in result.samples[start:]]
            rows.extend(seg_rows)
            await self._play(seg_rows, result)
            if result.stopped_at is not None:
                cleared.add(result.stopped_at)
            state = result.state
        totals = ObjectivePoint(J1=self.config.soc0 - state.S, J2=state.t)
        self.last_log = DriveLog(samples=rows, totals=totals)
        if self.log_path:
            self.last_log.save(self.log_path)
        self.state.phase = "Finished"
        self.broadcaster.publish({
            "v": SCHEMA_VERSION, "type": "finished",
            "totals": {"J1": totals.J1, "J2": totals.J2},
        })

    async def _play(self, seg_rows: list[LogSample], result: StepResult) -> None:
        """Pace one applied segment in wall time, emitting telemetry frames."""
        if not seg_rows:
            return
        duration = seg_rows[-1].t - seg_rows[0].t
        wall = duration / self.state.speed
        n_frames = max(1, min(len(seg_rows),
                              int(wall * self.telemetry_hz) + 1))
        stride = max(1, len(seg_rows) // n_frames)
        for i in range(stride - 1, len(seg_rows) - 1, stride):
            self._publish_frame(seg_rows[i], result)
            await asyncio.sleep(wall * stride / len(seg_rows))
            self._drain()
        # the MPC-sample frame is always the last one published
        self._publish_frame(seg_rows[-1], result)


def create_app(session: Session) -> FastAPI:
    app = FastAPI(title="paretodrive sim service")
    app.state.session = session

    @app.on_event("startup")
    async def _start():
        app.state.task = asyncio.create_task(session.run())

    @app.on_event("shutdown")
    async def _stop():
        app.state.task.cancel()
        with contextlib.suppress(asyncio.CancelledError):
            await app.state.task

    @app.websocket("/ws")
    async def ws_endpoint(websocket: WebSocket):
        await websocket.accept()
        queue = session.broadcaster.register()

        async def pump():
            while True:
                await websocket.send_json(await queue.get())

        sender = asyncio.create_task(pump())
        try:
            while True:
                try:
                    msg = await websocket.receive_json()
                except ValueError:
                    await websocket.send_json(_error("frames must be JSON objects"))
                    continue
                await session.inbox.put(msg)
        except WebSocketDisconnect:
            pass
        finally:
            session.broadcaster.unregister(queue)
            sender.cancel()
            with contextlib.suppress(asyncio.CancelledError):
                await sender

    return app


class ReplaySession:
    """Streams a recorded drive log as state frames; no controller."""

    def __init__(self, log_path, speed: float = 1.0,
                 track: Track | None = None):
        self.log = load_drive_log(log_path)
        self.speed = speed
        self.track = track
        self.broadcaster = Broadcaster(depth=len(self.log.samples) + 2)
        self.inbox: asyncio.Queue = asyncio.Queue()
        self.finished = asyncio.Event()

    def _frame(self, s: LogSample) -> dict:
        v_max = self.track.v_max_at(s.p) if self.track else 0.0
        return {
            "v": SCHEMA_VERSION, "type": "state",
            "t": s.t, "p": s.p, "v_kmh": s.v_kmh, "S": s.S, "u": s.u,
            "rho": s.rho, "scenario": s.scenario,
            "limits": {"vmin": 0.8 * v_max, "vmax": v_max},
            "front": [], "selected": -1,
        }

    async def run(self) -> None:
        # a replay without a viewer is pointless: hold for the first client
        while not self.broadcaster._queues:
            await asyncio.sleep(0.005)
        samples = self.log.samples
        for prev, cur in zip([None] + samples[:-1], samples):
            if prev is not None:
                dt = max(cur.t - prev.t, 0.0)
                if dt > 0:
                    await asyncio.sleep(dt / self.speed)
            self.broadcaster.publish(self._frame(cur))
        self.broadcaster.publish({
            "v": SCHEMA_VERSION, "type": "finished",
            "totals": {"J1": self.log.totals.J1, "J2": self.log.totals.J2},
        })
        self.finished.set()
        while True:  # ignore control messages; replay has no controller
            msg = await self.inbox.get()
            self.broadcaster.publish(_error("replay sessions accept no controls"))
            del msg


def create_replay_app(session: ReplaySession) -> FastAPI:
    app = FastAPI(title="paretodrive replay service")
    app.state.session = session

    @app.on_event("startup")
    async def _start():
        app.state.task = asyncio.create_task(session.run())

    @app.on_event("shutdown")
    async def _stop():
        app.state.task.cancel()
        with contextlib.suppress(asyncio.CancelledError):
            await app.state.task

    @app.websocket("/ws")
    async def ws_endpoint(websocket: WebSocket):
        await websocket.accept()
        queue = session.broadcaster.register()
        try:
            while True:
                await websocket.send_json(await queue.get())
        except WebSocketDisconnect:
            pass
        finally:
            session.broadcaster.unregister(queue)

    return app


def serve(port: int, track: Track, library: Library, params: ModelParams,
          config: MpcConfig = MpcConfig(), speed: float = 1.0,
          rho0: float = 0.5, log_path=None, host: str = "127.0.0.1") -> None:
    import uvicorn
    session = Session(track, library, params, config, speed=speed,
                      rho0=rho0, log_path=log_path)
    uvicorn.run(create_app(session), host=host, port=port)


def replay(log_path, port: int, speed: float = 1.0,
           track: Track | None = None, host: str = "127.0.0.1") -> None:
    import uvicorn
    session = ReplaySession(log_path, speed=speed, track=track)
    uvicorn.run(create_replay_app(session), host=host, port=port)
