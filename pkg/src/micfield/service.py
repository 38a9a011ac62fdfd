"""HTTP/WebSocket front door for interactive listening.

Control plane is JSON over HTTP; the data plane is binary frames over a
WebSocket, raw float32 PCM at the engine rate so offline renders can be
compared bit for bit.

Frame layout (little-endian), 28-byte header then payload:

    magic          4s   b"MICF"
    version        u16  1
    frame_type     u8   0 = audio, 1 = keepalive, 2 = gap marker
    flags          u8   bit 0: a crossfade was active in this block
    block_index    u64  source block index
    snapshot_index u32  parameter snapshot in effect for this block
    block_size     u32  samples per channel (0 for keepalive)
    channels       u16  channel count (0 for keepalive)
    reserved       u16  zero; pads the payload to 4-byte alignment

The padding keeps the float32 payload aligned so browser clients can view
it in place without copying.

Each session owns one render thread; control requests only enqueue updates,
which the renderer applies at block boundaries. Subscribers get bounded
queues: a slow consumer loses oldest frames and sees a gap marker.
"""

from __future__ import annotations

import math
import queue
import struct
import threading
import time
import uuid
from dataclasses import dataclass
from typing import Literal

import numpy as np
from fastapi import FastAPI, HTTPException, Request, WebSocket, WebSocketDisconnect
from pydantic import BaseModel

from . import __version__
from .analysis import angle_grid, classical_directivity, monochromatic_pattern
from .audio_io import AudioBuffer, WavFormatError, read_wav, read_wav_bytes, to_mono
from .config import ConfigError, SceneConfig, parse_scene_config
from .geometry import MicParams, ValidityError
from .render import MicSetup, Scene, SceneRenderer

FRAME_MAGIC = b"MICF"
FRAME_VERSION = 1
FRAME_HEADER = struct.Struct("<4sHBBQIIHH")
FRAME_AUDIO = 0
FRAME_KEEPALIVE = 1
FRAME_GAP = 2
FLAG_CROSSFADE = 0x01

KEEPALIVE_INTERVAL = 0.25
SUBSCRIBER_QUEUE_BLOCKS = 256
MAX_UPLOAD_BYTES = 64 * 1024 * 1024

DEFAULT_MIC = {"label": "cardioid", "position": (0.0, 0.0), "orientation": 0.0,
               "m": 0.5, "d": 0.02, "g": 0.9}


def pack_frame(frame_type: int, flags: int, block_index: int, snapshot_index: int,
               payload: np.ndarray | None = None, channels: int = 0,
               block_size: int = 0) -> bytes:
    header = FRAME_HEADER.pack(FRAME_MAGIC, FRAME_VERSION, frame_type, flags,
                               block_index, snapshot_index, block_size, channels, 0)
    if payload is None:
        return header
    return header + payload.astype("<f4").tobytes()


def unpack_frame(data: bytes) -> dict:
    magic, version, ftype, flags, block, snapshot, block_size, channels, _pad = (
        FRAME_HEADER.unpack(data[:FRAME_HEADER.size]))
    if magic != FRAME_MAGIC:
        raise ValueError(f"bad frame magic {magic!r}")
    if version != FRAME_VERSION:
        raise ValueError(f"unsupported frame version {version}")
    out = {
        "type": ftype, "flags": flags, "block_index": block,
        "snapshot_index": snapshot, "block_size": block_size, "channels": channels,
    }
    if ftype == FRAME_AUDIO:
        flat = np.frombuffer(data[FRAME_HEADER.size:], dtype="<f4")
        out["samples"] = flat.reshape(block_size, channels).T
    return out


class _Subscriber:
    def __init__(self):
        self.q: queue.Queue = queue.Queue(maxsize=SUBSCRIBER_QUEUE_BLOCKS)
        self.dropped = False

    def offer(self, frame: bytes, next_block: int, snapshot: int) -> None:
        if self.dropped and self.q.maxsize - self.q.qsize() >= 2:
            gap = pack_frame(FRAME_GAP, 0, next_block, snapshot)
            try:
                self.q.put_nowait(gap)
                self.dropped = False
            except queue.Full:
                pass
        try:
            self.q.put_nowait(frame)
        except queue.Full:
            try:
                self.q.get_nowait()
            except queue.Empty:
                pass
            self.dropped = True
            try:
                self.q.put_nowait(frame)
            except queue.Full:
                pass


@dataclass
class Transport:
    playing: bool = False
    position_blocks: int = 0
    ended: bool = False


class Session:
    """One loaded source + scene + render loop + stream subscribers."""

    def __init__(self, source: AudioBuffer, scene: Scene, block_size: int,
                 interpolation: str, max_distance: float, crossfade_ms: float,
                 pace: str = "realtime"):
        self.id = uuid.uuid4().hex
        self.source = source
        self.scene = scene
        self.pace = pace
        self.renderer = SceneRenderer(
            scene, block_size=block_size, interpolation=interpolation,
            max_distance=max_distance, crossfade_ms=crossfade_ms,
        )
        n = source.n_samples
        self.n_blocks = (n + block_size - 1) // block_size
        self._padded = np.zeros(self.n_blocks * block_size)
        self._padded[:n] = source.samples[0]
        self.transport = Transport()
        self.lock = threading.Lock()
        self.subscribers: list[_Subscriber] = []
        self._stop = threading.Event()
        self._thread = threading.Thread(target=self._run, name=f"render-{self.id[:8]}",
                                        daemon=True)
        self._thread.start()

    # -- render loop -------------------------------------------------------

    def _run(self) -> None:
        bs = self.renderer.block_size
        block_dur = bs / self.scene.fs
        next_deadline = time.monotonic()
        last_keepalive = 0.0
        while not self._stop.is_set():
            with self.lock:
                playing = self.transport.playing
                pos = self.transport.position_blocks
            if playing and pos < self.n_blocks:
                if self.pace == "fast":
                    # no drops offline: wait for every subscriber to have room
                    while (not self._stop.is_set()
                           and any(s.q.full() for s in self.subscribers)):
                        time.sleep(0.005)
                    if self._stop.is_set():
                        break
                out = self.renderer.process_block(self._padded[pos * bs:(pos + 1) * bs])
                flags = FLAG_CROSSFADE if self.renderer.fading else 0
                payload = out.T.reshape(-1)  # sample-major interleave
                frame = pack_frame(FRAME_AUDIO, flags, pos, self.renderer.snapshot_index,
                                   payload, channels=out.shape[0], block_size=bs)
                snapshot = self.renderer.snapshot_index
                for sub in list(self.subscribers):
                    sub.offer(frame, pos, snapshot)
                with self.lock:
                    self.transport.position_blocks = pos + 1
                    if pos + 1 >= self.n_blocks:
                        self.transport.playing = False
                        self.transport.ended = True
                if self.pace == "realtime":
                    next_deadline += block_dur
                    delay = next_deadline - time.monotonic()
                    if delay > 0:
                        time.sleep(delay)
                    elif delay < -0.25:
                        next_deadline = time.monotonic()
            else:
                self.renderer.apply_pending_updates()
                now = time.monotonic()
                if now - last_keepalive >= KEEPALIVE_INTERVAL:
                    frame = pack_frame(FRAME_KEEPALIVE, 0,
                                       self.transport.position_blocks,
                                       self.renderer.snapshot_index)
                    for sub in list(self.subscribers):
                        sub.offer(frame, self.transport.position_blocks,
                                  self.renderer.snapshot_index)
                    last_keepalive = now
                time.sleep(0.01)
                next_deadline = time.monotonic()

    def subscribe(self) -> _Subscriber:
        sub = _Subscriber()
        self.subscribers.append(sub)
        return sub

    def unsubscribe(self, sub: _Subscriber) -> None:
        if sub in self.subscribers:
            self.subscribers.remove(sub)

    def close(self) -> None:
        self._stop.set()
        self._thread.join(timeout=2.0)

    # -- state -------------------------------------------------------------

    def state(self) -> dict:
        with self.lock:
            transport = {
                "playing": self.transport.playing,
                "position_blocks": self.transport.position_blocks,
                "ended": self.transport.ended,
            }
        r = self.renderer
        return {
            "session_id": self.id,
            "fs": self.source.fs,
            "duration_samples": self.source.n_samples,
            "n_blocks": self.n_blocks,
            "block_size": r.block_size,
            "pace": self.pace,
            "snapshot_index": r.snapshot_index,
            "transport": transport,
            "source_position": list(r.source_position),
            "mics": [
                {
                    "index": i,
                    "label": self.scene.mics[i].label,
                    "position": list(self.scene.mics[i].position),
                    "orientation": self.scene.mics[i].orientation,
                    "m": r.voices[i].params.m,
                    "d": r.voices[i].params.d,
                    "g": r.voices[i].params.g,
                    "derived": r.derived_state(i),
                }
                for i in range(r.n_mics)
            ],
        }


class SessionManager:
    def __init__(self):
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()

    def add(self, session: Session) -> None:
        with self._lock:
            self._sessions[session.id] = session

    def get(self, session_id: str) -> Session:
        with self._lock:
            session = self._sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id}")
        return session

    def remove(self, session_id: str) -> None:
        with self._lock:
            session = self._sessions.pop(session_id, None)
        if session is None:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id}")
        session.close()

    def close_all(self) -> None:
        with self._lock:
            sessions = list(self._sessions.values())
            self._sessions.clear()
        for s in sessions:
            s.close()


# -- request bodies ----------------------------------------------------------


class MicPatch(BaseModel):
    m: float | None = None
    d: float | None = None
    g: float | None = None


class SourcePatch(BaseModel):
    x: float
    y: float


class TransportCommand(BaseModel):
    action: Literal["play", "pause", "seek"]
    position_blocks: int | None = None


class CreateSession(BaseModel):
    source_path: str | None = None
    pace: Literal["realtime", "fast"] = "realtime"
    block_size: int | None = None
    scene: dict | None = None


def _field_error(loc: list, msg: str) -> HTTPException:
    return HTTPException(status_code=422, detail=[{"loc": loc, "msg": msg,
                                                   "type": "value_error"}])


def create_app(default_config: SceneConfig | None = None) -> FastAPI:
    from contextlib import asynccontextmanager

    manager = SessionManager()

    @asynccontextmanager
    async def lifespan(_app):
        yield
        manager.close_all()

    app = FastAPI(title="micfield service", version=__version__, lifespan=lifespan)
    app.state.sessions = manager

    def build_scene(fs: float, scene_doc: dict | None) -> tuple[Scene, dict]:
        """Scene plus engine options from an inline doc, the server default
        config, or the built-in single cardioid."""
        engine = {"block_size": 256, "interpolation": "linear",
                  "max_distance": 50.0, "crossfade_ms": 20.0}
        if scene_doc is not None:
            doc = dict(scene_doc)
            doc.setdefault("schema", 1)
            cfg = parse_scene_config(doc)
        elif default_config is not None:
            cfg = default_config
        else:
            cfg = None
        if cfg is None:
            params = MicParams(m=DEFAULT_MIC["m"], d=DEFAULT_MIC["d"],
                               g=DEFAULT_MIC["g"], fs=fs)
            scene = Scene(fs=fs, mics=[MicSetup(params=params, label=DEFAULT_MIC["label"])],
                          source_position=(1.0, 0.0))
        else:
            scene = cfg.build_scene(fs)
            engine["block_size"] = cfg.engine.block_size
            engine["interpolation"] = cfg.engine.interpolation
            engine["max_distance"] = cfg.engine.max_distance
            engine["crossfade_ms"] = cfg.engine.crossfade_ms
        return scene, engine

    @app.get("/health")
    def health():
        return {"status": "ok", "version": __version__}

    @app.post("/sessions", status_code=201)
    async def create_session(request: Request):
        content_type = request.headers.get("content-type", "")
        body_params = CreateSession()
        if content_type.startswith("audio/"):
            raw = await request.body()
            if len(raw) > MAX_UPLOAD_BYTES:
                raise HTTPException(status_code=413, detail="upload too large")
            try:
                buf = read_wav_bytes(raw)
            except WavFormatError as exc:
                raise _field_error(["body"], str(exc))
            pace = request.query_params.get("pace", "realtime")
            if pace not in ("realtime", "fast"):
                raise _field_error(["query", "pace"], "pace must be realtime or fast")
            body_params.pace = pace
        else:
            try:
                body_params = CreateSession(**(await request.json()))
            except (ValueError, TypeError) as exc:
                raise _field_error(["body"], f"bad request body: {exc}")
            if not body_params.source_path:
                raise _field_error(["body", "source_path"],
                                   "source_path required (or upload audio/wav)")
            try:
                buf = read_wav(body_params.source_path)
            except FileNotFoundError:
                raise _field_error(["body", "source_path"],
                                   f"no such file: {body_params.source_path}")
            except WavFormatError as exc:
                raise _field_error(["body", "source_path"], str(exc))

        mono = to_mono(buf)
        try:
            scene, engine = build_scene(float(mono.fs), body_params.scene)
        except ConfigError as exc:
            msg = str(exc)
            if "engine.fs" in msg:
                raise HTTPException(status_code=409, detail=msg)
            raise _field_error(["body", "scene"], msg)
        except ValidityError as exc:
            raise _field_error(["body", "scene"], str(exc))
        if body_params.block_size:
            engine["block_size"] = body_params.block_size
        session = Session(
            source=mono, scene=scene, block_size=engine["block_size"],
            interpolation=engine["interpolation"], max_distance=engine["max_distance"],
            crossfade_ms=engine["crossfade_ms"], pace=body_params.pace,
        )
        manager.add(session)
        return session.state()

    @app.get("/sessions/{session_id}/state")
    def get_state(session_id: str):
        return manager.get(session_id).state()

    @app.delete("/sessions/{session_id}", status_code=204)
    def delete_session(session_id: str):
        manager.remove(session_id)

    @app.patch("/sessions/{session_id}/mics/{mic_index}")
    def patch_mic(session_id: str, mic_index: int, patch: MicPatch):
        session = manager.get(session_id)
        r = session.renderer
        if not 0 <= mic_index < r.n_mics:
            raise HTTPException(status_code=404,
                                detail=f"no mic {mic_index} in session")
        voice = r.voices[mic_index]
        m = patch.m if patch.m is not None else voice.params.m
        d = patch.d if patch.d is not None else voice.params.d
        g = patch.g if patch.g is not None else voice.params.g
        if not 0.0 <= m <= 1.0:
            raise _field_error(["body", "m"], "m must be in [0, 1]")
        if not d > 0.0:
            raise _field_error(["body", "d"], "d must be > 0")
        if not 0.0 <= g < 1.0:
            raise _field_error(["body", "g"], "g must be in [0, 1)")
        params = MicParams(m=m, d=d, g=g, c0=voice.params.c0, fs=voice.params.fs)
        try:
            taps = r.update_params(mic_index, params)
        except ValidityError as exc:
            raise _field_error(["body", "d"], str(exc))
        with session.lock:
            applies_at = session.transport.position_blocks
        return {
            "mic": mic_index,
            "effective": {"m": m, "d": d, "g": g},
            "applies_at_block": applies_at,
            "derived": {
                "r": voice.pose.r,
                "theta": voice.pose.theta,
                "delays": [taps.delay0, taps.delay1, taps.delay2],
                "gains": [taps.gain0, taps.gain1, taps.gain2],
            },
        }

    @app.patch("/sessions/{session_id}/source")
    def patch_source(session_id: str, patch: SourcePatch):
        session = manager.get(session_id)
        r = session.renderer
        try:
            taps = r.set_source_position(patch.x, patch.y)
        except ValidityError as exc:
            raise _field_error(["body"], f"{exc} (source must satisfy r >= d/2)")
        except ValueError as exc:
            raise _field_error(["body"], str(exc))
        mics = []
        for i in range(r.n_mics):
            pose = session.scene.pose_for(i, (patch.x, patch.y))
            mics.append({
                "index": i,
                "r": pose.r,
                "theta": pose.theta,
                "delays": [taps[i].delay0, taps[i].delay1, taps[i].delay2],
                "gains": [taps[i].gain0, taps[i].gain1, taps[i].gain2],
            })
        with session.lock:
            applies_at = session.transport.position_blocks
        return {"source_position": [patch.x, patch.y], "mics": mics,
                "applies_at_block": applies_at}

    @app.post("/sessions/{session_id}/transport")
    def transport(session_id: str, cmd: TransportCommand):
        session = manager.get(session_id)
        with session.lock:
            t = session.transport
            if cmd.action == "play":
                if t.position_blocks >= session.n_blocks:
                    t.position_blocks = 0
                t.playing = True
                t.ended = False
            elif cmd.action == "pause":
                t.playing = False
            else:
                if cmd.position_blocks is None:
                    raise _field_error(["body", "position_blocks"],
                                       "seek needs position_blocks")
                pos = max(0, min(int(cmd.position_blocks), session.n_blocks))
                t.position_blocks = pos
                t.ended = False
            state = {"playing": t.playing, "position_blocks": t.position_blocks,
                     "ended": t.ended}
        return state

    @app.get("/sessions/{session_id}/pattern")
    def pattern(session_id: str, f: float = 1000.0, mode: str = "lossy",
                mic: int = 0, points: int = 72):
        session = manager.get(session_id)
        r = session.renderer
        if not 0 <= mic < r.n_mics:
            raise HTTPException(status_code=404, detail=f"no mic {mic} in session")
        if mode not in ("lossy", "ideal"):
            raise _field_error(["query", "mode"], "mode must be lossy or ideal")
        if not 0.0 < f <= session.source.fs / 2.0:
            raise _field_error(["query", "f"], f"f must be in (0, {session.source.fs / 2}]")
        if not 4 <= points <= 3600:
            raise _field_error(["query", "points"], "points must be in [4, 3600]")
        voice = r.voices[mic]
        angles = angle_grid(points)
        table = monochromatic_pattern(voice.params, f, voice.pose.r,
                                      angles=angles, integrator=mode)
        return {
            "f": f,
            "mode": mode,
            "mic": mic,
            "r": voice.pose.r,
            "theta": voice.pose.theta,
            "m": voice.params.m,
            "angles_deg": [math.degrees(a) for a in angles],
            "magnitude": table.magnitude[:, 0, 0].tolist(),
            "classical": classical_directivity(voice.params.m, angles).tolist(),
            "snapshot_index": r.snapshot_index,
        }

    @app.websocket("/sessions/{session_id}/stream")
    async def stream(ws: WebSocket, session_id: str):
        import anyio

        try:
            session = manager.get(session_id)
        except HTTPException:
            await ws.close(code=4404)
            return
        await ws.accept()
        sub = session.subscribe()
        try:
            while True:
                frame = await anyio.to_thread.run_sync(_get_frame, sub.q)
                if frame is not None:
                    await ws.send_bytes(frame)
        except (WebSocketDisconnect, RuntimeError):
            pass
        finally:
            session.unsubscribe(sub)

    return app


def _get_frame(q: queue.Queue):
    try:
        return q.get(timeout=0.5)
    except queue.Empty:
        return None
