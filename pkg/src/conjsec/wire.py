"""Two-party key exchange over TCP.

Frames are a 4-byte big-endian length followed by a UTF-8 JSON object
``{"type", "words", "round"}``.  The message sequence is

    alice -> bob    hello   [protocol, platform, config fingerprint]
    bob   -> alice  hello   [protocol, platform, config fingerprint]
    alice -> bob    token(s)  Alice's conjugates
    bob   -> alice  token(s)  Bob's conjugates
    alice -> bob    done
    bob   -> alice  done

Each party derives its randomness from the shared seed and its role, so a wire
run reproduces the in-process exchange exactly.
"""

from __future__ import annotations

import hashlib
import json
import socket
import struct
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .protocols import (
    AAGConfig,
    KoLeeConfig,
    ProtocolConfig,
    Role,
    Transcript,
    aag_commit,
    aag_shared,
    derive_key,
    kolee_commit,
    kolee_shared,
    party_rng,
)
from .words import format_word, parse_word

FRAME_TYPES = ("hello", "token", "tokens", "done")
MAX_FRAME = 16 << 20


class WireError(Exception):
    exit_code = 3
    kind = "protocol-error"


class FrameError(WireError):
    exit_code = 3
    kind = "frame-violation"


class ConnectionFailure(WireError):
    exit_code = 5
    kind = "connection-failure"


class ConfigMismatch(WireError):
    exit_code = 6
    kind = "config-mismatch"


@dataclass(frozen=True)
class FramedMessage:
    type: str
    words: tuple[str, ...] = ()
    round: int = 0

    def encode(self) -> bytes:
        payload = json.dumps({"type": self.type, "words": list(self.words), "round": self.round},
                             sort_keys=True).encode("utf-8")
        return struct.pack(">I", len(payload)) + payload

    @classmethod
    def decode_payload(cls, payload: bytes) -> FramedMessage:
        try:
            obj = json.loads(payload.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise FrameError(f"undecodable frame payload: {exc}") from exc
        if not isinstance(obj, dict) or set(obj) != {"type", "words", "round"}:
            raise FrameError(f"frame must be an object with type, words, round: {obj!r}")
        if obj["type"] not in FRAME_TYPES:
            raise FrameError(f"unknown frame type {obj['type']!r}")
        if not isinstance(obj["words"], list) or not all(isinstance(w, str) for w in obj["words"]):
            raise FrameError("frame words must be a list of strings")
        if not isinstance(obj["round"], int):
            raise FrameError("frame round must be an integer")
        return cls(obj["type"], tuple(obj["words"]), obj["round"])


def _recv_exact(sock: socket.socket, n: int) -> bytes:
    buf = bytearray()
    while len(buf) < n:
        try:
            chunk = sock.recv(n - len(buf))
        except OSError as exc:
            raise ConnectionFailure(f"receive failed: {exc}") from exc
        if not chunk:
            raise FrameError(f"connection closed mid-frame ({len(buf)}/{n} bytes)")
        buf.extend(chunk)
    return bytes(buf)


def read_frame(sock: socket.socket) -> FramedMessage:
    header = _recv_exact(sock, 4)
    (size,) = struct.unpack(">I", header)
    if size > MAX_FRAME:
        raise FrameError(f"frame of {size} bytes exceeds limit")
    return FramedMessage.decode_payload(_recv_exact(sock, size))


def send_frame(sock: socket.socket, msg: FramedMessage) -> None:
    try:
        sock.sendall(msg.encode())
    except OSError as exc:
        raise ConnectionFailure(f"send failed: {exc}") from exc


def protocol_name(cfg: ProtocolConfig) -> str:
    return "kolee" if isinstance(cfg, KoLeeConfig) else "aag"


def config_fingerprint(cfg: ProtocolConfig) -> str:
    if isinstance(cfg, KoLeeConfig):
        doc = {"base": format_word(cfg.base), "pools": [cfg.alice_generators, cfg.bob_generators]}
    else:
        doc = {"a": [format_word(w) for w in cfg.alice_public],
               "b": [format_word(w) for w in cfg.bob_public]}
    doc.update(protocol=protocol_name(cfg), platform=str(cfg.platform),
               secret_length=cfg.secret_length)
    return hashlib.sha256(json.dumps(doc, sort_keys=True).encode()).hexdigest()[:32]


def public_transcript(cfg: ProtocolConfig, alice_tokens, bob_tokens) -> Transcript:
    if isinstance(cfg, KoLeeConfig):
        return Transcript("kolee", cfg.platform, (cfg.base,), tuple(alice_tokens),
                          tuple(bob_tokens), (cfg.alice_generators, cfg.bob_generators))
    return Transcript("aag", cfg.platform, cfg.alice_public + cfg.bob_public,
                      tuple(alice_tokens), tuple(bob_tokens))


@dataclass
class PartyResult:
    role: str
    key: bytes
    transcript: Transcript


def run_party(role: Role, sock: socket.socket, cfg: ProtocolConfig, seed: object,
              round_index: int = 0) -> PartyResult:
    """Play one side of the exchange on a connected socket."""
    p = cfg.platform
    rng = party_rng(seed, role, round_index)
    if isinstance(cfg, KoLeeConfig):
        secret, token = kolee_commit(cfg, role, rng)
        template, mine, kind, expected = None, (token,), "token", 1
    else:
        template, secret, mine = aag_commit(cfg, role, rng)
        kind = "tokens"
        expected = len(cfg.alice_public) if role == "bob" else len(cfg.bob_public)
    hello = FramedMessage("hello", (protocol_name(cfg), str(p), config_fingerprint(cfg)), round_index)
    mine_msg = FramedMessage(kind, tuple(format_word(w) for w in mine), round_index)

    def expect(msg_type: str) -> FramedMessage:
        msg = read_frame(sock)
        if msg.type != msg_type:
            raise FrameError(f"expected {msg_type} frame, got {msg.type}")
        if msg.round != round_index:
            raise FrameError(f"frame for round {msg.round}, expected {round_index}")
        return msg

    def check_hello(msg: FramedMessage) -> None:
        if msg.words != hello.words:
            raise ConfigMismatch(f"peer config {list(msg.words)} != ours {list(hello.words)}")

    if role == "alice":
        send_frame(sock, hello)
        check_hello(expect("hello"))
        send_frame(sock, mine_msg)
        theirs_msg = expect(kind)
        send_frame(sock, FramedMessage("done", (), round_index))
        expect("done")
    else:
        check_hello(expect("hello"))
        send_frame(sock, hello)
        theirs_msg = expect(kind)
        send_frame(sock, mine_msg)
        expect("done")
        send_frame(sock, FramedMessage("done", (), round_index))

    if len(theirs_msg.words) != expected:
        raise FrameError(f"expected {expected} peer words, got {len(theirs_msg.words)}")
    try:
        theirs = tuple(parse_word(w, p.alphabet_size) for w in theirs_msg.words)
    except ValueError as exc:
        raise FrameError(f"bad word in frame: {exc}") from exc
    if isinstance(cfg, KoLeeConfig):
        shared = kolee_shared(cfg, secret, theirs[0])
    else:
        shared = aag_shared(cfg, role, template, secret, theirs)
    alice_tokens, bob_tokens = (mine, theirs) if role == "alice" else (theirs, mine)
    return PartyResult(role, derive_key(p, shared), public_transcript(cfg, alice_tokens, bob_tokens))


def parse_address(text: str) -> tuple[str, int]:
    host, sep, port = text.rpartition(":")
    if not sep or not port.isdigit():
        raise ValueError(f"bad address {text!r}; expected host:port")
    return host or "127.0.0.1", int(port)


def tcp_exchange(role: Role, address: str, cfg: ProtocolConfig, seed: object,
                 timeout: float = 30.0) -> PartyResult:
    """Alice listens on ``address`` and serves one session; Bob connects."""
    host, port = parse_address(address)
    try:
        if role == "alice":
            with socket.create_server((host, port)) as srv:
                srv.settimeout(timeout)
                conn, _ = srv.accept()
        else:
            conn = _connect((host, port), timeout)
    except OSError as exc:
        raise ConnectionFailure(f"{role} could not establish a connection: {exc}") from exc
    with conn:
        conn.settimeout(timeout)
        return run_party(role, conn, cfg, seed)


def _connect(addr: tuple[str, int], timeout: float) -> socket.socket:
    deadline = time.monotonic() + timeout
    while True:
        try:
            return socket.create_connection(addr, timeout=timeout)
        except ConnectionRefusedError:
            if time.monotonic() > deadline:
                raise
            time.sleep(0.05)


class Tap:
    """Passive relay between Bob and Alice that records every frame."""

    def __init__(self, upstream: tuple[str, int]) -> None:
        self.upstream = upstream
        self.server = socket.create_server(("127.0.0.1", 0))
        self.address = self.server.getsockname()
        self.frames: list[tuple[str, FramedMessage]] = []
        self.error: Optional[BaseException] = None
        self._lock = threading.Lock()
        self._thread = threading.Thread(target=self._serve, daemon=True)
        self._thread.start()

    def _pump(self, src: socket.socket, dst: socket.socket, direction: str) -> None:
        try:
            while True:
                msg = read_frame(src)
                with self._lock:
                    self.frames.append((direction, msg))
                send_frame(dst, msg)
                if msg.type == "done":
                    return
        except WireError as exc:
            self.error = exc

    def _serve(self) -> None:
        try:
            down, _ = self.server.accept()
            up = socket.create_connection(self.upstream)
        except OSError as exc:
            self.error = exc
            return
        with down, up:
            t = threading.Thread(target=self._pump, args=(up, down, "alice->bob"))
            t.start()
            self._pump(down, up, "bob->alice")
            t.join()

    def join(self, timeout: float = 30.0) -> None:
        self._thread.join(timeout)
        self.server.close()

    def transcript(self, cfg: ProtocolConfig) -> Transcript:
        """Eavesdropper's transcript: public parameters plus observed tokens."""
        n = cfg.platform.alphabet_size
        seen = {"alice->bob": (), "bob->alice": ()}
        for direction, msg in self.frames:
            if msg.type in ("token", "tokens"):
                seen[direction] = tuple(parse_word(w, n) for w in msg.words)
        return public_transcript(cfg, seen["alice->bob"], seen["bob->alice"])


def loopback_exchange(cfg: ProtocolConfig, seed: object, tap_path: Optional[Path] = None,
                      timeout: float = 30.0) -> tuple[PartyResult, PartyResult]:
    """Both parties on 127.0.0.1, optionally through a recording tap."""
    srv = socket.create_server(("127.0.0.1", 0))
    srv.settimeout(timeout)
    results: dict[str, PartyResult] = {}
    errors: list[BaseException] = []

    def alice() -> None:
        try:
            conn, _ = srv.accept()
            with conn:
                conn.settimeout(timeout)
                results["alice"] = run_party("alice", conn, cfg, seed)
        except BaseException as exc:  # re-raised in the caller's thread
            errors.append(exc)

    t = threading.Thread(target=alice)
    t.start()
    tap = Tap(srv.getsockname()) if tap_path is not None else None
    target = tap.address if tap is not None else srv.getsockname()
    try:
        with socket.create_connection(target, timeout=timeout) as conn:
            conn.settimeout(timeout)
            results["bob"] = run_party("bob", conn, cfg, seed)
    except OSError as exc:
        raise ConnectionFailure(str(exc)) from exc
    finally:
        t.join(timeout)
        srv.close()
    if errors:
        raise errors[0]
    if tap is not None:
        tap.join(timeout)
        if tap.error is not None:
            raise tap.error
        Path(tap_path).write_text(tap.transcript(cfg).to_json())
    return results["alice"], results["bob"]


__all__ = [
    "AAGConfig", "ConfigMismatch", "ConnectionFailure", "FrameError", "FramedMessage",
    "PartyResult", "Tap", "WireError", "config_fingerprint", "loopback_exchange",
    "read_frame", "run_party", "send_frame", "tcp_exchange",
]
