"""Remote-control service: one machine behind a JSON-over-WebSocket protocol.

Clients send request objects (discriminated by "t", optionally carrying
a "req" correlation id that the single reply echoes back); the server
pushes every machine event to all clients as "event" messages, which
never carry a "req".  Emulation never blocks on the network: each client
has a bounded outbound queue and a dedicated sender; clients that
cannot keep up are disconnected.
"""

from __future__ import annotations

import json
import logging
import queue
import threading
from typing import Any

from websockets.exceptions import ConnectionClosed
from websockets.sync.server import serve as ws_serve

from emurig import config as cfgmod
from emurig.contracts import CpuRunState, EmuError, RangeError
from emurig.machine import (
    BreakpointHit,
    DeviceOutput,
    Halted,
    IllegalCommand,
    Machine,
    MemoryWritten,
    StateChanged,
    build_machine,
)
from emurig.registry import default_registry

log = logging.getLogger(__name__)

PROTOCOL_VERSION = 1
DEFAULT_HOST = "127.0.0.1"
DEFAULT_PORT = 7642
CLIENT_QUEUE_LIMIT = 1024
MAX_READ_COUNT = 65536


def render_event(event) -> dict | None:
    if isinstance(event, StateChanged):
        return {
            "t": "event",
            "kind": "state",
            "old": event.old.value,
            "new": event.new.value,
            "reason": event.reason,
        }
    if isinstance(event, DeviceOutput):
        return {"t": "event", "kind": "dev_out", "dev": event.instance_id, "value": event.value}
    if isinstance(event, MemoryWritten):
        return {"t": "event", "kind": "mem_write", "mem": event.instance_id,
                "addr": event.address, "count": event.count}
    if isinstance(event, Halted):
        return {"t": "event", "kind": "halted", "pc": event.pc}
    if isinstance(event, BreakpointHit):
        return {"t": "event", "kind": "breakpoint", "addr": event.address}
    return None


class _Client:
    """One connection: bounded outbound queue drained by a sender thread."""

    def __init__(self, websocket):
        self.websocket = websocket
        self.queue: queue.Queue = queue.Queue(maxsize=CLIENT_QUEUE_LIMIT)
        self.alive = True
        self.sender = threading.Thread(target=self._send_loop, daemon=True)
        self.sender.start()

    def _send_loop(self) -> None:
        while True:
            message = self.queue.get()
            if message is None:
                return
            try:
                self.websocket.send(json.dumps(message))
            except ConnectionClosed:
                return
            except OSError:
                return

    def enqueue(self, message: dict) -> bool:
        """False means the client is too slow and must be dropped."""
        if not self.alive:
            return False
        try:
            self.queue.put_nowait(message)
            return True
        except queue.Full:
            return False

    def close(self) -> None:
        self.alive = False
        try:
            self.queue.put_nowait(None)
        except queue.Full:
            pass
        try:
            self.websocket.close()
        except Exception:
            pass


class ControlService:
    """Protocol handler plus machine lifecycle (one machine at a time)."""

    def __init__(self, initial_config: cfgmod.ArchitectureConfig | None = None,
                 config_store=None):
        self.registry = default_registry()
        self.config_store = config_store
        self._clients: list[_Client] = []
        self._clients_lock = threading.Lock()
        self._machine: Machine | None = None
        self._pump_stop = threading.Event()
        self._pump_thread: threading.Thread | None = None
        if initial_config is None:
            initial_config = self._load_named_config("tinyvn")
        self._install_machine(initial_config)

    # -- machine lifecycle ----------------------------------------------------

    def _load_named_config(self, name: str) -> cfgmod.ArchitectureConfig:
        if self.config_store is not None:
            try:
                return cfgmod.load_config(name, self.config_store)
            except cfgmod.NotFoundError:
                pass
        from emurig.cli import _builtin_config_text

        text = _builtin_config_text(name)
        if text is None:
            raise cfgmod.NotFoundError(f"no configuration named {name!r}")
        return cfgmod.parse_config(text)

    def config_names(self) -> list[str]:
        from importlib import resources

        names = set()
        configs_dir = resources.files("emurig").joinpath("configs")
        for entry in configs_dir.iterdir():
            if entry.name.endswith(cfgmod.CONFIG_SUFFIX):
                names.add(entry.name[: -len(cfgmod.CONFIG_SUFFIX)])
        if self.config_store is not None:
            names.update(cfgmod.list_configs(self.config_store))
        return sorted(names)

    def _install_machine(self, cfg: cfgmod.ArchitectureConfig) -> None:
        if self._pump_thread is not None:
            self._pump_stop.set()
            self._pump_thread.join(timeout=2)
        machine = build_machine(cfg, self.registry)
        subscription = machine.subscribe()
        self._machine = machine
        self._pump_stop = threading.Event()
        self._pump_thread = threading.Thread(
            target=self._pump_events, args=(subscription, self._pump_stop), daemon=True
        )
        self._pump_thread.start()

    def _pump_events(self, subscription, stop: threading.Event) -> None:
        while not stop.is_set():
            event = subscription.next(timeout=0.25)
            if event is None:
                continue
            rendered = render_event(event)
            if rendered is not None:
                self.broadcast(rendered)
        subscription.close()

    @property
    def machine(self) -> Machine:
        assert self._machine is not None
        return self._machine

    # -- client fan-out ---------------------------------------------------------

    def broadcast(self, message: dict) -> None:
        dropped = []
        with self._clients_lock:
            clients = list(self._clients)
        for client in clients:
            if not client.enqueue(message):
                dropped.append(client)
        for client in dropped:
            log.warning("dropping slow client")
            self._remove_client(client)

    def _remove_client(self, client: _Client) -> None:
        with self._clients_lock:
            if client in self._clients:
                self._clients.remove(client)
        client.close()

    # -- connection handler -------------------------------------------------------

    def handle_connection(self, websocket) -> None:
        client = _Client(websocket)
        client.enqueue(self._hello())
        with self._clients_lock:
            self._clients.append(client)
        try:
            for raw in websocket:
                reply = self.handle_message(raw)
                if reply is not None and not client.enqueue(reply):
                    break
        except ConnectionClosed:
            pass
        finally:
            self._remove_client(client)

    def _hello(self, req: Any = None) -> dict:
        message = {
            "t": "hello",
            "version": PROTOCOL_VERSION,
            "config": self.machine.config.name,
        }
        if req is not None:
            message["req"] = req
        return message

    # -- request dispatch ----------------------------------------------------------

    def handle_message(self, raw: str | bytes) -> dict | None:
        try:
            msg = json.loads(raw)
        except (json.JSONDecodeError, UnicodeDecodeError):
            return {"t": "error", "code": "bad_message", "msg": "malformed JSON"}
        if not isinstance(msg, dict):
            return {"t": "error", "code": "bad_message", "msg": "expected an object"}
        req = msg.get("req")

        def error(code: str, text: str) -> dict:
            reply = {"t": "error", "code": code, "msg": text}
            if req is not None:
                reply["req"] = req
            return reply

        def with_req(reply: dict) -> dict:
            if req is not None:
                reply["req"] = req
            return reply

        kind = msg.get("t")
        if not isinstance(kind, str):
            return error("bad_message", "missing message type")

        machine = self.machine
        try:
            if kind == "cmd":
                return with_req(self._handle_cmd(machine, msg, error))
            if kind == "compile":
                source = msg.get("source")
                if not isinstance(source, str):
                    return error("bad_message", "compile needs a source string")
                out = machine.compile_and_load(source)
                return with_req(
                    {
                        "t": "diag",
                        "success": out.success,
                        "diagnostics": [
                            {
                                "severity": d.severity,
                                "line": d.line,
                                "column": d.column,
                                "message": d.message,
                            }
                            for d in out.diagnostics
                        ],
                        "start": out.start_address,
                        "size": len(out.image),
                    }
                )
            if kind == "mem_read":
                memory = machine.memories.get(msg.get("mem"))
                if memory is None:
                    return error("unknown_memory", f"no memory {msg.get('mem')!r}")
                addr, count = msg.get("addr"), msg.get("count")
                if not isinstance(addr, int) or not isinstance(count, int):
                    return error("bad_message", "mem_read needs integer addr and count")
                if count > MAX_READ_COUNT:
                    return error("range", f"count {count} exceeds {MAX_READ_COUNT}")
                values = memory.read(addr, count)
                return with_req({"t": "mem", "values": values})
            if kind == "mem_write":
                memory = machine.memories.get(msg.get("mem"))
                if memory is None:
                    return error("unknown_memory", f"no memory {msg.get('mem')!r}")
                addr, values = msg.get("addr"), msg.get("values")
                if not isinstance(addr, int) or not isinstance(values, list):
                    return error("bad_message", "mem_write needs addr and values")
                if machine.state is CpuRunState.RUNNING:
                    return error("illegal_command", "cannot write memory while running")
                memory.write(addr, values)
                return with_req({"t": "mem", "values": values})
            if kind == "tokens":
                source = msg.get("source")
                if not isinstance(source, str):
                    return error("bad_message", "tokens needs a source string")
                tokens = machine.compiler.lex(source)
                return with_req(
                    {
                        "t": "tokens",
                        "tokens": [
                            {
                                "category": t.category.value,
                                "lexeme": t.lexeme,
                                "line": t.line,
                                "column": t.column,
                                "offset": t.offset,
                            }
                            for t in tokens
                        ],
                    }
                )
            if kind == "bp":
                op, addr = msg.get("op"), msg.get("addr")
                if op not in ("add", "remove") or not isinstance(addr, int):
                    return error("bad_message", "bp needs op add|remove and an addr")
                if op == "add":
                    machine.add_breakpoint(addr)
                else:
                    machine.remove_breakpoint(addr)
                return with_req({"t": "state", "state": machine.state.value})
            if kind == "dev_in":
                device = machine.devices.get(msg.get("dev"))
                if device is None:
                    return error("unknown_device", f"no device {msg.get('dev')!r}")
                values = msg.get("values")
                if not isinstance(values, list):
                    return error("bad_message", "dev_in needs a values list")
                feed = getattr(device, "feed", None)
                if feed is None:
                    return error("unknown_device", f"device {msg.get('dev')!r} takes no input")
                feed(values)
                return with_req({"t": "state", "state": machine.state.value})
            if kind == "status":
                snap = machine.snapshot()
                return with_req(
                    {
                        "t": "status",
                        "state": snap.state.value,
                        "pc": snap.program_counter,
                        "registers": [
                            {"name": r.name, "value": r.value, "width": r.width_bits}
                            for r in snap.registers
                        ],
                        "flags": [[name, value] for name, value in snap.flags],
                        "breakpoints": sorted(machine.breakpoints),
                    }
                )
            if kind == "configs":
                return with_req({"t": "configs", "names": self.config_names()})
            if kind == "select_config":
                name = msg.get("name")
                if not isinstance(name, str):
                    return error("bad_message", "select_config needs a name")
                try:
                    cfg = self._load_named_config(name)
                except cfgmod.ConfigError:
                    return error("unknown_config", f"no configuration named {name!r}")
                self._install_machine(cfg)
                return self._hello(req)
            return error("unknown_type", f"unknown message type {kind!r}")
        except IllegalCommand as e:
            return error("illegal_command", str(e))
        except RangeError as e:
            return error("range", str(e))
        except (EmuError, ValueError) as e:
            return error("range", str(e))

    def _handle_cmd(self, machine: Machine, msg: dict, error) -> dict:
        cmd = msg.get("cmd")
        if cmd == "reset":
            machine.reset()
        elif cmd == "step":
            machine.step()
        elif cmd == "execute":
            machine.execute()
            # the transition's result, not a racy later sample
            return {"t": "state", "state": CpuRunState.RUNNING.value}
        elif cmd == "pause":
            machine.pause()
        elif cmd == "stop":
            machine.stop()
        else:
            return error("bad_message", f"unknown cmd {cmd!r}")
        return {"t": "state", "state": machine.state.value}


def serve(
    host: str = DEFAULT_HOST,
    port: int = DEFAULT_PORT,
    initial_config: cfgmod.ArchitectureConfig | None = None,
    config_store=None,
    ready=None,
):
    """Run the service until interrupted.  `ready`, when given, is called
    with the live server object once the socket is bound (test hook)."""
    service = ControlService(initial_config, config_store=config_store)
    with ws_serve(service.handle_connection, host, port) as server:
        if ready is not None:
            ready(server, service)
        server.serve_forever()
