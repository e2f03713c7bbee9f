"""Standard peripheral plug-ins: terminal, serial hub, write logger."""

from __future__ import annotations

import logging
from collections import deque
from collections.abc import Mapping

from emurig.contracts import (
    DeviceContext,
    DevicePlugin,
    MemoryContext,
    PluginKind,
    PluginMetadata,
    RangeError,
    SettingsError,
)
from emurig.machine import DeviceOutput

log = logging.getLogger(__name__)


class Terminal(DevicePlugin):
    """Interactive byte terminal with one context.

    in_ pops the head of the input queue, or returns 0 when it is empty
    (the emulation loop never blocks on input).  out appends to the
    output log and announces the value as a DeviceOutput event.
    """

    metadata = PluginMetadata("terminal", PluginKind.DEVICE, "Terminal", "1.0")

    def __init__(self) -> None:
        super().__init__()
        self.input_queue: deque[int] = deque()
        self.output_log: list[int] = []
        self._context = DeviceContext(
            "tty", in_fn=self._pop_input, out_fn=self._push_output, width_bits=8
        )

    def context(self, context_id: str | None = None) -> DeviceContext:
        if context_id not in (None, "tty"):
            raise RangeError(f"terminal has no context {context_id!r}")
        return self._context

    def _pop_input(self) -> int:
        if self.input_queue:
            return self.input_queue.popleft()
        return 0

    def _push_output(self, value: int) -> None:
        self.output_log.append(value)
        self._emit(DeviceOutput(self.instance_id or "terminal", "tty", value))

    # host-side API
    def feed(self, values) -> None:
        for value in values:
            if not 0 <= value <= 0xFF:
                raise ValueError(f"terminal input {value} is not a byte")
            self.input_queue.append(value)

    def take_output(self) -> list[int]:
        out, self.output_log = self.output_log, []
        return out


class SerialHub(DevicePlugin):
    """Multi-port fan-out device.

    Each port has its own context ("port0".."portN-1") and one attachment
    slot.  Traffic entering a port's context is forwarded to whatever is
    attached at that slot; an unattached slot discards output (with a
    warning) and reads as 0.  Forwarding is synchronous, no buffering.
    """

    metadata = PluginMetadata("serial-hub", PluginKind.DEVICE, "Serial hub", "1.0")

    def __init__(self) -> None:
        super().__init__()
        self._port_count = 4
        self._slots: dict[int, DeviceContext] = {}
        self._contexts: dict[int, DeviceContext] = {}
        self.dropped = 0
        self._make_contexts()

    def _make_contexts(self) -> None:
        self._contexts = {
            i: DeviceContext(
                f"port{i}",
                in_fn=lambda i=i: self._read(i),
                out_fn=lambda value, i=i: self._write(i, value),
                width_bits=8,
            )
            for i in range(self._port_count)
        }

    def configure(self, settings: Mapping[str, str]) -> None:
        for key, value in settings.items():
            if key != "ports":
                raise SettingsError(f"serial-hub: unknown setting {key!r}")
            try:
                count = int(value)
            except ValueError:
                raise SettingsError(f"serial-hub: ports must be an integer, got {value!r}") from None
            if not 1 <= count <= 64:
                raise SettingsError(f"serial-hub: ports {count} out of range 1..64")
            self._port_count = count
            self._make_contexts()

    @property
    def port_count(self) -> int:
        return self._port_count

    def context(self, context_id: str | None = None) -> DeviceContext:
        if context_id is None:
            return self._contexts[0]
        for ctx in self._contexts.values():
            if ctx.context_id == context_id:
                return ctx
        raise RangeError(f"serial-hub has no context {context_id!r}")

    def port_context(self, i: int) -> DeviceContext:
        if i not in self._contexts:
            raise RangeError(f"serial-hub has no port {i}")
        return self._contexts[i]

    def _attach_device(self, ctx: DeviceContext, port: int | None) -> None:
        slot = 0 if port is None else port
        if slot not in self._contexts:
            raise RangeError(f"serial-hub has no port {slot}")
        if slot in self._slots:
            raise RangeError(f"serial-hub port {slot} already attached")
        self._slots[slot] = ctx
        self.attached.append(ctx)

    def _read(self, i: int) -> int:
        slot = self._slots.get(i)
        if slot is None:
            return 0
        return slot.in_()

    def _write(self, i: int, value: int) -> None:
        slot = self._slots.get(i)
        if slot is None:
            self.dropped += 1
            log.warning("serial-hub %s: port %d unattached, dropping %d", self.instance_id, i, value)
            return
        slot.out(value)


class WriteLogger(DevicePlugin):
    """Records memory write notifications, the way a DMA observer would."""

    metadata = PluginMetadata("write-logger", PluginKind.DEVICE, "Write logger", "1.0")

    def __init__(self) -> None:
        super().__init__()
        self.log: list[tuple[int, list[int]]] = []

    def context(self, context_id: str | None = None) -> DeviceContext:
        raise RangeError("write-logger exposes no device context")

    def attach_memory(self, ctx: MemoryContext) -> None:
        super().attach_memory(ctx)
        ctx.add_listener(self._on_write)

    def _on_write(self, address: int, values: list[int]) -> None:
        self.log.append((address, list(values)))
