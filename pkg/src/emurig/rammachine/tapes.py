"""Tape devices: input tape (read head marching right), output tape (append-only)."""

from __future__ import annotations

from collections import deque

from emurig.contracts import (
    DeviceContext,
    DeviceError,
    DevicePlugin,
    PluginKind,
    PluginMetadata,
    RangeError,
)
from emurig.machine import DeviceOutput


class RamInputTape(DevicePlugin):
    """Read-only value source; reading past the end is an error the CPU
    turns into a fault.  Values are signed machine words, so the context
    is unbounded."""

    metadata = PluginMetadata("ram-input-tape", PluginKind.DEVICE, "Input tape", "1.0")

    def __init__(self) -> None:
        super().__init__()
        self.values: deque[int] = deque()
        self._context = DeviceContext("in", in_fn=self._read, width_bits=None)

    def context(self, context_id: str | None = None) -> DeviceContext:
        if context_id not in (None, "in"):
            raise RangeError(f"input tape has no context {context_id!r}")
        return self._context

    def _read(self) -> int:
        if not self.values:
            raise DeviceError("input tape exhausted")
        return self.values.popleft()

    def feed(self, values) -> None:
        self.values.extend(int(v) for v in values)


class RamOutputTape(DevicePlugin):
    metadata = PluginMetadata("ram-output-tape", PluginKind.DEVICE, "Output tape", "1.0")

    def __init__(self) -> None:
        super().__init__()
        self.values: list[int] = []
        self._context = DeviceContext("out", out_fn=self._write, width_bits=None)

    def context(self, context_id: str | None = None) -> DeviceContext:
        if context_id not in (None, "out"):
            raise RangeError(f"output tape has no context {context_id!r}")
        return self._context

    def _write(self, value: int) -> None:
        self.values.append(value)
        self._emit(DeviceOutput(self.instance_id or "output-tape", "out", value))

    def take_output(self) -> list[int]:
        out, self.values = self.values, []
        return out
