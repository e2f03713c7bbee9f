"""Byte-addressed operating memory."""

from __future__ import annotations

from collections.abc import Mapping

from emurig.contracts import MemoryPlugin, PluginKind, PluginMetadata, SettingsError


class ByteMemory(MemoryPlugin):
    """Zero-initialized array of 8-bit cells; size set via the "size" setting."""

    metadata = PluginMetadata("byte-memory", PluginKind.MEMORY, "Byte memory", "1.0")
    cell_width = 8
    cell_kind = "byte"

    def __init__(self) -> None:
        super().__init__()
        self._cells = bytearray(256)

    def configure(self, settings: Mapping[str, str]) -> None:
        for key, value in settings.items():
            if key != "size":
                raise SettingsError(f"byte-memory: unknown setting {key!r}")
            try:
                size = int(value)
            except ValueError:
                raise SettingsError(f"byte-memory: size must be an integer, got {value!r}") from None
            if not 1 <= size <= 65536:
                raise SettingsError(f"byte-memory: size {size} out of range 1..65536")
            self._cells = bytearray(size)

    def size(self) -> int:
        return len(self._cells)

    def _get(self, address: int) -> int:
        return self._cells[address]

    def _set(self, address: int, value: int) -> None:
        self._cells[address] = value
