"""RAM machine memories: instruction-valued program store, sparse registers."""

from __future__ import annotations

from collections.abc import Mapping

from emurig.contracts import (
    MemoryContext,
    MemoryPlugin,
    PluginKind,
    PluginMetadata,
    SettingsError,
)
from emurig.rammachine.isa import CELL_WIDTH


class RamProgramMemory(MemoryPlugin):
    """Program store: cells hold encoded instructions, 0 means empty.

    The CPU receives a fetch-only context, so no execution path can
    modify the program after the build; only the compiler writes here.
    """

    metadata = PluginMetadata("ram-program-memory", PluginKind.MEMORY, "RAM program memory", "1.0")
    cell_width = CELL_WIDTH
    cell_kind = "instruction"

    def __init__(self) -> None:
        super().__init__()
        self._size = 65536
        self._cells: dict[int, int] = {}

    def configure(self, settings: Mapping[str, str]) -> None:
        for key, value in settings.items():
            if key != "size":
                raise SettingsError(f"ram-program-memory: unknown setting {key!r}")
            try:
                size = int(value)
            except ValueError:
                raise SettingsError(f"ram-program-memory: size must be an integer, got {value!r}") from None
            if size < 1:
                raise SettingsError("ram-program-memory: size must be positive")
            self._size = size

    def size(self) -> int:
        return self._size

    def _get(self, address: int) -> int:
        return self._cells.get(address, 0)

    def _set(self, address: int, value: int) -> None:
        if value:
            self._cells[address] = value
        else:
            self._cells.pop(address, None)

    def memory_context(self, requester: PluginKind | None = None) -> MemoryContext:
        read_only = requester is PluginKind.CPU
        return MemoryContext(self, read_only=read_only)


class RamRegisterMemory(MemoryPlugin):
    """Data store: unbounded-index registers holding signed 64-bit values.

    Registers are sparse; anything never written reads as 0."""

    metadata = PluginMetadata("ram-register-memory", PluginKind.MEMORY, "RAM register memory", "1.0")
    cell_width = None
    cell_kind = "int64"

    _LIMIT = 1 << 63

    def __init__(self) -> None:
        super().__init__()
        self._cells: dict[int, int] = {}

    def size(self) -> int:
        return 1 << 31

    def _check_value(self, value: int) -> None:
        if not -self._LIMIT <= value < self._LIMIT:
            raise ValueError(f"value {value} exceeds signed 64-bit range")

    def _get(self, address: int) -> int:
        return self._cells.get(address, 0)

    def _set(self, address: int, value: int) -> None:
        if value:
            self._cells[address] = value
        else:
            self._cells.pop(address, None)

    def nonzero_registers(self) -> dict[int, int]:
        return dict(self._cells)
