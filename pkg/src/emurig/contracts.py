"""Plug-in contracts: the four plug-in kinds, their standard operations,
and the capability contexts exchanged between them.

Plug-ins never receive each other whole.  They receive narrow context
handles (memory cells, device in/out, CPU port attachment) created here,
and the machine builder is the only party that performs the exchange.
After the build completes every plug-in is sealed and further wiring
attempts fail.
"""

from __future__ import annotations

import re
from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass
from enum import Enum
from typing import ClassVar


# ---------------------------------------------------------------------------
# Errors


class EmuError(Exception):
    """Base class for emulation-domain errors."""


class RangeError(EmuError):
    """An address or port index fell outside the valid range."""


class CapacityError(EmuError):
    """No free attachment slot on the receiving plug-in."""


class WiringSealedError(EmuError):
    """Wiring was attempted after the machine build completed."""


class WiringError(EmuError):
    """A connection could not be realized during the machine build."""


class SettingsError(EmuError):
    """A plug-in rejected one of its configured settings."""


class NoCompiledProgram(EmuError):
    """The compiler was asked for a start address before any successful compile."""


class DeviceError(EmuError):
    """A device could not service an in/out request."""


class ReadOnlyMemoryError(EmuError):
    """Write attempted through a fetch-only memory context."""


# ---------------------------------------------------------------------------
# Plug-in identity


class PluginKind(Enum):
    COMPILER = "compiler"
    CPU = "cpu"
    MEMORY = "memory"
    DEVICE = "device"


_PLUGIN_ID_RE = re.compile(r"^[a-z0-9-]+$")


@dataclass(frozen=True)
class PluginMetadata:
    """Registry identity of a plug-in implementation."""

    id: str
    kind: PluginKind
    human_name: str
    version: str

    def __post_init__(self) -> None:
        if not _PLUGIN_ID_RE.match(self.id):
            raise ValueError(f"plugin id {self.id!r} must match [a-z0-9-]+")


# ---------------------------------------------------------------------------
# Compiler-side value types


class TokenCategory(Enum):
    KEYWORD = "keyword"
    LABEL = "label"
    NUMBER = "number"
    DIRECTIVE = "directive"
    COMMENT = "comment"
    SEPARATOR = "separator"
    WHITESPACE = "whitespace"
    ERROR = "error"


@dataclass(frozen=True)
class Token:
    """One lexeme of a source text.

    A full token stream covers the source exactly: concatenating the
    lexemes reproduces the input byte for byte, which is what lets an
    editor re-render highlighted source from tokens alone.
    """

    category: TokenCategory
    lexeme: str
    line: int  # 1-based
    column: int  # 1-based
    offset: int  # 0-based byte offset into the UTF-8 encoded source


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" or "warning"
    line: int
    column: int
    message: str


@dataclass(frozen=True)
class CompileOutput:
    """Result of one compile: machine-code image plus diagnostics."""

    image: tuple[tuple[int, int], ...]  # (address, value) pairs
    start_address: int
    diagnostics: tuple[Diagnostic, ...]
    success: bool

    def __post_init__(self) -> None:
        if not self.success and self.image:
            raise ValueError("failed compile must carry an empty image")
        addresses = [a for a, _ in self.image]
        if len(addresses) != len(set(addresses)):
            raise ValueError("image addresses must be unique")

    @property
    def errors(self) -> tuple[Diagnostic, ...]:
        return tuple(d for d in self.diagnostics if d.severity == "error")


# ---------------------------------------------------------------------------
# CPU-side value types


class CpuRunState(Enum):
    """Execution controller lifecycle.

    RESET is transient: a reset re-initializes the CPU and immediately
    lands in BREAKPOINT, so the externally observable states are the
    other three.
    """

    RESET = "reset"
    BREAKPOINT = "breakpoint"
    RUNNING = "running"
    STOPPED = "stopped"


class OutcomeKind(Enum):
    CONTINUE = "continue"
    HALTED = "halted"
    BREAKPOINT_REACHED = "breakpoint_reached"
    FAULT = "fault"


@dataclass(frozen=True)
class StepOutcome:
    """What a single instruction step did to the run state."""

    kind: OutcomeKind
    message: str = ""

    @classmethod
    def fault(cls, message: str) -> "StepOutcome":
        return cls(OutcomeKind.FAULT, message)


CONTINUE = StepOutcome(OutcomeKind.CONTINUE)
HALTED = StepOutcome(OutcomeKind.HALTED)


@dataclass(frozen=True)
class RegisterView:
    name: str
    value: int  # unsigned; wider-than-native values are two's complement
    width_bits: int

    def __post_init__(self) -> None:
        if not 0 <= self.value < (1 << self.width_bits):
            raise ValueError(f"register {self.name} value {self.value} exceeds {self.width_bits} bits")


@dataclass(frozen=True)
class CpuStatusSnapshot:
    """Registers, flags and run state as shown in a status window."""

    registers: tuple[RegisterView, ...]
    flags: tuple[tuple[str, bool], ...]
    state: CpuRunState
    program_counter: int

    def __post_init__(self) -> None:
        if not any(r.value == self.program_counter for r in self.registers if r.name == "PC"):
            raise ValueError("program counter must also appear as a named register")


# ---------------------------------------------------------------------------
# Plug-in base


class Plugin:
    """Common plug-in machinery: identity, settings, host binding, sealing."""

    metadata: ClassVar[PluginMetadata]

    def __init__(self) -> None:
        self._sealed = False
        self.instance_id: str | None = None
        self._emit_event: Callable[[object], None] | None = None

    @property
    def kind(self) -> PluginKind:
        return self.metadata.kind

    @property
    def sealed(self) -> bool:
        return self._sealed

    def seal(self) -> None:
        self._sealed = True

    def configure(self, settings: Mapping[str, str]) -> None:
        for key in settings:
            raise SettingsError(f"{self.metadata.id}: unknown setting {key!r}")

    def bind_host(self, instance_id: str, emit: Callable[[object], None] | None) -> None:
        """Called by the machine builder; gives the plug-in its instance
        identity and an event sink for host-visible activity."""
        self.instance_id = instance_id
        self._emit_event = emit

    def _emit(self, event: object) -> None:
        if self._emit_event is not None:
            self._emit_event(event)


# ---------------------------------------------------------------------------
# Memory


class MemoryContext:
    """Capability handle onto one memory plug-in.

    The full surface is read/write/size/add_listener (plus the scalar
    read_cell/write_cell conveniences and cell metadata).  Nothing with
    run-control authority passes through here.
    """

    def __init__(self, plugin: "MemoryPlugin", *, read_only: bool = False):
        self._plugin = plugin
        self._read_only = read_only

    @property
    def cell_width(self) -> int | None:
        return self._plugin.cell_width

    @property
    def cell_kind(self) -> str:
        return self._plugin.cell_kind

    @property
    def read_only(self) -> bool:
        return self._read_only

    def size(self) -> int:
        return self._plugin.size()

    def read(self, address: int, count: int) -> list[int]:
        return self._plugin.read(address, count)

    def read_cell(self, address: int) -> int:
        return self._plugin.read_cell(address)

    def write(self, address: int, values: Sequence[int]) -> None:
        if self._read_only:
            raise ReadOnlyMemoryError("memory context is fetch-only")
        self._plugin.write(address, values)

    def write_cell(self, address: int, value: int) -> None:
        if self._read_only:
            raise ReadOnlyMemoryError("memory context is fetch-only")
        self._plugin.write_cell(address, value)

    def add_listener(self, sink: Callable[[int, list[int]], None]) -> None:
        self._plugin.add_listener(sink)


class MemoryPlugin(Plugin):
    """Base class for memory plug-ins.

    Subclasses provide storage via _get/_set, cell metadata, and size();
    bounds checks, value checks and listener notification live here.
    Writes notify each registered listener exactly once per write call,
    after the cells are updated.
    """

    cell_width: int | None = 8
    cell_kind: str = "byte"

    def __init__(self) -> None:
        super().__init__()
        self._listeners: list[Callable[[int, list[int]], None]] = []

    # storage interface
    def size(self) -> int:
        raise NotImplementedError

    def _get(self, address: int) -> int:
        raise NotImplementedError

    def _set(self, address: int, value: int) -> None:
        raise NotImplementedError

    def _check_value(self, value: int) -> None:
        width = self.cell_width
        if width is not None and not 0 <= value < (1 << width):
            raise ValueError(f"value {value} exceeds {width}-bit cell width")

    def _check_range(self, address: int, count: int) -> None:
        if address < 0 or count < 0 or address + count > self.size():
            raise RangeError(f"cells [{address}, {address + count}) outside memory of size {self.size()}")

    # operations
    def read(self, address: int, count: int) -> list[int]:
        self._check_range(address, count)
        get = self._get
        return [get(a) for a in range(address, address + count)]

    def read_cell(self, address: int) -> int:
        self._check_range(address, 1)
        return self._get(address)

    def write(self, address: int, values: Sequence[int]) -> None:
        self._check_range(address, len(values))
        for value in values:
            self._check_value(value)
        for i, value in enumerate(values):
            self._set(address + i, value)
        self._notify(address, list(values))

    def write_cell(self, address: int, value: int) -> None:
        self._check_range(address, 1)
        self._check_value(value)
        self._set(address, value)
        self._notify(address, [value])

    def add_listener(self, sink: Callable[[int, list[int]], None]) -> None:
        if self._sealed:
            raise WiringSealedError("cannot add memory listener after machine build")
        self._listeners.append(sink)

    def _notify(self, address: int, values: list[int]) -> None:
        for sink in self._listeners:
            sink(address, values)

    def memory_context(self, requester: PluginKind | None = None) -> MemoryContext:
        """Context handed to a requesting plug-in; subclasses may return a
        narrower view depending on who asks (e.g. fetch-only for a CPU)."""
        return MemoryContext(self)


# ---------------------------------------------------------------------------
# Devices


class DeviceContext:
    """Capability handle for one I/O endpoint of a device.

    A device may expose several contexts with distinct context_ids; each
    transfers unsigned values bounded by width_bits (None = unbounded,
    for devices carrying signed machine words).
    """

    def __init__(
        self,
        context_id: str,
        *,
        in_fn: Callable[[], int] | None = None,
        out_fn: Callable[[int], None] | None = None,
        width_bits: int | None = 8,
    ):
        self._context_id = context_id
        self._in_fn = in_fn
        self._out_fn = out_fn
        self._width_bits = width_bits

    @property
    def context_id(self) -> str:
        return self._context_id

    @property
    def width_bits(self) -> int | None:
        return self._width_bits

    def in_(self) -> int:
        if self._in_fn is None:
            raise DeviceError(f"context {self._context_id!r} does not support input")
        return self._in_fn()

    def out(self, value: int) -> None:
        if self._out_fn is None:
            raise DeviceError(f"context {self._context_id!r} does not support output")
        width = self._width_bits
        if width is not None and not 0 <= value < (1 << width):
            raise ValueError(f"value {value} exceeds {width}-bit device width")
        self._out_fn(value)


class DevicePlugin(Plugin):
    """Base class for peripheral devices.

    Attachment happens only during the machine build; afterwards the
    plug-in is sealed and attach_device raises WiringSealedError.
    """

    def __init__(self) -> None:
        super().__init__()
        self.attached: list[DeviceContext] = []
        self._cpu: "CpuContext | None" = None

    def context(self, context_id: str | None = None) -> DeviceContext:
        """Return the context named context_id (the default one when None)."""
        raise NotImplementedError

    def attach_device(self, ctx: DeviceContext, port: int | None = None) -> None:
        if self._sealed:
            raise WiringSealedError("cannot attach devices after machine build")
        self._attach_device(ctx, port)

    def _attach_device(self, ctx: DeviceContext, port: int | None) -> None:
        self.attached.append(ctx)

    def attach_cpu(self, ctx: "CpuContext") -> None:
        if self._sealed:
            raise WiringSealedError("cannot attach devices after machine build")
        self._cpu = ctx

    def attach_memory(self, ctx: MemoryContext) -> None:
        if self._sealed:
            raise WiringSealedError("cannot attach devices after machine build")


# ---------------------------------------------------------------------------
# CPU


class CpuContext:
    """Capability handle onto a CPU: port attachment only, no run control."""

    is_interrupt_supported = False

    def __init__(self, attach_fn: Callable[[int, DeviceContext], None]):
        self._attach_fn = attach_fn

    def attach_device(self, port: int, ctx: DeviceContext) -> None:
        self._attach_fn(port, ctx)


class CpuPlugin(Plugin):
    """Base class for CPU plug-ins.

    Holds the port table populated through the cpu_context during the
    build.  Subclasses implement reset/step/status and a disassembler.
    """

    def __init__(self) -> None:
        super().__init__()
        self.ports: dict[int, DeviceContext] = {}
        self.cpu_context = CpuContext(self._attach_port)

    def _attach_port(self, port: int, ctx: DeviceContext) -> None:
        if self._sealed:
            raise WiringSealedError("cannot attach devices after machine build")
        if port < 0:
            raise RangeError(f"port {port} is negative")
        if port in self.ports:
            raise CapacityError(f"cpu port {port} is already attached")
        self.ports[port] = ctx

    def attach_memory(self, ctx: MemoryContext) -> None:
        raise NotImplementedError

    def reset(self, start_address: int) -> None:
        raise NotImplementedError

    def step(self) -> StepOutcome:
        raise NotImplementedError

    @property
    def program_counter(self) -> int:
        raise NotImplementedError

    def registers(self) -> list[RegisterView]:
        raise NotImplementedError

    def flags(self) -> list[tuple[str, bool]]:
        return []

    def disassemble(self, address: int) -> tuple[str, int]:
        raise NotImplementedError


# ---------------------------------------------------------------------------
# Compiler


class CompilerPlugin(Plugin):
    """Base class for compiler plug-ins.

    compile() is total for source errors: they surface as diagnostics
    with success=False, never as exceptions.  When a memory context is
    supplied and the compile succeeds, the image is also written through
    it (contiguous runs per write call).
    """

    def __init__(self) -> None:
        super().__init__()
        self._start_address: int | None = None

    def lex(self, source: str) -> list[Token]:
        raise NotImplementedError

    def _compile(self, source: str) -> CompileOutput:
        raise NotImplementedError

    def compile(self, source: str, memory: MemoryContext | None = None) -> CompileOutput:
        out = self._compile(source)
        if out.success:
            self._start_address = out.start_address
            if memory is not None:
                self._load_image(out.image, memory)
        return out

    def start_address(self) -> int:
        """Start address of the most recent successful compile.

        A later failed compile does not clear it."""
        if self._start_address is None:
            raise NoCompiledProgram("no successful compile yet")
        return self._start_address

    @staticmethod
    def _load_image(image: Sequence[tuple[int, int]], memory: MemoryContext) -> None:
        run_start: int | None = None
        run_values: list[int] = []
        prev = None
        for address, value in image:
            if prev is not None and address == prev + 1:
                run_values.append(value)
            else:
                if run_start is not None:
                    memory.write(run_start, run_values)
                run_start, run_values = address, [value]
            prev = address
        if run_start is not None:
            memory.write(run_start, run_values)
