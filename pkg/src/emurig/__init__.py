"""emurig: a plug-in based computer emulation platform.

Virtual architectures are composed from compiler, CPU, memory and device
plug-ins wired together by a machine builder according to a declarative
configuration.  Plug-ins communicate only through narrow capability
contexts exchanged at build time.
"""

from emurig.contracts import (
    CapacityError,
    CompileOutput,
    CpuRunState,
    DeviceError,
    Diagnostic,
    EmuError,
    NoCompiledProgram,
    PluginKind,
    RangeError,
    ReadOnlyMemoryError,
    SettingsError,
    Token,
    TokenCategory,
    WiringError,
    WiringSealedError,
)
from emurig.machine import ControlCommand, IllegalCommand, Machine, build_machine
from emurig.registry import PluginRegistry, default_registry

__version__ = "0.1.0"

__all__ = [
    "CapacityError",
    "CompileOutput",
    "ControlCommand",
    "CpuRunState",
    "DeviceError",
    "Diagnostic",
    "EmuError",
    "IllegalCommand",
    "Machine",
    "NoCompiledProgram",
    "PluginKind",
    "PluginRegistry",
    "RangeError",
    "ReadOnlyMemoryError",
    "SettingsError",
    "Token",
    "TokenCategory",
    "WiringError",
    "WiringSealedError",
    "build_machine",
    "default_registry",
    "__version__",
]
