"""Plug-in registry: maps plugin ids to implementation classes."""

from __future__ import annotations

from emurig.contracts import Plugin, PluginKind


class PluginRegistry:
    def __init__(self) -> None:
        self._classes: dict[str, type[Plugin]] = {}

    def register(self, cls: type[Plugin]) -> type[Plugin]:
        plugin_id = cls.metadata.id
        if plugin_id in self._classes:
            raise ValueError(f"plugin id {plugin_id!r} already registered")
        self._classes[plugin_id] = cls
        return cls

    def create(self, plugin_id: str) -> Plugin:
        return self._classes[plugin_id]()

    def kind_of(self, plugin_id: str) -> PluginKind:
        return self._classes[plugin_id].metadata.kind

    def ids(self) -> list[str]:
        return sorted(self._classes)

    def describe(self, plugin_id: str):
        return self._classes[plugin_id].metadata


def default_registry() -> PluginRegistry:
    """Registry with every plug-in that ships in the box."""
    from emurig.devices import SerialHub, Terminal, WriteLogger
    from emurig.rammachine import (
        RamAssembler,
        RamCpu,
        RamInputTape,
        RamOutputTape,
        RamProgramMemory,
        RamRegisterMemory,
    )
    from emurig.tinyvn import ByteMemory, TinyVnAssembler, TinyVnCpu

    registry = PluginRegistry()
    for cls in (
        TinyVnAssembler,
        TinyVnCpu,
        ByteMemory,
        RamAssembler,
        RamCpu,
        RamProgramMemory,
        RamRegisterMemory,
        RamInputTape,
        RamOutputTape,
        Terminal,
        SerialHub,
        WriteLogger,
    ):
        registry.register(cls)
    return registry
