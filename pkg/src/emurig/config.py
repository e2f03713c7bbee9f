"""Architecture configurations: parse, validate, persist.

A configuration names the plug-in instances of one virtual computer and
the connections between them.  Validation enforces who may talk to whom;
the allowed call directions are Cpu→Memory, Device→Cpu, Device→Memory,
Device→Device and Compiler→Memory.  Memory never initiates: it is always
plugged into the party that uses it.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

from emurig.contracts import PluginKind

CONFIG_SUFFIX = ".emucfg.json"

ALLOWED_EDGES = frozenset(
    {
        (PluginKind.CPU, PluginKind.MEMORY),
        (PluginKind.DEVICE, PluginKind.CPU),
        (PluginKind.DEVICE, PluginKind.MEMORY),
        (PluginKind.DEVICE, PluginKind.DEVICE),
        (PluginKind.COMPILER, PluginKind.MEMORY),
    }
)


class ConfigError(Exception):
    """Base class for configuration errors."""


class ConfigSyntaxError(ConfigError):
    """The document is not well-formed JSON."""


class SchemaError(ConfigError):
    """The document is JSON but violates the configuration schema."""


class DuplicateIdError(SchemaError):
    """Two plug-in instances share an instance id."""


class NotFoundError(ConfigError):
    """No stored configuration with the requested name."""


@dataclass(frozen=True)
class PluginInstance:
    instance_id: str
    plugin_id: str
    kind: PluginKind


@dataclass(frozen=True)
class Connection:
    from_instance: str
    to_instance: str
    port: int | None = None
    context_id: str | None = None


@dataclass(frozen=True)
class ArchitectureConfig:
    name: str
    plugins: tuple[PluginInstance, ...]
    connections: tuple[Connection, ...]
    settings: dict[str, dict[str, str]] = field(default_factory=dict)
    layout: dict[str, dict[str, float]] = field(default_factory=dict)

    def instance(self, instance_id: str) -> PluginInstance:
        for p in self.plugins:
            if p.instance_id == instance_id:
                return p
        raise KeyError(instance_id)

    def kind_of(self, instance_id: str) -> PluginKind:
        return self.instance(instance_id).kind


@dataclass(frozen=True)
class Violation:
    rule_id: str
    message: str
    connection: Connection | None = None


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violations: tuple[Violation, ...]
    warnings: tuple[Violation, ...] = ()


# ---------------------------------------------------------------------------
# Parse / serialize


def _require(mapping: dict, key: str, typ: type, where: str):
    if key not in mapping:
        raise SchemaError(f"{where}: missing required field {key!r}")
    value = mapping[key]
    if typ is int:
        # bool is an int subclass; ports must be real integers
        if isinstance(value, bool) or not isinstance(value, int):
            raise SchemaError(f"{where}: field {key!r} must be an integer")
    elif not isinstance(value, typ):
        raise SchemaError(f"{where}: field {key!r} must be {typ.__name__}")
    return value


def parse_config(text: str) -> ArchitectureConfig:
    """Parse a configuration document and check its structural invariants."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigSyntaxError(f"line {e.lineno}, column {e.colno}: {e.msg}") from e
    if not isinstance(doc, dict):
        raise SchemaError("top level must be an object")

    name = _require(doc, "name", str, "config")
    raw_plugins = _require(doc, "plugins", list, "config")
    raw_connections = _require(doc, "connections", list, "config")

    plugins: list[PluginInstance] = []
    seen: set[str] = set()
    for i, entry in enumerate(raw_plugins):
        where = f"plugins[{i}]"
        if not isinstance(entry, dict):
            raise SchemaError(f"{where}: must be an object")
        instance_id = _require(entry, "id", str, where)
        plugin_id = _require(entry, "plugin", str, where)
        kind_name = _require(entry, "kind", str, where)
        try:
            kind = PluginKind(kind_name)
        except ValueError:
            raise SchemaError(f"{where}: unknown kind {kind_name!r}") from None
        if instance_id in seen:
            raise DuplicateIdError(f"duplicate instance id {instance_id!r}")
        seen.add(instance_id)
        plugins.append(PluginInstance(instance_id, plugin_id, kind))

    connections: list[Connection] = []
    for i, entry in enumerate(raw_connections):
        where = f"connections[{i}]"
        if not isinstance(entry, dict):
            raise SchemaError(f"{where}: must be an object")
        src = _require(entry, "from", str, where)
        dst = _require(entry, "to", str, where)
        port = None
        if "port" in entry:
            port = _require(entry, "port", int, where)
            if port < 0:
                raise SchemaError(f"{where}: port must be non-negative")
        context_id = None
        if "context" in entry:
            context_id = _require(entry, "context", str, where)
        if src == dst:
            raise SchemaError(f"{where}: connection endpoints must differ")
        if src not in seen:
            raise SchemaError(f"{where}: unknown instance {src!r}")
        if dst not in seen:
            raise SchemaError(f"{where}: unknown instance {dst!r}")
        connections.append(Connection(src, dst, port, context_id))

    settings: dict[str, dict[str, str]] = {}
    for instance_id, table in doc.get("settings", {}).items():
        if instance_id not in seen:
            raise SchemaError(f"settings: unknown instance {instance_id!r}")
        if not isinstance(table, dict):
            raise SchemaError(f"settings[{instance_id}]: must be an object")
        for key, value in table.items():
            if not isinstance(value, str):
                raise SchemaError(f"settings[{instance_id}][{key}]: values must be strings")
        settings[instance_id] = dict(table)

    layout = doc.get("layout", {})
    if not isinstance(layout, dict):
        raise SchemaError("layout: must be an object")

    counts = {kind: 0 for kind in PluginKind}
    for p in plugins:
        counts[p.kind] += 1
    if counts[PluginKind.CPU] != 1:
        raise SchemaError(f"config must declare exactly one cpu, found {counts[PluginKind.CPU]}")
    if counts[PluginKind.COMPILER] != 1:
        raise SchemaError(f"config must declare exactly one compiler, found {counts[PluginKind.COMPILER]}")
    if counts[PluginKind.MEMORY] < 1:
        raise SchemaError("config must declare at least one memory")

    return ArchitectureConfig(name, tuple(plugins), tuple(connections), settings, layout)


def serialize_config(cfg: ArchitectureConfig) -> str:
    """Render a config as canonical JSON: sorted keys, 2-space indent.

    Equal configs serialize byte-identically."""
    doc: dict = {
        "name": cfg.name,
        "plugins": [
            {"id": p.instance_id, "plugin": p.plugin_id, "kind": p.kind.value}
            for p in cfg.plugins
        ],
        "connections": [],
    }
    for c in cfg.connections:
        entry: dict = {"from": c.from_instance, "to": c.to_instance}
        if c.port is not None:
            entry["port"] = c.port
        if c.context_id is not None:
            entry["context"] = c.context_id
        doc["connections"].append(entry)
    if cfg.settings:
        doc["settings"] = cfg.settings
    if cfg.layout:
        doc["layout"] = cfg.layout
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# Validation


def validate(cfg: ArchitectureConfig) -> ValidationReport:
    """Check connection directions and port multiplicity.

    ok is true iff there are no violations; warnings never affect ok."""
    violations: list[Violation] = []
    warnings: list[Violation] = []

    ports_in_use: set[tuple[str, int]] = set()
    for conn in cfg.connections:
        src_kind = cfg.kind_of(conn.from_instance)
        dst_kind = cfg.kind_of(conn.to_instance)
        if (src_kind, dst_kind) not in ALLOWED_EDGES:
            if src_kind is PluginKind.MEMORY:
                rule = "memory-initiates"
                msg = (
                    f"{conn.from_instance} ({src_kind.value}) may not initiate a connection: "
                    "memory is always plugged into the party that uses it"
                )
            else:
                rule = "illegal-edge"
                msg = (
                    f"{src_kind.value} -> {dst_kind.value} is not an allowed direction "
                    f"({conn.from_instance} -> {conn.to_instance})"
                )
            violations.append(Violation(rule, msg, conn))
            continue
        if src_kind is PluginKind.DEVICE and dst_kind is PluginKind.CPU:
            if conn.port is None:
                violations.append(
                    Violation(
                        "missing-port",
                        f"device {conn.from_instance} -> cpu {conn.to_instance} needs a port",
                        conn,
                    )
                )
            else:
                key = (conn.to_instance, conn.port)
                if key in ports_in_use:
                    violations.append(
                        Violation(
                            "port-clash",
                            f"cpu {conn.to_instance} port {conn.port} attached more than once",
                            conn,
                        )
                    )
                ports_in_use.add(key)

    cpu_ids = [p.instance_id for p in cfg.plugins if p.kind is PluginKind.CPU]
    for cpu_id in cpu_ids:
        has_memory = any(
            c.from_instance == cpu_id and cfg.kind_of(c.to_instance) is PluginKind.MEMORY
            for c in cfg.connections
        )
        if not has_memory:
            warnings.append(
                Violation("cpu-no-memory", f"cpu {cpu_id} has no memory connection", None)
            )

    return ValidationReport(not violations, tuple(violations), tuple(warnings))


# ---------------------------------------------------------------------------
# Persistence


def config_path(name: str, store_dir: str | Path) -> Path:
    return Path(store_dir) / f"{name}{CONFIG_SUFFIX}"


def save_config(cfg: ArchitectureConfig, store_dir: str | Path) -> Path:
    """Write the config under its name; atomic replace on overwrite."""
    store = Path(store_dir)
    store.mkdir(parents=True, exist_ok=True)
    target = config_path(cfg.name, store)
    fd, tmp = tempfile.mkstemp(dir=store, prefix=".cfg-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as f:
            f.write(serialize_config(cfg))
        os.replace(tmp, target)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise
    return target


def load_config(name: str, store_dir: str | Path) -> ArchitectureConfig:
    path = config_path(name, store_dir)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise NotFoundError(f"no configuration named {name!r} in {store_dir}") from None
    return parse_config(text)


def list_configs(store_dir: str | Path) -> list[str]:
    store = Path(store_dir)
    if not store.is_dir():
        return []
    names = [
        p.name[: -len(CONFIG_SUFFIX)]
        for p in store.iterdir()
        if p.name.endswith(CONFIG_SUFFIX) and p.is_file()
    ]
    return sorted(names)
