"""Command-line front end.

Exit codes: 0 success, 1 compile diagnostics, 2 usage/config errors,
3 emulation fault, 4 step-budget exhaustion.
"""

from __future__ import annotations

import argparse
import os
import sys
from importlib import resources
from pathlib import Path

from emurig import config as cfgmod
from emurig.contracts import CpuRunState, EmuError
from emurig.devices import Terminal
from emurig.machine import BreakpointHit, IllegalCommand, Machine, build_machine
from emurig.rammachine import RamInputTape, RamOutputTape
from emurig.registry import default_registry

EXIT_OK = 0
EXIT_DIAGNOSTICS = 1
EXIT_USAGE = 2
EXIT_FAULT = 3
EXIT_BUDGET = 4

DEFAULT_MAX_STEPS = 10_000_000


class CliError(Exception):
    """Usage or configuration problem; maps to exit code 2."""


def default_store() -> Path:
    env = os.environ.get("EMU_CONFIG_STORE")
    if env:
        return Path(env)
    return Path.home() / ".emurig"


def _builtin_config_text(name: str) -> str | None:
    candidate = resources.files("emurig").joinpath("configs", f"{name}{cfgmod.CONFIG_SUFFIX}")
    if candidate.is_file():
        return candidate.read_text(encoding="utf-8")
    return None


def resolve_config(args) -> cfgmod.ArchitectureConfig:
    """--config-file wins; --config checks the store, then built-ins."""
    if getattr(args, "config_file", None):
        path = Path(args.config_file)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as e:
            raise CliError(f"cannot read config file {path}: {e}") from None
        return _parse_or_die(text, str(path))
    name = getattr(args, "config", None)
    if not name:
        raise CliError("no architecture given: use --config NAME or --config-file PATH")
    store_path = cfgmod.config_path(name, default_store())
    if store_path.is_file():
        return _parse_or_die(store_path.read_text(encoding="utf-8"), str(store_path))
    builtin = _builtin_config_text(name)
    if builtin is not None:
        return _parse_or_die(builtin, name)
    raise CliError(f"no configuration named {name!r} (store: {default_store()})")


def _parse_or_die(text: str, origin: str) -> cfgmod.ArchitectureConfig:
    try:
        cfg = cfgmod.parse_config(text)
    except cfgmod.ConfigError as e:
        raise CliError(f"{origin}: {e}") from None
    report = cfgmod.validate(cfg)
    if not report.ok:
        first = report.violations[0]
        raise CliError(f"{origin}: {first.rule_id}: {first.message}")
    return cfg


def _read_source(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise CliError(f"cannot read source {path}: {e}") from None


def _build(cfg, max_steps=None) -> Machine:
    try:
        return build_machine(cfg, default_registry(), step_budget=max_steps)
    except EmuError as e:
        raise CliError(str(e)) from None


def _print_diagnostics(diagnostics) -> None:
    for d in diagnostics:
        print(f"{d.line}:{d.column}: {d.severity}: {d.message}", file=sys.stderr)


def _image_summary(machine: Machine, out) -> str:
    unit = "bytes"
    mem = machine.compiler_memory
    if mem is not None and mem.cell_kind != "byte":
        unit = "cells"
    if unit == "bytes":
        return f"{len(out.image)} {unit}, start 0x{out.start_address:02X}"
    return f"{len(out.image)} {unit}, start {out.start_address}"


# ---------------------------------------------------------------------------
# Subcommands


def cmd_compile(args) -> int:
    cfg = resolve_config(args)
    machine = _build(cfg)
    source = _read_source(args.source)
    out = machine.compile_and_load(source)
    if not out.success:
        _print_diagnostics(out.diagnostics)
        return EXIT_DIAGNOSTICS
    print(_image_summary(machine, out))
    if args.out:
        lines = "".join(f"{a:02X} {v:02X}\n" for a, v in out.image)
        try:
            Path(args.out).write_text(lines, encoding="utf-8")
        except OSError as e:
            raise CliError(f"cannot write {args.out}: {e}") from None
    return EXIT_OK


def _feed_input(machine: Machine, input_path: str | None) -> None:
    if not input_path:
        return
    try:
        raw = Path(input_path).read_text(encoding="utf-8")
    except OSError as e:
        raise CliError(f"cannot read input {input_path}: {e}") from None
    tapes = [d for d in machine.devices.values() if isinstance(d, RamInputTape)]
    if tapes:
        try:
            values = [int(word) for word in raw.split()]
        except ValueError as e:
            raise CliError(f"{input_path}: tape values must be integers: {e}") from None
        tapes[0].feed(values)
        return
    terminals = [d for d in machine.devices.values() if isinstance(d, Terminal)]
    if terminals:
        # a file of whitespace-separated integers feeds as values,
        # anything else feeds as raw bytes
        words = raw.split()
        try:
            values = [int(word) for word in words] if words else []
        except ValueError:
            values = None
        if values:
            terminals[0].feed(values)
        else:
            terminals[0].feed(raw.encode("utf-8"))
        return
    raise CliError("--input given but the architecture has no input device")


def _print_device_output(machine: Machine) -> None:
    for device in machine.devices.values():
        if isinstance(device, Terminal):
            text = "".join(chr(v) for v in device.take_output())
            if text:
                sys.stdout.write(text)
                if not text.endswith("\n"):
                    sys.stdout.write("\n")
        elif isinstance(device, RamOutputTape):
            for value in device.take_output():
                print(value)


def cmd_run(args) -> int:
    cfg = resolve_config(args)
    machine = _build(cfg, max_steps=args.max_steps)
    source = _read_source(args.source)
    out = machine.compile_and_load(source)
    if not out.success:
        _print_diagnostics(out.diagnostics)
        return EXIT_DIAGNOSTICS
    machine.reset()
    _feed_input(machine, args.input)
    machine.execute()
    machine.wait_idle()
    _print_device_output(machine)
    if args.dump_memory:
        _dump_memory(machine, args.dump_memory)
    if machine.budget_exhausted:
        print(f"step budget of {args.max_steps} exhausted", file=sys.stderr)
        return EXIT_BUDGET
    if machine.last_fault is not None:
        print(f"fault: {machine.last_fault}", file=sys.stderr)
        return EXIT_FAULT
    return EXIT_OK


def _parse_addr(text: str) -> int:
    return int(text, 16) if text.lower().startswith("0x") else int(text)


def _dump_memory(machine: Machine, spec: str) -> None:
    try:
        lo_s, hi_s = spec.split("..", 1)
        lo, hi = _parse_addr(lo_s), _parse_addr(hi_s)
    except ValueError:
        raise CliError(f"bad --dump-memory range {spec!r}, expected A..B") from None
    memory = next(iter(machine.memories.values()))
    values = memory.read(lo, hi - lo + 1)
    for address, value in zip(range(lo, hi + 1), values):
        print(f"{address:02X} {value:02X}")


def cmd_plugins(_args) -> int:
    registry = default_registry()
    for plugin_id in registry.ids():
        meta = registry.describe(plugin_id)
        print(f"{plugin_id}  {meta.kind.value.capitalize()}  {meta.version}")
    return EXIT_OK


def cmd_configs(args) -> int:
    store = Path(args.store) if args.store else default_store()
    try:
        names = cfgmod.list_configs(store)
    except OSError as e:
        raise CliError(f"cannot read store {store}: {e}") from None
    for name in names:
        print(name)
    return EXIT_OK


def cmd_serve(args) -> int:
    from emurig.service import serve

    cfg = resolve_config(args) if (args.config or args.config_file) else None

    def announce(server, _service):
        host, port = server.socket.getsockname()[:2]
        # with --port 0 this is the only way callers learn the real port
        print(f"listening on {host}:{port}", flush=True)

    try:
        serve(host=args.host, port=args.port, initial_config=cfg, ready=announce)
    except KeyboardInterrupt:
        pass
    return EXIT_OK


# ---------------------------------------------------------------------------
# Debug REPL


def _status_line(machine: Machine) -> str:
    snap = machine.snapshot()
    parts = [f"state={snap.state.value}", f"pc=0x{snap.program_counter:02X}"]
    for reg in snap.registers:
        if reg.name != "PC":
            parts.append(f"{reg.name}=0x{reg.value:02X}")
    for name, value in snap.flags:
        parts.append(f"{name}={1 if value else 0}")
    return " ".join(parts)


def cmd_debug(args) -> int:
    cfg = resolve_config(args)
    machine = _build(cfg)
    source = _read_source(args.source)
    out = machine.compile_and_load(source)
    if not out.success:
        _print_diagnostics(out.diagnostics)
        return EXIT_DIAGNOSTICS
    machine.reset()
    events = machine.subscribe()
    print(_status_line(machine))

    while True:
        try:
            raw = input("(emu) ")
        except EOFError:
            return EXIT_OK
        except KeyboardInterrupt:
            print()
            continue
        words = raw.split()
        if not words:
            continue
        op, rest = words[0], words[1:]
        try:
            if op == "q":
                return EXIT_OK
            elif op == "s":
                events.drain()
                machine.step()
                print(_status_line(machine))
            elif op == "c":
                events.drain()
                machine.execute()
                try:
                    machine.wait_idle()
                except KeyboardInterrupt:
                    machine.pause()
                    machine.wait_idle()
                for event in events.drain():
                    if isinstance(event, BreakpointHit):
                        print(f"breakpoint hit at 0x{event.address:02X}")
                print(_status_line(machine))
            elif op == "b" and rest:
                machine.add_breakpoint(_parse_addr(rest[0]))
                print(_status_line(machine))
            elif op == "d" and rest:
                machine.remove_breakpoint(_parse_addr(rest[0]))
                print(_status_line(machine))
            elif op == "r":
                machine.reset()
                print(_status_line(machine))
            elif op == "x" and len(rest) >= 2:
                lo, hi = _parse_addr(rest[0]), _parse_addr(rest[1])
                memory = next(iter(machine.memories.values()))
                values = memory.read(lo, hi - lo + 1)
                for start in range(0, len(values), 16):
                    chunk = values[start : start + 16]
                    rendered = " ".join(f"{v:02X}" for v in chunk)
                    print(f"{lo + start:02X}: {rendered}")
            elif op == "st":
                print(_status_line(machine))
            elif op == "i" and rest:
                fed = False
                for device in machine.devices.values():
                    if isinstance(device, (Terminal, RamInputTape)):
                        device.feed(int(w) for w in rest)
                        fed = True
                        break
                if not fed:
                    print("no input device")
            else:
                print(
                    "commands: s step | c continue | b ADDR | d ADDR | r reset | "
                    "x LO HI | st status | i VALUES | q quit"
                )
        except IllegalCommand as e:
            print(str(e))
        except (EmuError, ValueError) as e:
            print(f"error: {e}")


# ---------------------------------------------------------------------------
# Entry point


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="emurig", description="Plug-in based computer emulator")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add_config_args(p):
        p.add_argument("--config", help="architecture name (store or built-in)")
        p.add_argument("--config-file", help="path to an architecture file")

    p = sub.add_parser("compile", help="compile a source file")
    add_config_args(p)
    p.add_argument("source")
    p.add_argument("--out", help="write image as 'ADDR VALUE' hex lines")
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("run", help="compile and execute to completion")
    add_config_args(p)
    p.add_argument("source")
    p.add_argument("--input", help="input file (tape values or terminal text)")
    p.add_argument("--max-steps", type=int, default=DEFAULT_MAX_STEPS)
    p.add_argument("--dump-memory", metavar="A..B", help="print memory range after the run")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("debug", help="interactive debugger")
    add_config_args(p)
    p.add_argument("source")
    p.set_defaults(func=cmd_debug)

    p = sub.add_parser("plugins", help="list installed plug-ins")
    p.set_defaults(func=cmd_plugins)

    p = sub.add_parser("configs", help="list stored configurations")
    p.add_argument("--store", help="config store directory")
    p.set_defaults(func=cmd_configs)

    p = sub.add_parser("serve", help="run the remote-control service")
    add_config_args(p)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=7642)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse exits 2 on usage errors already; normalize others
        return EXIT_USAGE if e.code not in (0,) else 0
    try:
        return args.func(args)
    except CliError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except EmuError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_FAULT


if __name__ == "__main__":
    sys.exit(main())
