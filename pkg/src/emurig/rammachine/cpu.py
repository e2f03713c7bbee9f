"""RAM machine CPU.

Register 0 is the accumulator.  The CPU distinguishes its two memories
by cell kind: "instruction" cells are the program, anything else is the
register file.  Program memory arrives fetch-only, so the Harvard split
is enforced by the context itself, not by good manners.
"""

from __future__ import annotations

from emurig.contracts import (
    CONTINUE,
    HALTED,
    CpuPlugin,
    DeviceError,
    EmuError,
    MemoryContext,
    PluginKind,
    PluginMetadata,
    RegisterView,
    StepOutcome,
    WiringError,
)
from emurig.rammachine.isa import Mode, Op, decode, render, sign_extend_32

INPUT_PORT = 0
OUTPUT_PORT = 1

_I64 = 1 << 63


class RamCpu(CpuPlugin):
    metadata = PluginMetadata("ram-cpu", PluginKind.CPU, "RAM CPU", "1.0")

    def __init__(self) -> None:
        super().__init__()
        self.program: MemoryContext | None = None
        self.regs: MemoryContext | None = None
        self.pc = 0

    def attach_memory(self, ctx: MemoryContext) -> None:
        if ctx.cell_kind == "instruction":
            self.program = ctx
        else:
            if not ctx.read_only:
                self.regs = ctx
            else:
                raise WiringError("register memory must be writable")

    def reset(self, start_address: int) -> None:
        self.pc = max(0, start_address)

    @property
    def program_counter(self) -> int:
        return self.pc

    def registers(self) -> list[RegisterView]:
        acc = self.regs.read_cell(0) if self.regs is not None else 0
        return [
            RegisterView("ACC", acc & ((1 << 64) - 1), 64),
            RegisterView("PC", self.pc, 32),
        ]

    def flags(self) -> list[tuple[str, bool]]:
        return []

    # -- operand plumbing ------------------------------------------------------

    def _reg_index(self, mode: Mode, raw: int) -> int:
        """Register index named by a target operand (n or *n)."""
        if mode is Mode.INDIRECT:
            idx = self.regs.read_cell(raw)
            if idx < 0:
                raise EmuError(f"negative register index {idx} via *{raw}")
            return idx
        return raw

    def _value(self, mode: Mode, raw: int) -> int:
        if mode is Mode.CONSTANT:
            return sign_extend_32(raw)
        return self.regs.read_cell(self._reg_index(mode, raw))

    def step(self) -> StepOutcome:
        if self.program is None or self.regs is None:
            return StepOutcome.fault("memories not attached")
        try:
            if not 0 <= self.pc < self.program.size():
                return StepOutcome.fault(f"pc {self.pc} outside program memory")
            cell = self.program.read_cell(self.pc)
            if cell == 0:
                return StepOutcome.fault(f"no instruction at {self.pc}")
            op, mode, raw = decode(cell)
            next_pc = self.pc + 1

            if op is Op.HALT:
                return HALTED
            if op is Op.READ:
                port = self.ports.get(INPUT_PORT)
                if port is None:
                    return StepOutcome.fault("no input tape on port 0")
                self.regs.write_cell(self._reg_index(mode, raw), port.in_())
            elif op is Op.WRITE:
                port = self.ports.get(OUTPUT_PORT)
                if port is None:
                    return StepOutcome.fault("no output tape on port 1")
                port.out(self._value(mode, raw))
            elif op is Op.LOAD:
                self.regs.write_cell(0, self._value(mode, raw))
            elif op is Op.STORE:
                self.regs.write_cell(self._reg_index(mode, raw), self.regs.read_cell(0))
            elif op in (Op.ADD, Op.SUB):
                delta = self._value(mode, raw)
                acc = self.regs.read_cell(0)
                result = acc + delta if op is Op.ADD else acc - delta
                if not -_I64 <= result < _I64:
                    return StepOutcome.fault(f"signed 64-bit overflow: {result}")
                self.regs.write_cell(0, result)
            elif op is Op.JMP:
                next_pc = raw
            elif op is Op.JZ:
                if self.regs.read_cell(0) == 0:
                    next_pc = raw

            self.pc = next_pc
            return CONTINUE
        except DeviceError as e:
            return StepOutcome.fault(str(e))
        except (EmuError, ValueError) as e:
            return StepOutcome.fault(str(e))

    def disassemble(self, address: int) -> tuple[str, int]:
        if self.program is None:
            raise EmuError("no program memory attached")
        cell = self.program.read_cell(address)
        if cell == 0:
            return "?", 1
        try:
            return render(cell), 1
        except ValueError:
            return "?", 1
