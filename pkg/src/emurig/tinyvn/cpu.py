"""TinyVN CPU: 8-bit accumulator, 8-bit program counter, zero flag."""

from __future__ import annotations

from emurig.contracts import (
    CONTINUE,
    HALTED,
    CpuPlugin,
    EmuError,
    MemoryContext,
    PluginKind,
    PluginMetadata,
    RegisterView,
    StepOutcome,
)
from emurig.tinyvn.assembler import OPCODES

_MNEMONIC_BY_OPCODE = {code: (name, arity) for name, (code, arity) in OPCODES.items()}

HALT, LOAD, STORE, ADD, SUB, JMP, JZ, IN, OUT, LDI = range(10)


class TinyVnCpu(CpuPlugin):
    metadata = PluginMetadata("tinyvn-cpu", PluginKind.CPU, "TinyVN CPU", "1.0")

    def __init__(self) -> None:
        super().__init__()
        self.memory: MemoryContext | None = None
        self.a = 0
        self.pc = 0
        self.z = True

    def attach_memory(self, ctx: MemoryContext) -> None:
        self.memory = ctx

    def reset(self, start_address: int) -> None:
        self.a = 0
        self.pc = start_address & 0xFF
        self.z = True

    @property
    def program_counter(self) -> int:
        return self.pc

    def registers(self) -> list[RegisterView]:
        return [RegisterView("A", self.a, 8), RegisterView("PC", self.pc, 8)]

    def flags(self) -> list[tuple[str, bool]]:
        return [("Z", self.z)]

    def _set_a(self, value: int) -> None:
        self.a = value & 0xFF
        self.z = self.a == 0

    def step(self) -> StepOutcome:
        mem = self.memory
        if mem is None:
            return StepOutcome.fault("no memory attached")
        try:
            opcode = mem.read_cell(self.pc)
            if opcode == HALT:
                return HALTED  # pc stays on the halt instruction
            if opcode not in _MNEMONIC_BY_OPCODE:
                return StepOutcome.fault(f"invalid opcode 0x{opcode:02X} at 0x{self.pc:02X}")
            operand = mem.read_cell((self.pc + 1) & 0xFF)
            next_pc = (self.pc + 2) & 0xFF

            if opcode == LOAD:
                self._set_a(mem.read_cell(operand))
            elif opcode == STORE:
                mem.write_cell(operand, self.a)
            elif opcode == ADD:
                self._set_a(self.a + mem.read_cell(operand))
            elif opcode == SUB:
                self._set_a(self.a - mem.read_cell(operand))
            elif opcode == JMP:
                next_pc = operand
            elif opcode == JZ:
                if self.z:
                    next_pc = operand
            elif opcode == IN:
                port = self.ports.get(operand)
                if port is None:
                    return StepOutcome.fault(f"no device on port {operand}")
                self._set_a(port.in_())
            elif opcode == OUT:
                port = self.ports.get(operand)
                if port is None:
                    return StepOutcome.fault(f"no device on port {operand}")
                port.out(self.a)
            elif opcode == LDI:
                self._set_a(operand)

            self.pc = next_pc
            return CONTINUE
        except (EmuError, ValueError) as e:
            return StepOutcome.fault(str(e))

    def disassemble(self, address: int) -> tuple[str, int]:
        mem = self.memory
        if mem is None:
            raise EmuError("no memory attached")
        opcode = mem.read_cell(address)
        entry = _MNEMONIC_BY_OPCODE.get(opcode)
        if entry is None:
            return f"DB 0x{opcode:02X}", 1
        name, arity = entry
        if arity == 0:
            return name, 1
        operand = mem.read_cell((address + 1) & 0xFF)
        return f"{name} {operand}", 2
