"""Independent reference interpreters and program generators.

These are deliberately written from the instruction-set definitions
alone and import nothing from the package under test: they are the
ground truth the plug-in CPUs are checked against.  Both interpreters
are big-step: run a whole program image to halt/fault/budget and report
the final state.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

# ---------------------------------------------------------------------------
# TinyVN reference interpreter

T_HALT, T_LOAD, T_STORE, T_ADD, T_SUB, T_JMP, T_JZ, T_IN, T_OUT, T_LDI = range(10)

TINYVN_MNEMONIC = {
    T_HALT: "HALT", T_LOAD: "LOAD", T_STORE: "STORE", T_ADD: "ADD", T_SUB: "SUB",
    T_JMP: "JMP", T_JZ: "JZ", T_IN: "IN", T_OUT: "OUT", T_LDI: "LDI",
}


@dataclass
class TinyVnResult:
    a: int
    z: bool
    pc: int
    memory: list[int]
    outputs: list[int]
    stop: str  # "halt" | "fault" | "budget"
    steps: int


def run_tinyvn(
    image: list[tuple[int, int]],
    start: int = 0,
    inputs: list[int] | None = None,
    max_steps: int = 10_000,
    ports: frozenset[int] = frozenset({0}),
) -> TinyVnResult:
    memory = [0] * 256
    for address, value in image:
        memory[address] = value
    a, pc, z = 0, start & 0xFF, True
    queue = list(inputs or [])
    outputs: list[int] = []
    stop = "budget"
    steps = 0

    def set_a(value: int) -> None:
        nonlocal a, z
        a = value & 0xFF
        z = a == 0

    while steps < max_steps:
        op = memory[pc]
        if op == T_HALT:
            stop = "halt"
            break
        if op > T_LDI:
            stop = "fault"
            break
        operand = memory[(pc + 1) & 0xFF]
        next_pc = (pc + 2) & 0xFF
        if op == T_LOAD:
            set_a(memory[operand])
        elif op == T_STORE:
            memory[operand] = a
        elif op == T_ADD:
            set_a(a + memory[operand])
        elif op == T_SUB:
            set_a(a - memory[operand])
        elif op == T_JMP:
            next_pc = operand
        elif op == T_JZ:
            if z:
                next_pc = operand
        elif op == T_IN:
            if operand not in ports:
                stop = "fault"
                break
            set_a(queue.pop(0) if queue else 0)
        elif op == T_OUT:
            if operand not in ports:
                stop = "fault"
                break
            outputs.append(a)
        elif op == T_LDI:
            set_a(operand)
        pc = next_pc
        steps += 1

    return TinyVnResult(a, z, pc, memory, outputs, stop, steps)


# ---------------------------------------------------------------------------
# RAM reference interpreter

R_READ, R_WRITE, R_LOAD, R_STORE, R_ADD, R_SUB, R_JMP, R_JZ, R_HALT = (
    "READ", "WRITE", "LOAD", "STORE", "ADD", "SUB", "JMP", "JZ", "HALT",
)

M_CONST, M_DIRECT, M_INDIRECT, M_NONE = "=", "", "*", None

_I64 = 1 << 63


@dataclass
class RamResult:
    regs: dict[int, int]
    outputs: list[int]
    pc: int
    stop: str  # "halt" | "fault" | "budget"
    steps: int


def run_ram(
    program: list[tuple[str, str | None, int]],
    inputs: list[int] | None = None,
    start: int = 0,
    max_steps: int = 10_000,
) -> RamResult:
    regs: dict[int, int] = {}
    queue = list(inputs or [])
    outputs: list[int] = []
    pc = start
    stop = "budget"
    steps = 0

    def get(i: int) -> int:
        return regs.get(i, 0)

    def put(i: int, v: int) -> None:
        if v:
            regs[i] = v
        else:
            regs.pop(i, None)

    while steps < max_steps:
        if not 0 <= pc < len(program):
            stop = "fault"
            break
        op, mode, operand = program[pc]
        next_pc = pc + 1

        def target() -> int | None:
            if mode == M_INDIRECT:
                idx = get(operand)
                if idx < 0:
                    return None
                return idx
            return operand

        def value() -> int | None:
            if mode == M_CONST:
                return operand
            t = target()
            return None if t is None else get(t)

        if op == R_HALT:
            stop = "halt"
            break
        elif op == R_READ:
            if not queue:
                stop = "fault"
                break
            t = target()
            if t is None:
                stop = "fault"
                break
            put(t, queue.pop(0))
        elif op == R_WRITE:
            v = value()
            if v is None:
                stop = "fault"
                break
            outputs.append(v)
        elif op == R_LOAD:
            v = value()
            if v is None:
                stop = "fault"
                break
            put(0, v)
        elif op == R_STORE:
            t = target()
            if t is None:
                stop = "fault"
                break
            put(t, get(0))
        elif op in (R_ADD, R_SUB):
            v = value()
            if v is None:
                stop = "fault"
                break
            result = get(0) + v if op == R_ADD else get(0) - v
            if not -_I64 <= result < _I64:
                stop = "fault"
                break
            put(0, result)
        elif op == R_JMP:
            next_pc = operand
        elif op == R_JZ:
            if get(0) == 0:
                next_pc = operand
        else:
            stop = "fault"
            break

        pc = next_pc
        steps += 1

    return RamResult(regs, outputs, pc, stop, steps)


def render_ram(program: list[tuple[str, str | None, int]]) -> str:
    """Assembly text for a tuple program (jump targets as plain indices)."""
    lines = []
    for op, mode, operand in program:
        if op == R_HALT:
            lines.append("HALT")
        elif mode == M_CONST:
            lines.append(f"{op} ={operand}")
        elif mode == M_INDIRECT:
            lines.append(f"{op} *{operand}")
        else:
            lines.append(f"{op} {operand}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Random program generators (biased against endless loops, faults allowed)


def gen_tinyvn_program(rng: random.Random, max_len: int = 64) -> list[tuple[int, int]]:
    """Random TinyVN image starting at 0, mostly well-formed, HALT-capped."""
    body_len = rng.randrange(2, max_len - 1)
    image: list[tuple[int, int]] = []
    address = 0
    while address < body_len - 1:
        roll = rng.random()
        if roll < 0.12 and address + 2 <= body_len:
            # jump somewhere inside the program, forward-biased
            op = rng.choice([T_JMP, T_JZ])
            hi = min(body_len, 255)
            lo = min(address + 2, hi)
            target = rng.randrange(lo, hi + 1) if rng.random() < 0.85 else rng.randrange(0, hi + 1)
            image.append((address, op))
            image.append((address + 1, target))
            address += 2
        elif roll < 0.2:
            image.append((address, T_HALT))
            address += 1
        elif roll < 0.3 and address + 2 <= body_len:
            port = 0 if rng.random() < 0.9 else rng.randrange(0, 3)
            image.append((address, rng.choice([T_IN, T_OUT])))
            image.append((address + 1, port))
            address += 2
        elif address + 2 <= body_len:
            op = rng.choice([T_LOAD, T_STORE, T_ADD, T_SUB, T_LDI, T_LDI])
            operand = rng.randrange(0, 256) if rng.random() < 0.2 else rng.randrange(0, max_len)
            image.append((address, op))
            image.append((address + 1, operand))
            address += 2
        else:
            image.append((address, T_HALT))
            address += 1
    image.append((address, T_HALT))
    return image


def gen_tinyvn_source(rng: random.Random, max_instructions: int = 24) -> str:
    """Random label-free TinyVN source (numeric operands only)."""
    arity1 = ["LOAD", "STORE", "ADD", "SUB", "JMP", "JZ", "IN", "OUT", "LDI"]
    lines = []
    for _ in range(rng.randrange(1, max_instructions)):
        if rng.random() < 0.15:
            lines.append("HALT")
        elif rng.random() < 0.1:
            lines.append(f"DB {rng.randrange(0, 256)}")
        else:
            lines.append(f"{rng.choice(arity1)} {rng.randrange(0, 256)}")
    lines.append("HALT")
    return "\n".join(lines) + "\n"


def gen_ram_program(rng: random.Random, max_len: int = 32) -> list[tuple[str, str | None, int]]:
    """Random RAM program: straight-line arithmetic with a few loops."""
    length = rng.randrange(3, max_len)
    program: list[tuple[str, str | None, int]] = []
    for index in range(length - 1):
        roll = rng.random()
        if roll < 0.1:
            target = rng.randrange(index + 1, length) if rng.random() < 0.8 else rng.randrange(0, length)
            program.append((rng.choice([R_JMP, R_JZ]), M_NONE, target))
        elif roll < 0.2:
            program.append((R_READ, rng.choice([M_DIRECT, M_INDIRECT]), rng.randrange(0, 8)))
        elif roll < 0.35:
            mode = rng.choice([M_CONST, M_DIRECT, M_INDIRECT])
            operand = rng.randrange(-50, 200) if mode == M_CONST else rng.randrange(0, 8)
            program.append((R_WRITE, mode, operand))
        elif roll < 0.55:
            mode = rng.choice([M_CONST, M_DIRECT, M_INDIRECT])
            operand = rng.randrange(-100, 100) if mode == M_CONST else rng.randrange(0, 8)
            program.append((rng.choice([R_ADD, R_SUB]), mode, operand))
        elif roll < 0.7:
            mode = rng.choice([M_CONST, M_DIRECT, M_INDIRECT])
            operand = rng.randrange(-100, 100) if mode == M_CONST else rng.randrange(0, 8)
            program.append((R_LOAD, mode, operand))
        else:
            program.append((R_STORE, rng.choice([M_DIRECT, M_INDIRECT]), rng.randrange(0, 8)))
    program.append((R_HALT, M_NONE, 0))
    return program
