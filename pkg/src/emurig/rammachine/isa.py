"""RAM instruction set: operations, addressing modes, integer encoding.

Program memory cells are instruction-valued; the encoding packs an
instruction into one unsigned integer (op<<34 | mode<<32 | operand)
so it still travels through the generic memory contracts.  Encoded 0
is no instruction at all: fetching it faults.
"""

from __future__ import annotations

from enum import IntEnum


class Op(IntEnum):
    READ = 1
    WRITE = 2
    LOAD = 3
    STORE = 4
    ADD = 5
    SUB = 6
    JMP = 7
    JZ = 8
    HALT = 9


class Mode(IntEnum):
    NONE = 0  # HALT, and jump targets (plain instruction index)
    CONSTANT = 1  # =n
    DIRECT = 2  # n (register index)
    INDIRECT = 3  # *n (register holding a register index)


CELL_WIDTH = 38  # 4 bits op, 2 bits mode, 32 bits operand

_OPERAND_MASK = 0xFFFF_FFFF

# operand modes each op accepts
VALUE_OPS = {Op.WRITE, Op.LOAD, Op.ADD, Op.SUB}  # =n, n, *n
TARGET_OPS = {Op.READ, Op.STORE}  # n, *n
JUMP_OPS = {Op.JMP, Op.JZ}  # label or instruction index


def encode(op: Op, mode: Mode, operand: int = 0) -> int:
    return (int(op) << 34) | (int(mode) << 32) | (operand & _OPERAND_MASK)


def decode(cell: int) -> tuple[Op, Mode, int]:
    """Split a cell back into (op, mode, raw operand).

    The raw operand is the unsigned 32-bit field; sign extension for
    constants is the caller's business.  Raises ValueError on cells that
    encode no known instruction."""
    op_bits = cell >> 34
    mode_bits = (cell >> 32) & 0x3
    try:
        op = Op(op_bits)
    except ValueError:
        raise ValueError(f"cell 0x{cell:X} holds no instruction") from None
    return op, Mode(mode_bits), cell & _OPERAND_MASK


def sign_extend_32(raw: int) -> int:
    return raw - (1 << 32) if raw & (1 << 31) else raw


def render(cell: int) -> str:
    """Canonical assembly text for one encoded instruction."""
    op, mode, raw = decode(cell)
    if op is Op.HALT:
        return "HALT"
    if mode is Mode.CONSTANT:
        return f"{op.name} ={sign_extend_32(raw)}"
    if mode is Mode.INDIRECT:
        return f"{op.name} *{raw}"
    return f"{op.name} {raw}"
