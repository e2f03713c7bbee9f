"""Random Access Machine: a Harvard reference architecture.

Instructions live in a dedicated program memory (fetch-only for the
CPU), data lives in a sparse register memory, and I/O goes through
input/output tape devices.
"""

from emurig.rammachine.assembler import RamAssembler, ram_lex
from emurig.rammachine.cpu import RamCpu
from emurig.rammachine.isa import Mode, Op, decode, encode, render
from emurig.rammachine.memory import RamProgramMemory, RamRegisterMemory
from emurig.rammachine.tapes import RamInputTape, RamOutputTape

__all__ = [
    "Mode",
    "Op",
    "RamAssembler",
    "RamCpu",
    "RamInputTape",
    "RamOutputTape",
    "RamProgramMemory",
    "RamRegisterMemory",
    "decode",
    "encode",
    "ram_lex",
    "render",
]
