"""TinyVN: a small von Neumann reference architecture.

One shared 256-cell byte memory holds code and data; the CPU is an
8-bit accumulator machine with port-mapped I/O.
"""

from emurig.tinyvn.assembler import TinyVnAssembler, tinyvn_lex
from emurig.tinyvn.cpu import TinyVnCpu
from emurig.tinyvn.memory import ByteMemory

__all__ = ["TinyVnAssembler", "TinyVnCpu", "ByteMemory", "tinyvn_lex"]
