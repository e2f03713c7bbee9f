"""TinyVN assembler: lexer, per-line parser, two-pass code generator.

Grammar per line: `[label:] [mnemonic [operand]] [; comment]`.
Directives: ORG sets the location counter (the first ORG also sets the
program start address), DB emits one raw byte.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from emurig.contracts import (
    CompileOutput,
    CompilerPlugin,
    Diagnostic,
    PluginKind,
    PluginMetadata,
    Token,
    TokenCategory,
)

# opcode, operand count (0 or 1)
OPCODES: dict[str, tuple[int, int]] = {
    "HALT": (0x00, 0),
    "LOAD": (0x01, 1),
    "STORE": (0x02, 1),
    "ADD": (0x03, 1),
    "SUB": (0x04, 1),
    "JMP": (0x05, 1),
    "JZ": (0x06, 1),
    "IN": (0x07, 1),
    "OUT": (0x08, 1),
    "LDI": (0x09, 1),
}

DIRECTIVES = {"ORG", "DB"}

MEMORY_SIZE = 256

_TOKEN_RE = re.compile(
    r"""
    (?P<comment>;[^\n]*)
  | (?P<newline>\r?\n)
  | (?P<hspace>[^\S\n\r]+)
  | (?P<number>0[xX][0-9a-fA-F]+|\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<colon>:)
    """,
    re.VERBOSE,
)


def tinyvn_lex(source: str) -> list[Token]:
    """Tokenize assembly source; concatenated lexemes reproduce it exactly."""
    tokens: list[Token] = []
    pos = 0
    line = 1
    column = 1
    offset = 0  # byte offset into the utf-8 encoding

    def emit(category: TokenCategory, lexeme: str) -> None:
        nonlocal line, column, offset
        tokens.append(Token(category, lexeme, line, column, offset))
        offset += len(lexeme.encode("utf-8"))
        newlines = lexeme.count("\n")
        if newlines:
            line += newlines
            column = len(lexeme) - lexeme.rfind("\n")
        else:
            column += len(lexeme)

    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            emit(TokenCategory.ERROR, source[pos])
            pos += 1
            continue
        text = m.group()
        kind = m.lastgroup
        if kind == "comment":
            emit(TokenCategory.COMMENT, text)
        elif kind in ("newline", "hspace"):
            emit(TokenCategory.WHITESPACE, text)
        elif kind == "number":
            emit(TokenCategory.NUMBER, text)
        elif kind == "colon":
            emit(TokenCategory.SEPARATOR, text)
        else:
            upper = text.upper()
            if upper in OPCODES:
                emit(TokenCategory.KEYWORD, text)
            elif upper in DIRECTIVES:
                emit(TokenCategory.DIRECTIVE, text)
            else:
                emit(TokenCategory.LABEL, text)
        pos = m.end()
    return tokens


@dataclass
class AsmLine:
    label: str | None
    op: str | None  # upper-cased mnemonic or directive
    operand: Token | None
    line: int
    column: int


def _parse_number(text: str) -> int:
    return int(text, 16) if text.lower().startswith("0x") else int(text)


def tinyvn_parse(tokens: list[Token]) -> tuple[list[AsmLine], list[Diagnostic]]:
    """Group tokens into per-line statements and check shape and arity."""
    lines: list[AsmLine] = []
    diagnostics: list[Diagnostic] = []
    seen_labels: set[str] = set()

    by_line: dict[int, list[Token]] = {}
    for tok in tokens:
        if tok.category in (TokenCategory.WHITESPACE, TokenCategory.COMMENT):
            continue
        by_line.setdefault(tok.line, []).append(tok)

    for line_no in sorted(by_line):
        toks = by_line[line_no]
        bad = next((t for t in toks if t.category is TokenCategory.ERROR), None)
        if bad is not None:
            diagnostics.append(
                Diagnostic("error", bad.line, bad.column, f"unexpected character {bad.lexeme!r}")
            )
            continue

        label = None
        i = 0
        if (
            len(toks) >= 2
            and toks[0].category is TokenCategory.LABEL
            and toks[1].category is TokenCategory.SEPARATOR
        ):
            label = toks[0].lexeme
            if label in seen_labels:
                diagnostics.append(
                    Diagnostic("error", toks[0].line, toks[0].column, f"duplicate label {label!r}")
                )
            seen_labels.add(label)
            i = 2

        if i == len(toks):
            lines.append(AsmLine(label, None, None, line_no, 1))
            continue

        head = toks[i]
        if head.category is TokenCategory.KEYWORD:
            op = head.lexeme.upper()
            arity = OPCODES[op][1]
        elif head.category is TokenCategory.DIRECTIVE:
            op = head.lexeme.upper()
            arity = 1
        else:
            diagnostics.append(
                Diagnostic("error", head.line, head.column, f"unknown mnemonic {head.lexeme!r}")
            )
            continue
        i += 1

        operands = toks[i:]
        if arity == 0:
            if operands:
                diagnostics.append(
                    Diagnostic("error", operands[0].line, operands[0].column, f"{op} takes no operand")
                )
                continue
            operand = None
        else:
            if not operands:
                diagnostics.append(
                    Diagnostic("error", head.line, head.column, f"{op} takes an operand")
                )
                continue
            if len(operands) > 1:
                extra = operands[1]
                diagnostics.append(
                    Diagnostic(
                        "error", extra.line, extra.column, f"unexpected {extra.lexeme!r} after operand"
                    )
                )
                continue
            operand = operands[0]
            if operand.category not in (TokenCategory.NUMBER, TokenCategory.LABEL):
                diagnostics.append(
                    Diagnostic(
                        "error", operand.line, operand.column, f"bad operand {operand.lexeme!r}"
                    )
                )
                continue
            if op in DIRECTIVES and operand.category is not TokenCategory.NUMBER:
                diagnostics.append(
                    Diagnostic(
                        "error", operand.line, operand.column, f"{op} takes a numeric operand"
                    )
                )
                continue

        lines.append(AsmLine(label, op, operand, head.line, head.column))

    return lines, diagnostics


def tinyvn_assemble(source: str) -> CompileOutput:
    """Two passes: assign addresses and collect symbols, then emit bytes."""
    tokens = tinyvn_lex(source)
    lines, diagnostics = tinyvn_parse(tokens)
    if diagnostics:
        return CompileOutput((), 0, tuple(diagnostics), False)

    symbols: dict[str, int] = {}
    start_address: int | None = None
    loc = 0
    watermark = 0  # one past the highest emitted byte

    # pass 1: addresses and symbols
    for ln in lines:
        if ln.label is not None:
            symbols[ln.label] = loc
        if ln.op is None:
            continue
        if ln.op == "ORG":
            target = _parse_number(ln.operand.lexeme)
            if target >= MEMORY_SIZE:
                diagnostics.append(
                    Diagnostic("error", ln.line, ln.column, f"ORG {target} outside memory")
                )
                continue
            if target < watermark:
                diagnostics.append(
                    Diagnostic("error", ln.line, ln.column, f"ORG {target} moves backwards over emitted code")
                )
                continue
            if start_address is None:
                start_address = target
            loc = target
            if ln.label is not None:
                symbols[ln.label] = loc
        elif ln.op == "DB":
            loc += 1
            watermark = max(watermark, loc)
        else:
            loc += 1 if OPCODES[ln.op][1] == 0 else 2
            watermark = max(watermark, loc)

    if watermark > MEMORY_SIZE:
        diagnostics.append(
            Diagnostic("error", 1, 1, f"image of {watermark} bytes exceeds {MEMORY_SIZE}")
        )

    # pass 2: emit
    image: list[tuple[int, int]] = []
    loc = 0

    def resolve(tok: Token, what: str) -> int | None:
        if tok.category is TokenCategory.NUMBER:
            value = _parse_number(tok.lexeme)
        else:
            if tok.lexeme not in symbols:
                diagnostics.append(
                    Diagnostic("error", tok.line, tok.column, f"unresolved label {tok.lexeme}")
                )
                return None
            value = symbols[tok.lexeme]
        if not 0 <= value <= 0xFF:
            diagnostics.append(
                Diagnostic("error", tok.line, tok.column, f"{what} {value} does not fit in a byte")
            )
            return None
        return value

    for ln in lines:
        if ln.op is None:
            continue
        if ln.op == "ORG":
            target = _parse_number(ln.operand.lexeme)
            if target < MEMORY_SIZE and target >= loc:
                loc = target
        elif ln.op == "DB":
            value = resolve(ln.operand, "byte value")
            if value is not None:
                image.append((loc, value))
            loc += 1
        else:
            opcode, arity = OPCODES[ln.op]
            image.append((loc, opcode))
            loc += 1
            if arity:
                value = resolve(ln.operand, "operand")
                if value is not None:
                    image.append((loc, value))
                loc += 1

    errors = [d for d in diagnostics if d.severity == "error"]
    if errors:
        return CompileOutput((), 0, tuple(diagnostics), False)
    return CompileOutput(tuple(image), start_address or 0, tuple(diagnostics), True)


class TinyVnAssembler(CompilerPlugin):
    """Assembler plug-in for the TinyVN instruction set."""

    metadata = PluginMetadata("tinyvn-asm", PluginKind.COMPILER, "TinyVN assembler", "1.0")

    def lex(self, source: str) -> list[Token]:
        return tinyvn_lex(source)

    def _compile(self, source: str) -> CompileOutput:
        return tinyvn_assemble(source)
