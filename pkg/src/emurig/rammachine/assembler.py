"""RAM assembly: one instruction per line, label support, mode checking.

Operand forms: `=n` constant, `n` register index, `*n` indirect register
index; JMP/JZ take a label or a plain instruction index.  The start
address is the label `start` when defined, otherwise 0.
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
from emurig.rammachine.isa import JUMP_OPS, Mode, Op, TARGET_OPS, VALUE_OPS, encode

MAX_PROGRAM = 65536

_TOKEN_RE = re.compile(
    r"""
    (?P<comment>;[^\n]*)
  | (?P<newline>\r?\n)
  | (?P<hspace>[^\S\n\r]+)
  | (?P<number>-?(?:0[xX][0-9a-fA-F]+|\d+))
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<sep>[:=*])
    """,
    re.VERBOSE,
)

_OP_NAMES = {op.name for op in Op}


def ram_lex(source: str) -> list[Token]:
    tokens: list[Token] = []
    pos = 0
    line = 1
    column = 1
    offset = 0

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
        elif kind == "sep":
            emit(TokenCategory.SEPARATOR, text)
        else:
            if text.upper() in _OP_NAMES:
                emit(TokenCategory.KEYWORD, text)
            else:
                emit(TokenCategory.LABEL, text)
        pos = m.end()
    return tokens


@dataclass
class RamLine:
    label: str | None
    op: Op | None
    mode: Mode
    operand: int | None
    operand_label: str | None
    line: int
    column: int


def _parse_number(text: str) -> int:
    negative = text.startswith("-")
    body = text[1:] if negative else text
    value = int(body, 16) if body.lower().startswith("0x") else int(body)
    return -value if negative else value


def ram_parse(tokens: list[Token]) -> tuple[list[RamLine], list[Diagnostic]]:
    lines: list[RamLine] = []
    diagnostics: list[Diagnostic] = []
    seen_labels: set[str] = set()

    by_line: dict[int, list[Token]] = {}
    for tok in tokens:
        if tok.category in (TokenCategory.WHITESPACE, TokenCategory.COMMENT):
            continue
        by_line.setdefault(tok.line, []).append(tok)

    def error(tok: Token, message: str) -> None:
        diagnostics.append(Diagnostic("error", tok.line, tok.column, message))

    for line_no in sorted(by_line):
        toks = by_line[line_no]
        bad = next((t for t in toks if t.category is TokenCategory.ERROR), None)
        if bad is not None:
            error(bad, f"unexpected character {bad.lexeme!r}")
            continue

        label = None
        i = 0
        if (
            len(toks) >= 2
            and toks[0].category is TokenCategory.LABEL
            and toks[1].category is TokenCategory.SEPARATOR
            and toks[1].lexeme == ":"
        ):
            label = toks[0].lexeme
            if label in seen_labels:
                error(toks[0], f"duplicate label {label!r}")
            seen_labels.add(label)
            i = 2

        if i == len(toks):
            lines.append(RamLine(label, None, Mode.NONE, None, None, line_no, 1))
            continue

        head = toks[i]
        if head.category is not TokenCategory.KEYWORD:
            error(head, f"unknown operation {head.lexeme!r}")
            continue
        op = Op[head.lexeme.upper()]
        i += 1
        rest = toks[i:]

        if op is Op.HALT:
            if rest:
                error(rest[0], "HALT takes no operand")
                continue
            lines.append(RamLine(label, op, Mode.NONE, 0, None, head.line, head.column))
            continue

        if not rest:
            error(head, f"{op.name} takes an operand")
            continue

        mode = Mode.DIRECT
        operand_tok = rest[0]
        consumed = 1
        if operand_tok.category is TokenCategory.SEPARATOR and operand_tok.lexeme in ("=", "*"):
            mode = Mode.CONSTANT if operand_tok.lexeme == "=" else Mode.INDIRECT
            if len(rest) < 2:
                error(operand_tok, f"{op.name} {operand_tok.lexeme}: missing number")
                continue
            operand_tok = rest[1]
            consumed = 2
        if len(rest) > consumed:
            extra = rest[consumed]
            error(extra, f"unexpected {extra.lexeme!r} after operand")
            continue

        operand: int | None = None
        operand_label: str | None = None

        if op in JUMP_OPS:
            if mode is not Mode.DIRECT:
                error(rest[0], f"{op.name} takes a label or instruction index")
                continue
            mode = Mode.NONE
            if operand_tok.category is TokenCategory.LABEL:
                operand_label = operand_tok.lexeme
            elif operand_tok.category is TokenCategory.NUMBER:
                operand = _parse_number(operand_tok.lexeme)
                if operand < 0:
                    error(operand_tok, "jump target cannot be negative")
                    continue
            else:
                error(operand_tok, f"bad jump target {operand_tok.lexeme!r}")
                continue
        else:
            if operand_tok.category is not TokenCategory.NUMBER:
                error(operand_tok, f"bad operand {operand_tok.lexeme!r}")
                continue
            operand = _parse_number(operand_tok.lexeme)
            if mode is Mode.CONSTANT:
                if op in TARGET_OPS:
                    error(rest[0], f"{op.name} needs a register operand, not a constant")
                    continue
                if not -(1 << 31) <= operand < (1 << 31):
                    error(operand_tok, f"constant {operand} does not fit in 32 bits")
                    continue
            else:
                if op not in VALUE_OPS and op not in TARGET_OPS:
                    error(operand_tok, f"{op.name} cannot take this operand")
                    continue
                if operand < 0:
                    error(operand_tok, "register index cannot be negative")
                    continue
                if operand >= (1 << 31):
                    error(operand_tok, f"register index {operand} too large")
                    continue

        lines.append(RamLine(label, op, mode, operand, operand_label, head.line, head.column))

    return lines, diagnostics


def ram_assemble(source: str) -> CompileOutput:
    tokens = ram_lex(source)
    lines, diagnostics = ram_parse(tokens)
    if diagnostics:
        return CompileOutput((), 0, tuple(diagnostics), False)

    # pass 1: instruction indices
    symbols: dict[str, int] = {}
    index = 0
    for ln in lines:
        if ln.label is not None:
            symbols[ln.label] = index
        if ln.op is not None:
            index += 1
    if index > MAX_PROGRAM:
        diagnostics.append(Diagnostic("error", 1, 1, f"program of {index} instructions exceeds {MAX_PROGRAM}"))

    # pass 2: encode
    image: list[tuple[int, int]] = []
    index = 0
    for ln in lines:
        if ln.op is None:
            continue
        operand = ln.operand
        if ln.operand_label is not None:
            if ln.operand_label not in symbols:
                diagnostics.append(
                    Diagnostic("error", ln.line, ln.column, f"unresolved label {ln.operand_label}")
                )
                index += 1
                continue
            operand = symbols[ln.operand_label]
        image.append((index, encode(ln.op, ln.mode, operand or 0)))
        index += 1

    errors = [d for d in diagnostics if d.severity == "error"]
    if errors:
        return CompileOutput((), 0, tuple(diagnostics), False)
    return CompileOutput(tuple(image), symbols.get("start", 0), tuple(diagnostics), True)


class RamAssembler(CompilerPlugin):
    metadata = PluginMetadata("ram-asm", PluginKind.COMPILER, "RAM assembler", "1.0")

    def lex(self, source: str) -> list[Token]:
        return ram_lex(source)

    def _compile(self, source: str) -> CompileOutput:
        return ram_assemble(source)
