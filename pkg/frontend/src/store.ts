/**
 * UI session state and the reducer that folds server messages into it.
 *
 * The store is the single source of truth for rendering. It changes only
 * in response to messages from the service; button clicks and edits go
 * out as requests and come back as state/status/event messages.
 */

import {
  Button,
  ENABLED_BUTTONS,
  EventMessage,
  RunState,
  ServerMessage,
  StatusReply,
  WireDiagnostic,
  WireToken,
} from "./protocol.js";

export type TerminalItem =
  | { kind: "text"; text: string }
  | { kind: "chip"; hex: string };

export interface SessionState {
  connected: boolean;
  configName: string | null;
  runState: RunState | null;
  status: StatusReply | null;
  breakpoints: Set<number>;
  diagnostics: WireDiagnostic[];
  compileOk: boolean | null;
  transcript: TerminalItem[];
  memBase: number;
  memPageSize: number;
  memory: number[] | null;
  changedCells: Set<number>; // absolute addresses changed in the last refresh
  memoryDirty: boolean;      // a mem_write event arrived since the last read
}

export function createSession(): SessionState {
  return {
    connected: false,
    configName: null,
    runState: null,
    status: null,
    breakpoints: new Set(),
    diagnostics: [],
    compileOk: null,
    transcript: [],
    memBase: 0,
    memPageSize: 256,
    memory: null,
    changedCells: new Set(),
    memoryDirty: false,
  };
}

const PRINTABLE_MIN = 0x20;
const PRINTABLE_MAX = 0x7e;

/** Fold one device output value into the transcript. */
export function appendTerminal(transcript: TerminalItem[], value: number): void {
  const printable =
    (value >= PRINTABLE_MIN && value <= PRINTABLE_MAX) || value === 0x0a;
  if (printable) {
    const last = transcript[transcript.length - 1];
    const ch = String.fromCharCode(value);
    if (last && last.kind === "text") {
      last.text += ch;
    } else {
      transcript.push({ kind: "text", text: ch });
    }
  } else {
    const hex = value.toString(16).toUpperCase().padStart(2, "0");
    transcript.push({ kind: "chip", hex });
  }
}

function applyEvent(state: SessionState, event: EventMessage): void {
  switch (event.kind) {
    case "state":
      state.runState = event.new;
      break;
    case "dev_out":
      appendTerminal(state.transcript, event.value);
      break;
    case "mem_write":
      state.memoryDirty = true;
      break;
    case "halted":
    case "breakpoint":
      // the matching state event carries the run-state change
      break;
  }
}

/** Fold any server message into the session. */
export function applyServer(state: SessionState, msg: ServerMessage): void {
  switch (msg.t) {
    case "hello":
      state.connected = true;
      state.configName = msg.config;
      // new machine: forget everything tied to the old one
      state.runState = null;
      state.status = null;
      state.breakpoints = new Set();
      state.transcript = [];
      state.memory = null;
      state.memBase = 0;
      state.changedCells = new Set();
      state.memoryDirty = false;
      state.diagnostics = [];
      state.compileOk = null;
      break;
    case "state":
      state.runState = msg.state;
      break;
    case "status":
      state.runState = msg.state;
      state.status = msg;
      state.breakpoints = new Set(msg.breakpoints);
      break;
    case "diag":
      state.compileOk = msg.success;
      state.diagnostics = msg.diagnostics;
      break;
    case "event":
      applyEvent(state, msg);
      break;
    case "mem":
    case "tokens":
    case "configs":
    case "error":
      // handled by the requester with the richer context it has
      break;
  }
}

export function markDisconnected(state: SessionState): void {
  state.connected = false;
}

/** The enablement rule: strictly the legal-command set for the state. */
export function enabledButtons(state: SessionState): Set<Button> {
  if (!state.connected || state.runState === null) {
    return new Set();
  }
  return new Set(ENABLED_BUTTONS[state.runState]);
}

/** Record a viewport read; remembers which visible cells changed. */
export function applyMemoryRead(
  state: SessionState,
  base: number,
  values: number[],
): void {
  const changed = new Set<number>();
  if (state.memory !== null && base === state.memBase) {
    for (let i = 0; i < values.length; i++) {
      if (state.memory[i] !== values[i]) {
        changed.add(base + i);
      }
    }
  }
  state.memBase = base;
  state.memory = values;
  state.changedCells = changed;
  state.memoryDirty = false;
}

export function pageNext(state: SessionState, memorySize: number): number {
  const maxBase = Math.max(0, memorySize - state.memPageSize);
  return Math.min(state.memBase + state.memPageSize, maxBase);
}

export function pagePrev(state: SessionState): number {
  return Math.max(0, state.memBase - state.memPageSize);
}

export interface HighlightSpan {
  category: WireToken["category"];
  lexeme: string;
  offset: number;
}

/** One span per token, in stream order; nothing merged, nothing dropped. */
export function spansFromTokens(tokens: WireToken[]): HighlightSpan[] {
  return tokens.map((t) => ({
    category: t.category,
    lexeme: t.lexeme,
    offset: t.offset,
  }));
}

export function categoryClass(category: WireToken["category"]): string {
  return `tok-${category}`;
}

export function parseNumeral(lexeme: string): number {
  return lexeme.toLowerCase().startsWith("0x")
    ? parseInt(lexeme.slice(2), 16)
    : parseInt(lexeme, 10);
}

/**
 * Map source line -> first emitted address, from the token stream alone.
 *
 * Mirrors the assembler's sizing (one-byte halt, two bytes otherwise,
 * one byte per data directive, org moves the counter) so gutter clicks
 * land on the right cell. A convenience estimate, not used for anything
 * the compiler itself reports.
 */
export function lineAddressMap(tokens: WireToken[]): Map<number, number> {
  const map = new Map<number, number>();
  let counter = 0;
  for (let i = 0; i < tokens.length; i++) {
    const tok = tokens[i];
    if (tok.category === "keyword") {
      if (!map.has(tok.line)) map.set(tok.line, counter);
      counter += tok.lexeme.toUpperCase() === "HALT" ? 1 : 2;
    } else if (tok.category === "directive") {
      let operand: number | null = null;
      for (let j = i + 1; j < tokens.length && tokens[j].line === tok.line; j++) {
        if (tokens[j].category === "number") {
          operand = parseNumeral(tokens[j].lexeme);
          break;
        }
      }
      if (tok.lexeme.toUpperCase() === "ORG") {
        if (operand !== null && operand > counter) counter = operand;
      } else {
        if (!map.has(tok.line)) map.set(tok.line, counter);
        counter += 1;
      }
    }
  }
  return map;
}

const HTML_ESCAPES: Record<string, string> = {
  "&": "&amp;",
  "<": "&lt;",
  ">": "&gt;",
  '"': "&quot;",
};

export function escapeHtml(text: string): string {
  return text.replace(/[&<>"]/g, (ch) => HTML_ESCAPES[ch]);
}

/** Render the editor overlay as HTML spans, one per token. */
export function highlightHtml(spans: HighlightSpan[]): string {
  return spans
    .map((s) => `<span class="${categoryClass(s.category)}">${escapeHtml(s.lexeme)}</span>`)
    .join("");
}
