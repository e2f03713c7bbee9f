/**
 * Wire protocol types for the emurig control service, plus the button
 * enablement table the whole UI hangs off.
 */

export type RunState = "breakpoint" | "running" | "stopped";

export type Button = "reset" | "step" | "execute" | "pause" | "stop";

export const ALL_BUTTONS: readonly Button[] = ["reset", "step", "execute", "pause", "stop"];

// Mirrors the machine transition table exactly: a button is enabled iff
// the command is legal in that state.
export const ENABLED_BUTTONS: Record<RunState, ReadonlySet<Button>> = {
  breakpoint: new Set<Button>(["step", "execute", "stop", "reset"]),
  running: new Set<Button>(["pause", "stop", "reset"]),
  stopped: new Set<Button>(["reset"]),
};

export type TokenCategory =
  | "keyword"
  | "number"
  | "label"
  | "separator"
  | "comment"
  | "whitespace"
  | "directive"
  | "error";

export interface WireToken {
  category: TokenCategory;
  lexeme: string;
  line: number;    // 1-based
  column: number;  // 1-based
  offset: number;  // byte offset into the source
}

export interface WireDiagnostic {
  severity: string;
  line: number;
  column: number;
  message: string;
}

export interface WireRegister {
  name: string;
  value: number;
  width: number | null;
}

export interface HelloMessage {
  t: "hello";
  version: number;
  config: string;
  req?: number;
}

export interface StateReply {
  t: "state";
  state: RunState;
  req?: number;
}

export interface StatusReply {
  t: "status";
  state: RunState;
  pc: number;
  registers: WireRegister[];
  flags: [string, boolean][];
  breakpoints: number[];
  req?: number;
}

export interface MemReply {
  t: "mem";
  values: number[];
  req?: number;
}

export interface TokensReply {
  t: "tokens";
  tokens: WireToken[];
  req?: number;
}

export interface DiagReply {
  t: "diag";
  success: boolean;
  diagnostics: WireDiagnostic[];
  start: number;
  size: number;
  req?: number;
}

export interface ConfigsReply {
  t: "configs";
  names: string[];
  req?: number;
}

export interface ErrorReply {
  t: "error";
  code: string;
  msg: string;
  req?: number;
}

export interface StateEvent {
  t: "event";
  kind: "state";
  old: RunState;
  new: RunState;
  reason: string;
}

export interface DevOutEvent {
  t: "event";
  kind: "dev_out";
  dev: string;
  value: number;
}

export interface MemWriteEvent {
  t: "event";
  kind: "mem_write";
  mem: string;
  addr: number;
  count: number;
}

export interface HaltedEvent {
  t: "event";
  kind: "halted";
  pc: number;
}

export interface BreakpointEvent {
  t: "event";
  kind: "breakpoint";
  addr: number;
}

export type EventMessage =
  | StateEvent
  | DevOutEvent
  | MemWriteEvent
  | HaltedEvent
  | BreakpointEvent;

export type ServerMessage =
  | HelloMessage
  | StateReply
  | StatusReply
  | MemReply
  | TokensReply
  | DiagReply
  | ConfigsReply
  | ErrorReply
  | EventMessage;

export type ClientRequest =
  | { t: "cmd"; cmd: Button }
  | { t: "compile"; source: string }
  | { t: "mem_read"; mem: string; addr: number; count: number }
  | { t: "mem_write"; mem: string; addr: number; values: number[] }
  | { t: "tokens"; source: string }
  | { t: "bp"; op: "add" | "remove"; addr: number }
  | { t: "dev_in"; dev: string; values: number[] }
  | { t: "status" }
  | { t: "configs" }
  | { t: "select_config"; name: string };
