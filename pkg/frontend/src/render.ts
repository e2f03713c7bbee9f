/**
 * DOM rendering. Every function here is a pure projection of SessionState
 * onto elements; none of them mutate the store or talk to the server.
 * main.ts wires the event handlers they expose.
 */

import { ALL_BUTTONS, Button } from "./protocol.js";
import {
  enabledButtons,
  highlightHtml,
  HighlightSpan,
  SessionState,
  TerminalItem,
} from "./store.js";

export const MEM_COLS = 16;
export const MEM_ROWS = 16;

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function hex(value: number, width: number): string {
  const digits = Math.max(2, Math.ceil(width / 4));
  return "0x" + (value >>> 0).toString(16).toUpperCase().padStart(digits, "0");
}

export function renderStateBadge(target: HTMLElement, session: SessionState): void {
  target.textContent = session.connected
    ? (session.runState ?? "connecting")
    : "disconnected";
  target.className = "state-badge " + (session.connected
    ? `state-${session.runState ?? "unknown"}`
    : "state-stale");
}

export function renderRegisters(target: HTMLElement, session: SessionState): void {
  target.replaceChildren();
  const status = session.status;
  if (!status) return;
  const table = el("table", "registers");
  for (const reg of status.registers) {
    const row = el("tr");
    row.append(
      el("td", "reg-name", reg.name),
      el("td", "reg-hex", hex(reg.value, reg.width ?? 8)),
      el("td", "reg-dec", String(reg.value)),
    );
    table.append(row);
  }
  for (const [name, value] of status.flags) {
    const row = el("tr", "flag-row");
    row.append(
      el("td", "reg-name", name),
      el("td", "reg-hex", value ? "1" : "0"),
      el("td", "reg-dec", value ? "set" : "clear"),
    );
    table.append(row);
  }
  target.append(table);
}

export interface ControlHandlers {
  onButton: (button: Button) => void;
}

export function renderControls(
  target: HTMLElement,
  session: SessionState,
  handlers: ControlHandlers,
): void {
  target.replaceChildren();
  const enabled = enabledButtons(session);
  for (const button of ALL_BUTTONS) {
    const node = el("button", "control", button);
    node.disabled = !enabled.has(button);
    node.addEventListener("click", () => handlers.onButton(button));
    target.append(node);
  }
}

export interface MemoryHandlers {
  onEdit: (addr: number, value: number) => void;
  onPageNext: () => void;
  onPagePrev: () => void;
}

/**
 * 16x16 grid of the current page. Cells are contenteditable unless the
 * machine is running; a cell touched since the last read gets .cell-changed.
 */
export function renderMemory(
  target: HTMLElement,
  session: SessionState,
  handlers: MemoryHandlers,
): void {
  target.replaceChildren();
  const bar = el("div", "mem-bar");
  const prev = el("button", "mem-page", "◀");
  const next = el("button", "mem-page", "▶");
  prev.addEventListener("click", handlers.onPagePrev);
  next.addEventListener("click", handlers.onPageNext);
  const label = el(
    "span",
    "mem-base",
    hex(session.memBase, 16) + (session.memoryDirty ? " *" : ""),
  );
  bar.append(prev, label, next);
  target.append(bar);

  const editable = session.connected && session.runState !== "running";
  const page = session.memory ?? [];
  const grid = el("table", "mem-grid");
  for (let row = 0; row < MEM_ROWS; row++) {
    const tr = el("tr");
    const addr0 = session.memBase + row * MEM_COLS;
    tr.append(el("th", "mem-addr", hex(addr0, 16)));
    for (let col = 0; col < MEM_COLS; col++) {
      const addr = addr0 + col;
      const value = page[row * MEM_COLS + col] as number | undefined;
      const td = el(
        "td",
        session.changedCells.has(addr) ? "mem-cell cell-changed" : "mem-cell",
        value === undefined ? "--" : value.toString(16).toUpperCase().padStart(2, "0"),
      );
      if (editable && value !== undefined) {
        td.contentEditable = "true";
        td.addEventListener("blur", () => {
          const parsed = parseInt(td.textContent ?? "", 16);
          if (!Number.isNaN(parsed) && parsed !== value) {
            handlers.onEdit(addr, parsed);
          } else {
            td.textContent = value.toString(16).toUpperCase().padStart(2, "0");
          }
        });
      }
      tr.append(td);
    }
    grid.append(tr);
  }
  target.append(grid);
}

export interface SourceHandlers {
  onToggleBreakpoint: (line: number) => void;
}

/**
 * Line-number gutter beside the editor. `markedLines` carries the lines
 * whose address currently holds a breakpoint; clicking any line asks the
 * controller to toggle one there.
 */
export function renderGutter(
  target: HTMLElement,
  markedLines: ReadonlySet<number>,
  lineCount: number,
  handlers: SourceHandlers,
): void {
  target.replaceChildren();
  for (let i = 1; i <= lineCount; i++) {
    const dot = el(
      "div",
      markedLines.has(i) ? "gutter-line bp-set" : "gutter-line",
      String(i),
    );
    dot.addEventListener("click", () => handlers.onToggleBreakpoint(i));
    target.append(dot);
  }
}

/** Paint the highlight layer that sits behind the transparent textarea. */
export function renderHighlight(target: HTMLElement, spans: HighlightSpan[]): void {
  target.innerHTML = highlightHtml(spans);
}

export function renderTerminal(target: HTMLElement, items: readonly TerminalItem[]): void {
  target.replaceChildren();
  for (const item of items) {
    if (item.kind === "text") {
      target.append(el("span", "term-text", item.text));
    } else {
      target.append(el("span", "term-chip", item.hex));
    }
  }
  target.scrollTop = target.scrollHeight;
}

export interface DiagnosticHandlers {
  onSelect: (line: number) => void;
}

export function renderDiagnostics(
  target: HTMLElement,
  session: SessionState,
  handlers: DiagnosticHandlers,
): void {
  target.replaceChildren();
  for (const diag of session.diagnostics) {
    const node = el(
      "div",
      `diag diag-${diag.severity}`,
      `${diag.line}:${diag.column}: ${diag.severity}: ${diag.message}`,
    );
    node.addEventListener("click", () => handlers.onSelect(diag.line));
    target.append(node);
  }
}

export interface ConfigHandlers {
  onSelect: (name: string) => void;
}

export function renderConfigPicker(
  target: HTMLSelectElement,
  configs: readonly string[],
  current: string | null,
  handlers: ConfigHandlers,
): void {
  target.replaceChildren();
  for (const name of configs) {
    const opt = el("option", undefined, name);
    opt.value = name;
    opt.selected = name === current;
    target.append(opt);
  }
  target.onchange = () => handlers.onSelect(target.value);
  target.disabled = configs.length === 0;
}
