/**
 * Browser entry point: owns the socket, the session store, and the DOM.
 *
 * All state changes come from server messages; clicks and keystrokes only
 * send requests. The render pass is a full redraw of each panel, which is
 * plenty at this scale.
 */

import { DebuggerClient } from "./connection.js";
import {
  ConfigsReply,
  MemReply,
  ServerMessage,
  TokensReply,
  WireToken,
} from "./protocol.js";
import { issueCommand, submitMemoryEdit } from "./controls.js";
import {
  applyMemoryRead,
  applyServer,
  createSession,
  HighlightSpan,
  lineAddressMap,
  markDisconnected,
  pageNext,
  pagePrev,
  spansFromTokens,
} from "./store.js";
import {
  renderConfigPicker,
  renderControls,
  renderDiagnostics,
  renderGutter,
  renderHighlight,
  renderMemory,
  renderRegisters,
  renderStateBadge,
  renderTerminal,
} from "./render.js";

const TOKEN_DEBOUNCE_MS = 300;
const MEMORY_CANDIDATES = ["mem0", "regs0", "prog0"];
const INPUT_DEVICE_CANDIDATES = ["term0", "in0"];

function need<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function serviceUrl(): string {
  const override = new URLSearchParams(window.location.search).get("ws");
  if (override) return override;
  if (window.location.protocol.startsWith("http") && window.location.host) {
    return `ws://${window.location.host}`;
  }
  return "ws://127.0.0.1:7642";
}

function main(): void {
  const session = createSession();
  const badge = need<HTMLElement>("badge");
  const registers = need<HTMLElement>("registers");
  const controls = need<HTMLElement>("controls");
  const memoryPanel = need<HTMLElement>("memory");
  const memError = need<HTMLElement>("mem-error");
  const gutter = need<HTMLElement>("gutter");
  const highlight = need<HTMLElement>("highlight");
  const editor = need<HTMLTextAreaElement>("editor");
  const compileBtn = need<HTMLButtonElement>("compile");
  const diagnostics = need<HTMLElement>("diagnostics");
  const terminal = need<HTMLElement>("terminal");
  const terminalInput = need<HTMLInputElement>("terminal-input");
  const configPicker = need<HTMLSelectElement>("configs");

  const socket = new WebSocket(serviceUrl());
  const client = new DebuggerClient(socket);

  let tokens: WireToken[] = [];
  let spans: HighlightSpan[] = [];
  let memoryName: string | null = null;
  let inputDevice: string | null = null;
  let memorySize = 0;
  let configNames: string[] = [];

  // -- server I/O ------------------------------------------------------------

  function send(message: Parameters<DebuggerClient["request"]>[0]): Promise<ServerMessage> {
    return client.request(message);
  }

  async function refreshStatus(): Promise<void> {
    const reply = await send({ t: "status" });
    applyServer(session, reply);
    renderAll();
  }

  async function refreshMemory(): Promise<void> {
    if (!memoryName) return;
    const reply = await send({
      t: "mem_read",
      mem: memoryName,
      addr: session.memBase,
      count: session.memPageSize,
    });
    if (reply.t === "mem") {
      memError.textContent = "";
      applyMemoryRead(session, session.memBase, (reply as MemReply).values);
    } else if (reply.t === "error") {
      memError.textContent = reply.msg;
    }
    renderAll();
  }

  async function refreshTokens(): Promise<void> {
    const reply = await send({ t: "tokens", source: editor.value });
    if (reply.t !== "tokens") return;
    tokens = (reply as TokensReply).tokens;
    spans = spansFromTokens(tokens);
    renderEditor();
  }

  async function probeTargets(): Promise<void> {
    memoryName = null;
    for (const name of MEMORY_CANDIDATES) {
      const reply = await send({ t: "mem_read", mem: name, addr: 0, count: 1 });
      if (reply.t === "mem") {
        memoryName = name;
        break;
      }
    }
    memorySize = await discoverMemorySize();
    inputDevice = null;
    for (const name of INPUT_DEVICE_CANDIDATES) {
      const reply = await send({ t: "dev_in", dev: name, values: [] });
      if (reply.t !== "error") {
        inputDevice = name;
        break;
      }
    }
  }

  async function canRead(addr: number): Promise<boolean> {
    const reply = await send({ t: "mem_read", mem: memoryName!, addr, count: 1 });
    return reply.t === "mem";
  }

  /** Find the memory size by probing: doubling, then a binary search. */
  async function discoverMemorySize(): Promise<number> {
    const CAP = 1 << 30;
    if (!memoryName || !(await canRead(0))) return 0;
    let good = 0;
    let bad = 256;
    while (bad < CAP && (await canRead(bad))) {
      good = bad;
      bad *= 2;
    }
    if (bad >= CAP) return CAP; // effectively unbounded; paging never clamps
    while (good + 1 < bad) {
      const mid = (good + bad) >>> 1;
      if (await canRead(mid)) good = mid;
      else bad = mid;
    }
    return bad;
  }

  async function refreshConfigs(): Promise<void> {
    const reply = await send({ t: "configs" });
    if (reply.t === "configs") {
      configNames = (reply as ConfigsReply).names;
    }
    renderAll();
  }

  // -- handlers ---------------------------------------------------------------

  function onButton(button: Parameters<typeof issueCommand>[2]): void {
    const pending = issueCommand(client, session, button);
    if (!pending) return;
    void pending.then((reply) => {
      applyServer(session, reply);
      renderAll();
      void refreshStatus().then(() => refreshMemory());
    });
  }

  function onMemEdit(addr: number, value: number): void {
    if (!memoryName) return;
    const pending = submitMemoryEdit(client, session, memoryName, addr, value);
    if (!pending) return;
    void pending.then((reply) => {
      if (reply.t === "error") memError.textContent = reply.msg;
      void refreshMemory();
    });
  }

  function goPage(base: number): void {
    session.memBase = base;
    session.memory = null;
    void refreshMemory();
  }

  function onToggleBreakpoint(line: number): void {
    const addr = lineAddressMap(tokens).get(line);
    if (addr === undefined) return;
    const op = session.breakpoints.has(addr) ? "remove" : "add";
    void send({ t: "bp", op, addr }).then(() => refreshStatus());
  }

  function onCompile(): void {
    void send({ t: "compile", source: editor.value }).then((reply) => {
      applyServer(session, reply);
      renderAll();
      void refreshStatus().then(() => refreshMemory());
    });
  }

  function onDiagSelect(line: number): void {
    const lines = editor.value.split("\n");
    let offset = 0;
    for (let i = 0; i < line - 1 && i < lines.length; i++) {
      offset += lines[i].length + 1;
    }
    editor.focus();
    editor.setSelectionRange(offset, offset + (lines[line - 1]?.length ?? 0));
  }

  function onTerminalKey(ev: KeyboardEvent): void {
    if (!inputDevice || session.runState === "stopped") return;
    let code: number | null = null;
    if (ev.key === "Enter") code = 0x0a;
    else if (ev.key.length === 1) code = ev.key.charCodeAt(0);
    if (code === null) return;
    ev.preventDefault();
    void send({ t: "dev_in", dev: inputDevice, values: [code] });
  }

  function onSelectConfig(name: string): void {
    void send({ t: "select_config", name }).then(async (reply) => {
      applyServer(session, reply); // hello: resets machine-scoped state
      tokens = [];
      spans = [];
      renderAll();
      await probeTargets();
      await refreshStatus();
      await refreshMemory();
      void refreshTokens();
    });
  }

  // -- rendering ---------------------------------------------------------------

  function renderEditor(): void {
    renderHighlight(highlight, spans);
    const marked = new Set<number>();
    const map = lineAddressMap(tokens);
    for (const [line, addr] of map) {
      if (session.breakpoints.has(addr)) marked.add(line);
    }
    renderGutter(gutter, marked, editor.value.split("\n").length, { onToggleBreakpoint });
  }

  function renderAll(): void {
    renderStateBadge(badge, session);
    renderRegisters(registers, session);
    renderControls(controls, session, { onButton });
    renderMemory(memoryPanel, session, {
      onEdit: onMemEdit,
      onPageNext: () => goPage(pageNext(session, memorySize)),
      onPagePrev: () => goPage(pagePrev(session)),
    });
    renderDiagnostics(diagnostics, session, { onSelect: onDiagSelect });
    renderTerminal(terminal, session.transcript);
    renderConfigPicker(configPicker, configNames, session.configName, {
      onSelect: onSelectConfig,
    });
    terminalInput.disabled =
      !session.connected || session.runState === "stopped" || !inputDevice;
    compileBtn.disabled = !session.connected;
    renderEditor();
  }

  // -- wiring ------------------------------------------------------------------

  let debounceTimer: ReturnType<typeof setTimeout> | null = null;
  editor.addEventListener("input", () => {
    if (debounceTimer !== null) clearTimeout(debounceTimer);
    debounceTimer = setTimeout(() => void refreshTokens(), TOKEN_DEBOUNCE_MS);
  });
  editor.addEventListener("scroll", () => {
    highlight.scrollTop = editor.scrollTop;
    highlight.scrollLeft = editor.scrollLeft;
    gutter.scrollTop = editor.scrollTop;
  });
  compileBtn.addEventListener("click", onCompile);
  terminalInput.addEventListener("keydown", onTerminalKey);

  client.onEvent = (event) => {
    applyServer(session, event);
    if (event.kind === "state") {
      renderAll();
      void refreshStatus();
      if (event.new !== "running") void refreshMemory();
    } else if (event.kind === "dev_out") {
      renderTerminal(terminal, session.transcript);
    } else if (event.kind === "mem_write") {
      if (session.runState !== "running") void refreshMemory();
      else renderAll(); // dirty marker on the paused-view
    }
  };
  client.onClose = () => {
    markDisconnected(session);
    renderAll();
  };

  void client.ready().then(async (hello) => {
    applyServer(session, hello);
    renderAll();
    await probeTargets();
    await refreshConfigs();
    await refreshStatus();
    await refreshMemory();
    void refreshTokens();
  });

  renderAll();
}

main();
