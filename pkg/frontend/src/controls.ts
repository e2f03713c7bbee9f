/**
 * Guarded command issue: the UI never sends a request the current state
 * makes illegal, so a misclick cannot surface a server error.
 */

import { DebuggerClient } from "./connection.js";
import { Button, ServerMessage } from "./protocol.js";
import { enabledButtons, SessionState } from "./store.js";

/**
 * Send a machine command if the button is enabled for the current state.
 * Returns null when the guard blocked it.
 */
export function issueCommand(
  client: DebuggerClient,
  session: SessionState,
  button: Button,
): Promise<ServerMessage> | null {
  if (!enabledButtons(session).has(button)) return null;
  return client.request({ t: "cmd", cmd: button });
}

/**
 * Write one memory cell, unless the machine is running: edits while the CPU
 * owns memory would race the instruction stream, so the guard drops them.
 */
export function submitMemoryEdit(
  client: DebuggerClient,
  session: SessionState,
  memory: string,
  addr: number,
  value: number,
): Promise<ServerMessage> | null {
  if (!session.connected || session.runState === "running") return null;
  return client.request({ t: "mem_write", mem: memory, addr, values: [value] });
}
