/**
 * Highlight fidelity: what the editor paints is exactly what the server's
 * lexer said, span for span.
 */

import { afterAll, beforeAll, expect, it } from "vitest";
import { WebSocket } from "ws";

import { DebuggerClient, SocketLike } from "../src/connection.js";
import { TokensReply } from "../src/protocol.js";
import { categoryClass, highlightHtml, spansFromTokens } from "../src/store.js";
import { Service, startService, stopService } from "./service-helper.js";

const FIXTURE = "loop: LDI 0x10 ; spin\n  JZ loop\nHALT\n";

// hand-derived from the assembly grammar, not from the server
const EXPECTED_CATEGORIES = [
  "label",      // loop
  "separator",  // :
  "whitespace", // " "
  "keyword",    // LDI
  "whitespace",
  "number",     // 0x10
  "whitespace",
  "comment",    // ; spin
  "whitespace", // \n
  "whitespace", // "  "
  "keyword",    // JZ
  "whitespace",
  "label",      // loop
  "whitespace", // \n
  "keyword",    // HALT
  "whitespace", // \n
];

let service: Service;
let client: DebuggerClient;

beforeAll(async () => {
  service = await startService();
  const socket = new WebSocket(service.url);
  client = new DebuggerClient(socket as unknown as SocketLike);
  await client.ready();
});

afterAll(() => {
  client?.close();
  if (service) stopService(service);
});

it("editor spans mirror the server token stream one-for-one", async () => {
  const reply = await client.request({ t: "tokens", source: FIXTURE });
  expect(reply.t).toBe("tokens");
  const tokens = (reply as TokensReply).tokens;

  const spans = spansFromTokens(tokens);
  expect(spans.length).toBe(tokens.length);
  expect(spans.map((s) => s.category)).toEqual(tokens.map((t) => t.category));
  expect(spans.map((s) => s.lexeme)).toEqual(tokens.map((t) => t.lexeme));
});

it("the fixture lexes to the grammar-derived categories", async () => {
  const reply = await client.request({ t: "tokens", source: FIXTURE });
  const tokens = (reply as TokensReply).tokens;
  expect(tokens.map((t) => t.category)).toEqual(EXPECTED_CATEGORIES);
});

it("concatenated span lexemes reproduce the source byte-exactly", async () => {
  const reply = await client.request({ t: "tokens", source: FIXTURE });
  const spans = spansFromTokens((reply as TokensReply).tokens);
  expect(spans.map((s) => s.lexeme).join("")).toBe(FIXTURE);
});

it("every span gets a category-derived css class in the rendered html", async () => {
  const reply = await client.request({ t: "tokens", source: FIXTURE });
  const spans = spansFromTokens((reply as TokensReply).tokens);
  const html = highlightHtml(spans);

  const classes = [...html.matchAll(/class="([^"]+)"/g)].map((m) => m[1]);
  expect(classes).toEqual(spans.map((s) => categoryClass(s.category)));
  for (const cls of classes) {
    expect(cls.startsWith("tok-")).toBe(true);
  }
});

it("error characters surface as error spans, still byte-exact", async () => {
  const source = "LDI 5\n@@ junk\nHALT\n";
  const reply = await client.request({ t: "tokens", source });
  const tokens = (reply as TokensReply).tokens;
  const spans = spansFromTokens(tokens);

  expect(spans.some((s) => s.category === "error")).toBe(true);
  expect(spans.map((s) => s.lexeme).join("")).toBe(source);
});
