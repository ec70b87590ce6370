/** Interactive gesture console.
 *
 * Keys:
 *   tab        switch the hand being set (left/right)
 *   0..5       set the active hand to that digit gesture
 *   l r p o    set the active hand to left / right / pic / ok
 *   space      toggle hold (frames stream at 15 fps while held)
 *   m          request a metrics report
 *   q, ctrl-c  quit
 *
 * Usage: node dist/src/main.js [host] [port]
 */

import process from "node:process";

import { ServiceClient } from "./client.js";
import { FrameEmitter, FRAME_PERIOD_MS } from "./emitter.js";
import { renderScreen } from "./panels.js";
import type { GestureSpelling, Message } from "./protocol.js";
import { applyMessage, initialState, type ConsoleState } from "./state.js";

const GESTURE_KEYS: Record<string, GestureSpelling> = {
  "0": "digit_0", "1": "digit_1", "2": "digit_2",
  "3": "digit_3", "4": "digit_4", "5": "digit_5",
  l: "left", r: "right", p: "pic", o: "ok",
};

async function main(): Promise<void> {
  const host = process.argv[2] ?? "127.0.0.1";
  const port = Number(process.argv[3] ?? 7787);
  const client = new ServiceClient(host, port);

  let state: ConsoleState = initialState();
  let activeHand: "left" | "right" = "left";
  let emitter: FrameEmitter | null = null;

  const redraw = () => {
    process.stdout.write("\x1b[2J\x1b[H" + renderScreen(state) + "\n");
  };

  client.on("message", (msg: Message) => {
    state = applyMessage(state, msg);
    state.connected = client.connected;
    redraw();
  });
  client.on("disconnected", () => {
    state = { ...state, connected: false };
    redraw();
  });

  await client.connect();
  state.connected = true;
  const created = await client.request(
    { type: "create_session", payload: { classifier: "none" } },
  );
  const sessionId = created[0].session_id as string;
  state = applyMessage(state, created[0]);
  state.connected = true;

  emitter = new FrameEmitter(sessionId, (msg) => client.send(msg));

  let last = Date.now();
  const ticker = setInterval(() => {
    const now = Date.now();
    emitter!.advance(now - last);
    last = now;
  }, FRAME_PERIOD_MS / 2);

  process.stdin.setRawMode?.(true);
  process.stdin.resume();
  process.stdin.on("data", (key: Buffer) => {
    const ch = key.toString("utf-8");
    if (ch === "q" || ch === "") {
      clearInterval(ticker);
      client.close();
      process.stdin.setRawMode?.(false);
      process.exit(0);
    } else if (ch === "\t") {
      activeHand = activeHand === "left" ? "right" : "left";
    } else if (ch === " ") {
      emitter!.holding = !emitter!.holding;
      state = { ...state, holding: emitter!.holding };
    } else if (ch === "m") {
      client.send({
        type: "metrics",
        session_id: sessionId,
        payload: { expected_instructions: null },
      });
    } else if (GESTURE_KEYS[ch]) {
      emitter!.selection = { ...emitter!.selection, [activeHand]: GESTURE_KEYS[ch] };
      state = {
        ...state,
        selectedLeft: emitter!.selection.left,
        selectedRight: emitter!.selection.right,
      };
    }
    redraw();
  });

  redraw();
}

main().catch((err) => {
  console.error("console failed:", err.message);
  process.exit(1);
});
