/** Wire protocol: newline-delimited JSON messages, both directions. */

export type GestureSpelling =
  | "digit_0" | "digit_1" | "digit_2" | "digit_3" | "digit_4" | "digit_5"
  | "left" | "right" | "pic" | "ok";

export interface PairFrame {
  frame_index: number;
  left: GestureSpelling | null;
  right: GestureSpelling | null;
  confidence: number;
}

export interface Message {
  type: string;
  session_id?: string | null;
  frame_index?: number | null;
  payload?: any;
}

export interface DebouncePayload {
  run_length: number;
  threshold: number;
  candidate: string | null;
}

export interface StateUpdatePayload {
  fsm_state: string;
  mission_time_s?: number;
  debounce: DebouncePayload;
  observation?: {
    left: string | null;
    right: string | null;
    token: string | null;
    confidence: number;
  };
  event?: string;
  robot?: RobotPayload;
}

export interface RobotPayload {
  mode: string;
  mission_time_s: number;
  position: [number, number, number];
  parameters: Record<string, { name: string; value: number; index: number }>;
  snapshot_until_s: number | null;
  snapshot_next_due_s: number | null;
}

export interface InstructionPayload {
  type: string;
  task?: string;
  duration_s?: number | null;
  program_id?: number;
  param_id?: number;
  direction?: string;
}

export function encodeMessage(msg: Message): string {
  return JSON.stringify(msg) + "\n";
}

export function decodeLines(buffer: string): { messages: Message[]; rest: string } {
  const parts = buffer.split("\n");
  const rest = parts.pop() ?? "";
  const messages: Message[] = [];
  for (const line of parts) {
    const trimmed = line.trim();
    if (!trimmed) continue;
    messages.push(JSON.parse(trimmed) as Message);
  }
  return { messages, rest };
}

/** Default gesture pairs for the sentinel and body tokens (mirrors the
 * service's default vocabulary; overridable via config upload). */
export const TOKEN_PAIRS: Record<string, [GestureSpelling, GestureSpelling]> = {
  stop: ["digit_0", "digit_0"],
  contd: ["ok", "ok"],
  go: ["digit_5", "digit_5"],
  hover: ["digit_5", "digit_0"],
  follow: ["digit_5", "digit_1"],
  move_left: ["left", "left"],
  move_right: ["right", "right"],
  move_up: ["left", "right"],
  move_down: ["right", "left"],
  execute: ["digit_1", "digit_0"],
  update: ["digit_2", "digit_2"],
  snapshot: ["pic", "pic"],
  digit_0: ["ok", "digit_0"],
  digit_1: ["ok", "digit_1"],
  digit_2: ["ok", "digit_2"],
  digit_3: ["ok", "digit_3"],
  digit_4: ["ok", "digit_4"],
  digit_5: ["ok", "digit_5"],
  decrease: ["ok", "left"],
  increase: ["ok", "right"],
};
