/** Console state and the pure reducer that folds inbound messages into it.
 *
 * Every rendered value originates from a received message; the reducer never
 * invents state, so replaying a recorded message log reproduces exactly what
 * a live session displayed.
 */

import type {
  GestureSpelling,
  InstructionPayload,
  Message,
  RobotPayload,
  StateUpdatePayload,
} from "./protocol.js";

export interface InstructionEntry {
  frameIndex: number;
  instruction: InstructionPayload;
}

export interface ConsoleState {
  sessionId: string | null;
  connected: boolean;
  selectedLeft: GestureSpelling;
  selectedRight: GestureSpelling;
  holding: boolean;
  fsmState: string;
  debounceRunLength: number;
  debounceThreshold: number;
  debounceCandidate: string | null;
  missionTime: number;
  lastObservedToken: string | null;
  instructionHistory: InstructionEntry[];
  committedTokens: string[];
  robot: RobotPayload | null;
  positionTrace: Array<[number, number]>;
  lastError: string | null;
  metrics: Record<string, unknown> | null;
}

export function initialState(): ConsoleState {
  return {
    sessionId: null,
    connected: false,
    selectedLeft: "digit_0",
    selectedRight: "digit_0",
    holding: false,
    fsmState: "idle",
    debounceRunLength: 0,
    debounceThreshold: 15,
    debounceCandidate: null,
    missionTime: 0,
    lastObservedToken: null,
    instructionHistory: [],
    committedTokens: [],
    robot: null,
    positionTrace: [],
    lastError: null,
    metrics: null,
  };
}

export function debounceProgress(state: ConsoleState): number {
  if (state.debounceThreshold <= 0) return 0;
  return state.debounceRunLength / state.debounceThreshold;
}

/** Fold one inbound message; returns a new state (input is not mutated). */
export function applyMessage(state: ConsoleState, msg: Message): ConsoleState {
  const next: ConsoleState = {
    ...state,
    instructionHistory: state.instructionHistory,
    committedTokens: state.committedTokens,
    positionTrace: state.positionTrace,
  };
  switch (msg.type) {
    case "hello":
      return next;
    case "state_update": {
      const payload = msg.payload as StateUpdatePayload;
      if (msg.session_id && !next.sessionId) next.sessionId = msg.session_id;
      next.fsmState = payload.fsm_state;
      next.debounceRunLength = payload.debounce.run_length;
      next.debounceThreshold = payload.debounce.threshold;
      next.debounceCandidate = payload.debounce.candidate;
      if (payload.mission_time_s !== undefined) next.missionTime = payload.mission_time_s;
      if (payload.observation) next.lastObservedToken = payload.observation.token;
      if (payload.robot) next.robot = payload.robot;
      return next;
    }
    case "token_committed":
      next.committedTokens = [...state.committedTokens, String(msg.payload.token)];
      return next;
    case "instruction_emitted":
      next.instructionHistory = [
        ...state.instructionHistory,
        {
          frameIndex: msg.frame_index ?? -1,
          instruction: msg.payload.instruction as InstructionPayload,
        },
      ];
      return next;
    case "robot_state": {
      const robot = msg.payload as RobotPayload;
      next.robot = robot;
      next.missionTime = robot.mission_time_s;
      const [x, y] = robot.position;
      const trace = [...state.positionTrace, [x, y] as [number, number]];
      next.positionTrace = trace.slice(-200);
      return next;
    }
    case "metrics":
      next.metrics = msg.payload;
      return next;
    case "error":
      next.lastError = `${msg.payload.error}: ${JSON.stringify(msg.payload.detail ?? "")}`;
      return next;
    default:
      // Unknown message types surface in the error banner; never dropped silently.
      next.lastError = `unhandled message type: ${msg.type}`;
      return next;
  }
}

export function replayLog(messages: Message[]): ConsoleState {
  let state = initialState();
  for (const msg of messages) state = applyMessage(state, msg);
  return state;
}

export function describeInstruction(ins: InstructionPayload): string {
  switch (ins.type) {
    case "task_switch":
      return `task ${ins.task}${ins.duration_s != null ? ` for ${ins.duration_s}s` : ""}`;
    case "execute_program":
      return `execute program ${ins.program_id}`;
    case "param_update":
      return `param ${ins.param_id} ${ins.direction}`;
    case "snapshot":
      return `snapshots${ins.duration_s != null ? ` for ${ins.duration_s}s` : " until stopped"}`;
    default:
      return JSON.stringify(ins);
  }
}
