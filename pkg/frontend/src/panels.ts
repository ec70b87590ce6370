/** ANSI terminal rendering of the console state. Pure string builders. */

import { debounceProgress, describeInstruction, type ConsoleState } from "./state.js";

const FSM_STATES = [
  "idle", "got_stop", "got_contd", "task_pending", "task_timed",
  "exec_pending", "exec_ready", "update_pending", "update_dir",
  "update_ready", "snap_pending", "snap_timed",
];

const BAR_WIDTH = 30;

export function renderProgressBar(state: ConsoleState): string {
  const frac = Math.min(debounceProgress(state), 1);
  const filled = Math.round(frac * BAR_WIDTH);
  const bar = "#".repeat(filled) + "-".repeat(BAR_WIDTH - filled);
  const pct = (frac * 100).toFixed(1);
  const candidate = state.debounceCandidate ?? "none";
  return `[${bar}] ${state.debounceRunLength}/${state.debounceThreshold} (${pct}%) ${candidate}`;
}

export function renderFsmPanel(state: ConsoleState): string {
  const current = state.fsmState.split("(")[0];
  const cells = FSM_STATES.map((name) =>
    name === current ? `>[${name.toUpperCase()}]<` : ` ${name} `,
  );
  const rows: string[] = [];
  for (let i = 0; i < cells.length; i += 4) {
    rows.push(cells.slice(i, i + 4).join("  "));
  }
  return rows.join("\n") + `\n state: ${state.fsmState}`;
}

export function renderRobotPanel(state: ConsoleState): string {
  const robot = state.robot;
  if (!robot) return "robot: (no state yet)";
  const lines = [
    `mode: ${robot.mode}   mission t=${state.missionTime.toFixed(2)}s`,
    `position: x=${robot.position[0].toFixed(2)} y=${robot.position[1].toFixed(2)} z=${robot.position[2].toFixed(2)}`,
  ];
  const params = Object.entries(robot.parameters)
    .map(([id, p]) => `${id}:${p.name}=${p.value}`)
    .join("  ");
  lines.push(`params: ${params}`);
  if (robot.snapshot_next_due_s !== null) {
    if (robot.snapshot_until_s !== null) {
      const remaining = Math.max(robot.snapshot_until_s - state.missionTime, 0);
      lines.push(`snapshots: ${remaining.toFixed(1)}s remaining`);
    } else {
      lines.push("snapshots: until further notice");
    }
  } else {
    lines.push("snapshots: none scheduled");
  }
  lines.push(renderTrace(state));
  return lines.join("\n");
}

function renderTrace(state: ConsoleState): string {
  const w = 31;
  const h = 9;
  const grid = Array.from({ length: h }, () => Array(w).fill(" "));
  const points = state.positionTrace;
  if (points.length === 0) return "trace: (none)";
  const xs = points.map((p) => p[0]);
  const ys = points.map((p) => p[1]);
  const xMin = Math.min(...xs, -1), xMax = Math.max(...xs, 1);
  const yMin = Math.min(...ys, -1), yMax = Math.max(...ys, 1);
  for (const [x, y] of points) {
    const col = Math.round(((x - xMin) / (xMax - xMin || 1)) * (w - 1));
    const row = Math.round(((y - yMin) / (yMax - yMin || 1)) * (h - 1));
    grid[h - 1 - row][col] = ".";
  }
  const [lx, ly] = points[points.length - 1];
  const col = Math.round(((lx - xMin) / (xMax - xMin || 1)) * (w - 1));
  const row = Math.round(((ly - yMin) / (yMax - yMin || 1)) * (h - 1));
  grid[h - 1 - row][col] = "@";
  return grid.map((r) => "|" + r.join("") + "|").join("\n");
}

export function renderHistoryPanel(state: ConsoleState, limit = 8): string {
  if (state.instructionHistory.length === 0) return "instructions: (none yet)";
  const tail = state.instructionHistory.slice(-limit);
  return tail
    .map((e) => ` f${e.frameIndex}: ${describeInstruction(e.instruction)}`)
    .join("\n");
}

export function renderScreen(state: ConsoleState): string {
  const status = state.connected ? "connected" : "DISCONNECTED - reconnect pending";
  const hold = state.holding ? "HOLDING" : "released";
  const sections = [
    `handlang console   session=${state.sessionId ?? "-"}   ${status}`,
    `pair: left=${state.selectedLeft} right=${state.selectedRight}   ${hold}   last token: ${state.lastObservedToken ?? "-"}`,
    "",
    "debounce " + renderProgressBar(state),
    "",
    renderFsmPanel(state),
    "",
    renderRobotPanel(state),
    "",
    "history:",
    renderHistoryPanel(state),
  ];
  if (state.lastError) sections.push("", `! ${state.lastError}`);
  if (state.metrics) sections.push("", `metrics: ${JSON.stringify(state.metrics)}`);
  return sections.join("\n");
}
