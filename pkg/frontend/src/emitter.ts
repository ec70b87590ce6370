/** 15 fps observation emitter.
 *
 * While the hold flag is set, each tick sends one ingest_tokens message with
 * the selected (left, right) pair; while released, ticks send absent-token
 * frames so the service's debounce resets exactly as it would when the hands
 * leave the camera view. Frame indices increase monotonically for the
 * session's lifetime. The clock is injectable for tests.
 */

import type { GestureSpelling, Message } from "./protocol.js";

export const FRAME_RATE_HZ = 15;
export const FRAME_PERIOD_MS = 1000 / FRAME_RATE_HZ;

export interface Selection {
  left: GestureSpelling;
  right: GestureSpelling;
}

export type SendFn = (msg: Message) => void;

export class FrameEmitter {
  private frameIndex = 0;
  private accumulatorMs = 0;
  holding = false;
  selection: Selection = { left: "digit_0", right: "digit_0" };

  constructor(
    private readonly sessionId: string,
    private readonly send: SendFn,
  ) {}

  get nextFrameIndex(): number {
    return this.frameIndex;
  }

  /** Advance the emitter clock; sends one frame per elapsed 1/15 s. */
  advance(elapsedMs: number): number {
    this.accumulatorMs += elapsedMs;
    let sent = 0;
    while (this.accumulatorMs >= FRAME_PERIOD_MS - 1e-9) {
      this.accumulatorMs -= FRAME_PERIOD_MS;
      this.emitOne();
      sent += 1;
    }
    return sent;
  }

  private emitOne(): void {
    const frame = this.holding
      ? {
          frame_index: this.frameIndex,
          left: this.selection.left,
          right: this.selection.right,
          confidence: 1.0,
        }
      : { frame_index: this.frameIndex, left: null, right: null, confidence: 0.0 };
    this.frameIndex += 1;
    this.send({
      type: "ingest_tokens",
      session_id: this.sessionId,
      payload: { frames: [frame] },
    });
  }

  /** Convenience for scripted holds: exactly `seconds` worth of frames. */
  holdFor(selection: Selection, seconds: number): number {
    this.selection = selection;
    this.holding = true;
    const sent = this.advance(seconds * 1000);
    this.holding = false;
    return sent;
  }

  releaseFor(seconds: number): number {
    this.holding = false;
    return this.advance(seconds * 1000);
  }
}
