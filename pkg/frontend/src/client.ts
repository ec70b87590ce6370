/** Line-JSON TCP client for the pipeline service. */

import net from "node:net";
import { EventEmitter } from "node:events";

import { decodeLines, encodeMessage, type Message } from "./protocol.js";

export declare interface ServiceClient {
  on(event: "message", listener: (msg: Message) => void): this;
  on(event: "connected", listener: () => void): this;
  on(event: "disconnected", listener: (err?: Error) => void): this;
}

export class ServiceClient extends EventEmitter {
  private socket: net.Socket | null = null;
  private buffer = "";
  connected = false;

  constructor(
    readonly host: string,
    readonly port: number,
  ) {
    super();
  }

  connect(): Promise<void> {
    return new Promise((resolve, reject) => {
      const socket = net.createConnection({ host: this.host, port: this.port });
      socket.setNoDelay(true);
      socket.once("connect", () => {
        this.socket = socket;
        this.connected = true;
        this.emit("connected");
        resolve();
      });
      socket.once("error", (err) => {
        if (!this.connected) reject(err);
      });
      socket.on("data", (chunk) => {
        this.buffer += chunk.toString("utf-8");
        const { messages, rest } = decodeLines(this.buffer);
        this.buffer = rest;
        for (const msg of messages) this.emit("message", msg);
      });
      socket.on("close", () => {
        const wasConnected = this.connected;
        this.connected = false;
        this.socket = null;
        if (wasConnected) this.emit("disconnected");
      });
    });
  }

  send(msg: Message): void {
    if (!this.socket || !this.connected) {
      throw new Error("not connected");
    }
    this.socket.write(encodeMessage(msg));
  }

  /** Send and resolve with the next `count` inbound messages. */
  request(msg: Message, count = 1, timeoutMs = 5000): Promise<Message[]> {
    return new Promise((resolve, reject) => {
      const got: Message[] = [];
      const onMessage = (m: Message) => {
        got.push(m);
        if (got.length >= count) {
          cleanup();
          resolve(got);
        }
      };
      const timer = setTimeout(() => {
        cleanup();
        reject(new Error(`timed out waiting for ${count} replies, got ${got.length}`));
      }, timeoutMs);
      const cleanup = () => {
        clearTimeout(timer);
        this.off("message", onMessage);
      };
      this.on("message", onMessage);
      this.send(msg);
    });
  }

  close(): void {
    this.socket?.end();
    this.socket = null;
    this.connected = false;
  }
}
