import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { createPoller } from "../src/poll.js";

describe("createPoller", () => {
  beforeEach(() => {
    vi.useFakeTimers();
  });

  afterEach(() => {
    vi.useRealTimers();
  });

  it("ticks immediately on start and then on the interval", async () => {
    let calls = 0;
    const poller = createPoller(async () => {
      calls += 1;
    }, 2000);
    poller.start();
    await vi.advanceTimersByTimeAsync(0);
    expect(calls).toBe(1);
    await vi.advanceTimersByTimeAsync(6000);
    expect(calls).toBe(4);
    poller.stop();
  });

  it("never overlaps a slow tick", async () => {
    let active = 0;
    let maxActive = 0;
    let calls = 0;
    const poller = createPoller(async () => {
      calls += 1;
      active += 1;
      maxActive = Math.max(maxActive, active);
      await new Promise((resolve) => setTimeout(resolve, 5000)); // slower than the interval
      active -= 1;
    }, 2000);
    poller.start();
    await vi.advanceTimersByTimeAsync(9000);
    expect(maxActive).toBe(1);
    expect(calls).toBeLessThanOrEqual(2);
    poller.stop();
  });

  it("routes tick failures to onError and keeps going", async () => {
    const errors: unknown[] = [];
    let calls = 0;
    const poller = createPoller(
      async () => {
        calls += 1;
        throw new Error(`boom ${calls}`);
      },
      1000,
      (err) => errors.push(err),
    );
    poller.start();
    await vi.advanceTimersByTimeAsync(2500);
    expect(calls).toBe(3);
    expect(errors).toHaveLength(3);
    poller.stop();
  });

  it("stop halts ticking and start is idempotent", async () => {
    let calls = 0;
    const poller = createPoller(async () => {
      calls += 1;
    }, 1000);
    poller.start();
    poller.start();
    expect(poller.running).toBe(true);
    await vi.advanceTimersByTimeAsync(1000);
    const seen = calls;
    poller.stop();
    expect(poller.running).toBe(false);
    await vi.advanceTimersByTimeAsync(5000);
    expect(calls).toBe(seen);
  });
});
