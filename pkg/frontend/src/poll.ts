/** Fixed-interval poller that never overlaps in-flight ticks. */

export interface Poller {
  start(): void;
  stop(): void;
  readonly running: boolean;
}

export function createPoller(
  tick: () => Promise<void>,
  intervalMs = 2000,
  onError?: (err: unknown) => void,
): Poller {
  let timer: ReturnType<typeof setInterval> | null = null;
  let busy = false;

  const fire = async (): Promise<void> => {
    if (busy) return; // skip this interval; the previous tick is still running
    busy = true;
    try {
      await tick();
    } catch (err) {
      onError?.(err);
    } finally {
      busy = false;
    }
  };

  return {
    start() {
      if (timer !== null) return;
      timer = setInterval(() => void fire(), intervalMs);
      void fire(); // immediate first tick
    },
    stop() {
      if (timer !== null) {
        clearInterval(timer);
        timer = null;
      }
    },
    get running() {
      return timer !== null;
    },
  };
}
