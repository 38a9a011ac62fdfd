/** Trailing-edge throttle: at most one send per interval, last value wins. */

export interface Throttled<T> {
  push(value: T): void;
  flush(): void;
  /** Messages actually sent (for rate accounting). */
  readonly sent: number;
}

export function createThrottle<T>(
  minIntervalMs: number,
  send: (value: T) => void,
  now: () => number = () => Date.now(),
  schedule: (fn: () => void, ms: number) => unknown = (fn, ms) => setTimeout(fn, ms),
): Throttled<T> {
  let lastSent = -Infinity;
  let pending: { value: T } | null = null;
  let timerArmed = false;
  let sent = 0;

  const fire = (value: T) => {
    lastSent = now();
    sent += 1;
    send(value);
  };

  const drain = () => {
    timerArmed = false;
    if (pending !== null) {
      const { value } = pending;
      pending = null;
      fire(value);
    }
  };

  return {
    push(value: T) {
      const elapsed = now() - lastSent;
      if (elapsed >= minIntervalMs && !timerArmed) {
        fire(value);
        return;
      }
      pending = { value };
      if (!timerArmed) {
        timerArmed = true;
        schedule(drain, Math.max(0, minIntervalMs - elapsed));
      }
    },
    flush() {
      if (pending !== null) {
        const { value } = pending;
        pending = null;
        fire(value);
      }
    },
    get sent() {
      return sent;
    },
  };
}
