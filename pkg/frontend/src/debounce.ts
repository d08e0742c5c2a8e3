// Rate limiter for slider traffic: at most one message per interval,
// always delivering the latest value (leading edge immediately, trailing
// edge after the interval). Clock and timer are injectable for tests.

export interface RateLimited<T> {
  push(value: T): void;
  /** Cancel any pending trailing delivery. */
  cancel(): void;
}

export function rateLimit<T>(
  send: (value: T) => void,
  intervalMs: number,
  now: () => number = () => Date.now(),
  schedule: (fn: () => void, ms: number) => unknown = (fn, ms) =>
    setTimeout(fn, ms),
  unschedule: (handle: unknown) => void = (h) =>
    clearTimeout(h as ReturnType<typeof setTimeout>),
): RateLimited<T> {
  let lastSent = -Infinity;
  let pending: { value: T } | null = null;
  let timer: unknown = null;

  const fire = (value: T) => {
    lastSent = now();
    send(value);
  };

  const flush = () => {
    timer = null;
    if (pending !== null) {
      const { value } = pending;
      pending = null;
      fire(value);
    }
  };

  return {
    push(value: T) {
      const wait = lastSent + intervalMs - now();
      if (wait <= 0 && timer === null) {
        fire(value);
        return;
      }
      pending = { value };
      if (timer === null) timer = schedule(flush, Math.max(wait, 0));
    },
    cancel() {
      if (timer !== null) unschedule(timer);
      timer = null;
      pending = null;
    },
  };
}
