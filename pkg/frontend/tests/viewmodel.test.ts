import { describe, expect, it } from "vitest";

import type { ServerMessage, StateMessage } from "../src/schema";
import { createViewModel, markPending, onMessage } from "../src/viewmodel";

function stateMsg(overrides: Partial<StateMessage> = {}): StateMessage {
  return {
    v: 1,
    type: "state",
    t: 1.0,
    p: 20,
    v_kmh: 30,
    S: 0.6,
    u: 200,
    rho: 0.5,
    scenario: "constant",
    limits: { vmin: 40, vmax: 50 },
    front: [
      { u: 400, J1: 2e-4, J2: 5.0 },
      { u: 200, J1: 1e-4, J2: 6.0 },
    ],
    selected: 1,
    ...overrides,
  };
}

describe("onMessage", () => {
  it("renders the first state frame: trace length 1, front shown", () => {
    const vm = createViewModel();
    onMessage(vm, stateMsg());
    expect(vm.trace).toHaveLength(1);
    expect(vm.front).toHaveLength(2);
    expect(vm.selected).toBe(1);
    expect(vm.rho).toBe(0.5);
  });

  it("is idempotent for duplicate frames (keyed by t)", () => {
    const vm = createViewModel();
    const msg = stateMsg();
    onMessage(vm, msg);
    const snapshot = JSON.stringify(vm);
    onMessage(vm, msg);
    expect(JSON.stringify(vm)).toBe(snapshot);
  });

  it("freezes totals and disables the slider on finished", () => {
    const vm = createViewModel();
    onMessage(vm, stateMsg());
    onMessage(vm, { v: 1, type: "finished", totals: { J1: 0.006, J2: 148.4 } });
    expect(vm.finished).toBe(true);
    expect(vm.totals).toEqual({ J1: 0.006, J2: 148.4 });
    onMessage(vm, stateMsg({ t: 99, p: 999 }));
    expect(vm.totals).toEqual({ J1: 0.006, J2: 148.4 });
    expect(vm.trace).toHaveLength(1);
    markPending(vm, 0.9);
    expect(vm.pendingRho).toBeNull();
  });

  it("shows an error banner without touching the trace", () => {
    const vm = createViewModel();
    onMessage(vm, stateMsg());
    onMessage(vm, { v: 1, type: "error", message: "unknown message type" });
    expect(vm.banner).toContain("unknown message type");
    expect(vm.trace).toHaveLength(1);
  });

  it("clears a pending slider value once a state frame confirms it", () => {
    const vm = createViewModel();
    markPending(vm, 1.0);
    expect(vm.pendingRho).toBe(1.0);
    onMessage(vm, stateMsg({ rho: 0.5 }));
    expect(vm.pendingRho).toBe(1.0); // not yet acknowledged
    onMessage(vm, stateMsg({ t: 2.0, rho: 1.0 }));
    expect(vm.pendingRho).toBeNull();
    expect(vm.rho).toBe(1.0);
  });

  it("accumulates totals readouts from the stream", () => {
    const vm = createViewModel();
    onMessage(vm, stateMsg({ t: 1, S: 0.6 }));
    onMessage(vm, stateMsg({ t: 5, p: 100, S: 0.598 }));
    expect(vm.elapsed).toBe(5);
    expect(vm.distance).toBe(100);
    expect(vm.socDrop).toBeCloseTo(0.002, 12);
  });
});

describe("replay equivalence", () => {
  it("a replayed stream yields the same final trace as the live one", () => {
    const samples = Array.from({ length: 50 }, (_, i) =>
      stateMsg({ t: i * 0.5, p: i * 10, v_kmh: Math.min(50, i * 2) }),
    );
    const finished: ServerMessage = {
      v: 1,
      type: "finished",
      totals: { J1: 0.004, J2: 24.5 },
    };

    // live: occasional duplicates and an interleaved error frame
    const live = createViewModel();
    for (const [i, msg] of samples.entries()) {
      onMessage(live, msg);
      if (i % 7 === 0) onMessage(live, msg); // duplicate delivery
      if (i === 20)
        onMessage(live, { v: 1, type: "error", message: "transient" });
    }
    onMessage(live, finished);

    const replay = createViewModel();
    for (const msg of samples) onMessage(replay, msg);
    onMessage(replay, finished);

    expect(replay.trace).toEqual(live.trace);
    expect(replay.totals).toEqual(live.totals);
  });
});
