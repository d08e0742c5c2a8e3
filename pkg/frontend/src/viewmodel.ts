// Pure view state: everything the panels render, updated only from the
// message stream. No physics or control logic lives here — the console
// is a viewer plus a preference slider.

import type { ServerMessage, StateMessage } from "./schema.js";

export interface TracePoint {
  t: number;
  p: number;
  v_kmh: number;
  vmin: number;
  vmax: number;
}

export interface FrontPoint {
  u: number;
  J1: number;
  J2: number;
}

export interface Totals {
  J1: number;
  J2: number;
}

export type ConnectionStatus = "connecting" | "open" | "closed";

export interface ViewModel {
  trace: TracePoint[];
  front: FrontPoint[];
  selected: number;
  scenario: string;
  /** Last acknowledged preference weight (what the slider shows). */
  rho: number;
  /** A slider value sent but not yet confirmed by a state frame. */
  pendingRho: number | null;
  elapsed: number;
  distance: number;
  socDrop: number;
  soc0: number | null;
  totals: Totals | null;
  finished: boolean;
  banner: string | null;
  status: ConnectionStatus;
}

export function createViewModel(): ViewModel {
  return {
    trace: [],
    front: [],
    selected: -1,
    scenario: "",
    rho: 0.5,
    pendingRho: null,
    elapsed: 0,
    distance: 0,
    socDrop: 0,
    soc0: null,
    totals: null,
    finished: false,
    banner: null,
    status: "connecting",
  };
}

function applyState(vm: ViewModel, msg: StateMessage): void {
  if (vm.finished) return; // totals frozen, ignore stragglers
  const last = vm.trace[vm.trace.length - 1];
  if (last !== undefined && msg.t <= last.t) return; // duplicate frame
  vm.trace.push({
    t: msg.t,
    p: msg.p,
    v_kmh: msg.v_kmh,
    vmin: msg.limits.vmin,
    vmax: msg.limits.vmax,
  });
  vm.front = msg.front;
  vm.selected = msg.selected;
  vm.scenario = msg.scenario;
  vm.rho = msg.rho;
  if (vm.pendingRho !== null && Math.abs(msg.rho - vm.pendingRho) < 1e-9) {
    vm.pendingRho = null;
  }
  vm.elapsed = msg.t;
  vm.distance = msg.p;
  if (vm.soc0 === null) vm.soc0 = msg.S;
  vm.socDrop = vm.soc0 - msg.S;
}

/** Fold one validated server message into the view model (in place). */
export function onMessage(vm: ViewModel, msg: ServerMessage): void {
  switch (msg.type) {
    case "state":
      applyState(vm, msg);
      break;
    case "finished":
      vm.totals = { ...msg.totals };
      vm.finished = true; // slider disabled from here on
      vm.pendingRho = null;
      break;
    case "error":
      vm.banner = msg.message;
      break;
  }
}

/** Record a slider move awaiting confirmation by the next state frame. */
export function markPending(vm: ViewModel, value: number): void {
  if (!vm.finished) vm.pendingRho = value;
}
