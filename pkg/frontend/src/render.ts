// Canvas rendering of the two panels plus the text readouts. Pure
// drawing: everything comes from the view model.

import type { ViewModel } from "./viewmodel.js";

const CORRIDOR_COLOR = "#c62828";
const TRACE_COLOR = "#1565c0";
const FRONT_COLOR = "#455a64";
const SELECTED_COLOR = "#e65100";

function scaler(lo: number, hi: number, outLo: number, outHi: number) {
  const span = hi - lo || 1;
  return (x: number) => outLo + ((x - lo) / span) * (outHi - outLo);
}

/** Velocity-vs-position chart with the corridor bands and the trace. */
export function drawCorridor(
  ctx: CanvasRenderingContext2D,
  vm: ViewModel,
  width: number,
  height: number,
): void {
  ctx.clearRect(0, 0, width, height);
  if (vm.trace.length === 0) return;
  const pMax = Math.max(...vm.trace.map((s) => s.p), 1);
  const vTop = Math.max(...vm.trace.map((s) => s.vmax)) * 1.15;
  const px = scaler(0, pMax, 40, width - 10);
  const py = scaler(0, vTop, height - 25, 10);

  for (const key of ["vmax", "vmin"] as const) {
    ctx.strokeStyle = CORRIDOR_COLOR;
    ctx.setLineDash(key === "vmin" ? [4, 4] : []);
    ctx.beginPath();
    vm.trace.forEach((s, i) => {
      const x = px(s.p);
      const y = py(s[key]);
      if (i === 0) ctx.moveTo(x, y);
      else ctx.lineTo(x, y);
    });
    ctx.stroke();
  }
  ctx.setLineDash([]);
  ctx.strokeStyle = TRACE_COLOR;
  ctx.beginPath();
  vm.trace.forEach((s, i) => {
    const x = px(s.p);
    const y = py(s.v_kmh);
    if (i === 0) ctx.moveTo(x, y);
    else ctx.lineTo(x, y);
  });
  ctx.stroke();
}

/** Energy-vs-time scatter of the current front; selected point filled. */
export function drawFront(
  ctx: CanvasRenderingContext2D,
  vm: ViewModel,
  width: number,
  height: number,
): void {
  ctx.clearRect(0, 0, width, height);
  if (vm.front.length === 0) return;
  const j1s = vm.front.map((e) => e.J1);
  const j2s = vm.front.map((e) => e.J2);
  const px = scaler(Math.min(...j2s), Math.max(...j2s), 30, width - 15);
  const py = scaler(Math.min(...j1s), Math.max(...j1s), height - 20, 15);
  vm.front.forEach((e, i) => {
    ctx.beginPath();
    ctx.arc(px(e.J2), py(e.J1), i === vm.selected ? 6 : 3, 0, 2 * Math.PI);
    if (i === vm.selected) {
      ctx.fillStyle = SELECTED_COLOR;
      ctx.fill();
    } else {
      ctx.strokeStyle = FRONT_COLOR;
      ctx.stroke();
    }
  });
}

/** One-line totals readout for the footer. */
export function totalsText(vm: ViewModel): string {
  const t = vm.totals ? vm.totals.J2 : vm.elapsed;
  const dS = vm.totals ? vm.totals.J1 : vm.socDrop;
  const state = vm.finished ? "finished" : vm.status;
  return (
    `t = ${t.toFixed(1)} s   ΔS = ${dS.toFixed(5)}   ` +
    `p = ${vm.distance.toFixed(0)} m   ${vm.scenario}   [${state}]`
  );
}
