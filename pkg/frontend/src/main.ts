// Entry point: wire the socket, the slider, and the canvases together.

import { rateLimit } from "./debounce.js";
import { drawCorridor, drawFront, totalsText } from "./render.js";
import { connect, endpointFromLocation } from "./socket.js";
import { createViewModel, markPending } from "./viewmodel.js";

const vm = createViewModel();

const corridorCanvas = document.getElementById("corridor") as HTMLCanvasElement;
const frontCanvas = document.getElementById("front") as HTMLCanvasElement;
const slider = document.getElementById("rho") as HTMLInputElement;
const sliderLabel = document.getElementById("rho-label") as HTMLElement;
const footer = document.getElementById("totals") as HTMLElement;
const banner = document.getElementById("banner") as HTMLElement;
const pauseButton = document.getElementById("pause") as HTMLButtonElement;

let paused = false;

function render(): void {
  drawCorridor(
    corridorCanvas.getContext("2d")!,
    vm,
    corridorCanvas.width,
    corridorCanvas.height,
  );
  drawFront(
    frontCanvas.getContext("2d")!,
    vm,
    frontCanvas.width,
    frontCanvas.height,
  );
  footer.textContent = totalsText(vm);
  banner.textContent = vm.banner ?? "";
  banner.style.display = vm.banner ? "block" : "none";
  slider.disabled = vm.finished;
  if (vm.pendingRho === null && document.activeElement !== slider) {
    slider.value = String(vm.rho);
  }
  const shown = vm.pendingRho ?? vm.rho;
  sliderLabel.textContent =
    `ρ = ${shown.toFixed(2)}` + (vm.pendingRho !== null ? " (pending)" : "");
}

const connection = connect(endpointFromLocation(window.location), vm, render);

// at most 10 preference updates per second on the wire
const rhoSender = rateLimit<number>(
  (value) => connection.send({ type: "set_rho", value }),
  100,
);

slider.addEventListener("input", () => {
  const value = Number(slider.value);
  markPending(vm, value);
  rhoSender.push(value);
  render();
});

pauseButton.addEventListener("click", () => {
  paused = !paused;
  connection.send({ type: paused ? "pause" : "resume" });
  pauseButton.textContent = paused ? "Resume" : "Pause";
});

render();
