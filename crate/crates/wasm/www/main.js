import init, { eigen, ma_solve_constant, radial_oracle } from "./pkg/ma_eigen_wasm.js";

const presets = {
  disk: { kind: "disk", center: [0, 0], radius: 1 },
  square: { kind: "convex_polygon", vertices: [[0, 0], [1, 0], [1, 1], [0, 1]] },
  triangle: { kind: "convex_polygon", vertices: [[0, 0], [1, 0], [0.4, 0.9]] },
  hexagon: {
    kind: "convex_polygon",
    vertices: [...Array(6).keys()].map((k) => [Math.cos(k * Math.PI / 3), Math.sin(k * Math.PI / 3)]),
  },
};

const $ = (id) => document.getElementById(id);
const log = (text) => { $("log").textContent = text; };

function loadPreset() {
  $("domain").value = JSON.stringify(presets[$("preset").value]);
}

function params() {
  return { domain: $("domain").value, h: 1 / Number($("inv-h").value), width: Number($("width").value) };
}

// Blue (most negative) to yellow (zero).
function color(t) {
  const r = Math.round(255 * Math.min(1, 1.6 * t));
  const g = Math.round(255 * Math.min(1, 0.2 + 0.8 * t));
  const b = Math.round(255 * (1 - t) * 0.9);
  return `rgb(${r},${g},${b})`;
}

function drawField(field) {
  const ctx = $("field").getContext("2d");
  const { width, height } = ctx.canvas;
  ctx.clearRect(0, 0, width, height);
  const { nx, ny, values } = field;
  const finite = values.filter((v) => v !== null);
  const lo = Math.min(...finite);
  const cell = Math.min(width / nx, height / ny);
  for (let iy = 0; iy < ny; iy++) {
    for (let ix = 0; ix < nx; ix++) {
      const v = values[iy * nx + ix];
      if (v === null) continue;
      ctx.fillStyle = color(lo < 0 ? 1 - v / lo : 1);
      ctx.fillRect(ix * cell, height - (iy + 1) * cell, Math.ceil(cell), Math.ceil(cell));
    }
  }
}

function drawHistory(series, reference) {
  const ctx = $("history").getContext("2d");
  const { width, height } = ctx.canvas;
  ctx.clearRect(0, 0, width, height);
  // Skip R_0, which is dominated by the initializer.
  const data = series.slice(1);
  if (data.length === 0) return;
  const all = reference === undefined ? data : [...data, reference];
  let lo = Math.min(...all), hi = Math.max(...all);
  if (hi - lo < 1e-9) { lo -= 0.5; hi += 0.5; }
  const pad = 40;
  const x = (k) => pad + (data.length === 1 ? 0 : (k / (data.length - 1)) * (width - 2 * pad));
  const y = (v) => height - pad - ((v - lo) / (hi - lo)) * (height - 2 * pad);
  ctx.strokeStyle = "#999";
  ctx.strokeRect(pad, pad, width - 2 * pad, height - 2 * pad);
  if (reference !== undefined) {
    ctx.strokeStyle = "#c33";
    ctx.beginPath(); ctx.moveTo(pad, y(reference)); ctx.lineTo(width - pad, y(reference)); ctx.stroke();
  }
  ctx.strokeStyle = "#226";
  ctx.beginPath();
  data.forEach((v, k) => (k === 0 ? ctx.moveTo(x(k), y(v)) : ctx.lineTo(x(k), y(v))));
  ctx.stroke();
  ctx.fillStyle = "#000";
  ctx.fillText(`R_k, k = 1..${data.length}`, pad, pad - 8);
  ctx.fillText(hi.toPrecision(6), 2, pad + 4);
  ctx.fillText(lo.toPrecision(6), 2, height - pad + 4);
}

function timed(fn) {
  const start = performance.now();
  const out = JSON.parse(fn());
  return [out, performance.now() - start];
}

let unitBall;

function runEigen() {
  const { domain, h, width } = params();
  const [out, ms] = timed(() => eigen(domain, h, width, Number($("max-iter").value)));
  if (out.error) return log(`error: ${out.error}`);
  drawField(out.field);
  const kind = JSON.parse(domain).kind;
  drawHistory(out.rayleigh, kind === "disk" ? unitBall / JSON.parse(domain).radius ** 4 : undefined);
  log(`λ ≈ ${out.lambda}\nstatus ${out.status}, ${out.iterations} iterations, ${out.unknowns} unknowns, ${ms.toFixed(0)} ms` +
    (kind === "disk" ? `\nradial oracle ${unitBall / JSON.parse(domain).radius ** 4}` : ""));
}

function runSolve() {
  const { domain, h, width } = params();
  const [out, ms] = timed(() => ma_solve_constant(domain, h, width, Number($("rhs").value)));
  if (out.error) return log(`error: ${out.error}`);
  drawField(out.field);
  const min = Math.min(...out.field.values.filter((v) => v !== null));
  log(`min u = ${min}\n${out.sweeps} Newton steps, residual ${out.residual.toExponential(3)}, ${ms.toFixed(0)} ms`);
}

function runOracle() {
  const out = JSON.parse(radial_oracle(Number($("oracle-n").value)));
  log(out.error ? `error: ${out.error}` : `λ(B₁), n = ${out.n}: ${out.lambda_unit_ball}`);
}

await init();
unitBall = JSON.parse(radial_oracle(2)).lambda_unit_ball;
$("preset").addEventListener("change", loadPreset);
$("run-eigen").addEventListener("click", runEigen);
$("run-solve").addEventListener("click", runSolve);
$("run-oracle").addEventListener("click", runOracle);
loadPreset();
log("Ready.");
