// Built with: wasm-pack build crates/web --target web --out-dir www/pkg
import init, { dip_trace, singles_fringe, visibility_decay } from "./pkg/homcomb_web.js";

const $ = (id) => document.getElementById(id);

function plot(canvas, x, series, { ymin, ymax, xlabel, ylabel, dots = false }) {
  const g = canvas.getContext("2d");
  const w = canvas.width, h = canvas.height, pad = 44;
  g.clearRect(0, 0, w, h);
  const x0 = Math.min(...x), x1 = Math.max(...x);
  const sx = (v) => pad + (v - x0) / (x1 - x0 || 1) * (w - 2 * pad);
  const sy = (v) => h - pad + (ymin - v) / (ymax - ymin) * (h - 2 * pad);

  g.strokeStyle = "#999";
  g.strokeRect(pad, pad / 2, w - 2 * pad, h - 1.5 * pad);
  g.fillStyle = "#444";
  g.font = "12px system-ui";
  g.fillText(xlabel, w / 2 - 30, h - 8);
  g.fillText(ylabel, 4, 14);
  for (const v of [ymin, (ymin + ymax) / 2, ymax]) g.fillText(v.toPrecision(3), 2, sy(v) + 4);
  g.fillText(x0.toPrecision(3), pad, h - pad + 16);
  g.fillText(x1.toPrecision(3), w - pad - 30, h - pad + 16);

  for (const [y, color] of series) {
    if (!y.length) continue;
    g.strokeStyle = g.fillStyle = color;
    g.beginPath();
    y.forEach((v, i) => {
      if (dots) g.fillRect(sx(x[i]) - 2, sy(v) - 2, 4, 4);
      else if (i === 0) g.moveTo(sx(x[i]), sy(v));
      else g.lineTo(sx(x[i]), sy(v));
    });
    if (!dots) g.stroke();
  }
}

function source() {
  return [parseFloat($("gamma").value), parseFloat($("bw").value)];
}

function guard(f) {
  try {
    f();
    $("error").textContent = "";
  } catch (e) {
    $("error").textContent = String(e.message || e);
  }
}

function drawDip() {
  guard(() => {
    const [gamma, bw] = source();
    const coarse = Math.round(2 * parseFloat($("rt").value));
    const c = dip_trace(gamma, bw, coarse, 15, parseFloat($("phase").value), 601);
    plot($("dip"), c.x, [[c.y, "#1f5fbf"], [c.y2, "#c0392b"]],
      { ymin: 0, ymax: 1, xlabel: "stage delay (ps)", ylabel: "coincidence probability" });
  });
}

function drawFringe() {
  guard(() => {
    const [gamma, bw] = source();
    const off = parseFloat($("offset").value);
    $("offsetval").textContent = `${off.toFixed(2)} ps`;
    const c = singles_fringe(gamma, bw, off, 400);
    plot($("fringe"), c.x, [[c.y, "#1f5fbf"], [c.y2, "#c0392b"]],
      { ymin: 0, ymax: 2, xlabel: "phase (rad)", ylabel: "relative singles rate" });
  });
}

function drawDecay() {
  guard(() => {
    const [gamma, bw] = source();
    const c = visibility_decay(gamma, bw, parseFloat($("maxrt").value));
    plot($("decay"), c.x, [[c.y, "#1f5fbf"]],
      { ymin: 0, ymax: 100, xlabel: "delay (round trips)", ylabel: "visibility (%)", dots: true });
  });
}

function drawAll() {
  drawDip();
  drawFringe();
  drawDecay();
}

await init();
for (const id of ["gamma", "bw"]) $(id).addEventListener("input", drawAll);
for (const id of ["rt", "phase"]) $(id).addEventListener("input", drawDip);
$("offset").addEventListener("input", drawFringe);
$("maxrt").addEventListener("input", drawDecay);
drawAll();
