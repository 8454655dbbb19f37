import init, { device_names, lutScatter, samplerSpread, cellLatency } from "./pkg/edgelat_web.js";

const OPS = ["none", "skip", "conv1x1", "conv3x3", "avgpool"];
const EDGES = ["0-1", "0-2", "0-3", "1-2", "1-3", "2-3"];
const COLORS = ["#bbb", "#e69f00", "#56b4e9", "#009e73", "#cc79a7"];
const $ = (id) => document.getElementById(id);

function seed() {
  return BigInt(Math.max(0, Math.floor(Number($("seed").value) || 0)));
}

function device() {
  return Number($("device").value);
}

function show(id, err) {
  $(id).textContent = String(err);
}

function drawScatter() {
  const fusion = Number($("fusion").value);
  $("fusion-value").textContent = fusion < 0 ? "additive" : fusion.toFixed(2);
  let s;
  try {
    s = lutScatter(seed(), device(), fusion, $("elide").checked);
  } catch (e) {
    return show("scatter-out", e);
  }
  const lut = s.lut, truth = s.truth;
  const c = $("scatter"), g = c.getContext("2d");
  g.clearRect(0, 0, c.width, c.height);
  const all = [...lut, ...truth].map(Math.log);
  const lo = Math.min(...all), hi = Math.max(...all);
  const px = (v) => 20 + ((Math.log(v) - lo) / (hi - lo)) * (c.width - 40);
  const py = (v) => c.height - 20 - ((Math.log(v) - lo) / (hi - lo)) * (c.height - 40);
  g.strokeStyle = "#999";
  g.beginPath();
  for (const k of [0.9, 1.0, 1.1]) {
    g.moveTo(px(Math.exp(lo)), py(Math.exp(lo) * k));
    g.lineTo(px(Math.exp(hi)), py(Math.exp(hi) * k));
  }
  g.stroke();
  g.fillStyle = "rgba(0, 90, 180, 0.5)";
  for (let i = 0; i < lut.length; i++) {
    g.fillRect(px(truth[i]) - 1.5, py(lut[i]) - 1.5, 3, 3);
  }
  $("scatter-out").textContent =
    `x: measured, y: LUT (log scale, lines at 0.9x, 1x, 1.1x)\n±10% accuracy ${s.accuracy.toFixed(1)}% over ${lut.length} architectures`;
  s.free();
}

function drawSpread() {
  const n = Math.max(1, Math.floor(Number($("n").value) || 1));
  let s;
  try {
    s = samplerSpread(BigInt(Math.max(0, Math.floor(Number($("sseed").value) || 0))), device(), n);
  } catch (e) {
    return show("spread-out", e);
  }
  const sorted = s.sorted, tu = s.targeted, rnd = s.random;
  const c = $("spread"), g = c.getContext("2d");
  g.clearRect(0, 0, c.width, c.height);
  const lo = sorted[0], hi = sorted[sorted.length - 1];
  const px = (r) => 20 + (r / (sorted.length - 1)) * (c.width - 40);
  const py = (v) => c.height - 20 - ((v - lo) / (hi - lo)) * (c.height - 40);
  g.strokeStyle = "#333";
  g.beginPath();
  sorted.forEach((v, r) => (r ? g.lineTo(px(r), py(v)) : g.moveTo(px(r), py(v))));
  g.stroke();
  const mark = (ranks, color, dy) => {
    g.fillStyle = color;
    for (const r of ranks) {
      g.beginPath();
      g.arc(px(r), py(sorted[r]) + dy, 4, 0, 2 * Math.PI);
      g.fill();
    }
  };
  mark(tu, "#009e73", -6);
  mark(rnd, "#d55e00", 6);
  const range = (ranks) => (sorted[ranks[ranks.length - 1]] - sorted[ranks[0]]) * 1e3;
  $("spread-out").textContent =
    `training latencies sorted by rank; green targeted uniform, orange random\n` +
    `selected range: targeted ${range(tu).toFixed(2)} ms, random ${range(rnd).toFixed(2)} ms`;
  s.free();
}

function drawCell() {
  const edges = new Uint8Array(EDGES.map((_, i) => Number($(`edge-${i}`).value)));
  let r;
  try {
    r = cellLatency(seed(), device(), edges);
  } catch (e) {
    return show("cell-out", e);
  }
  const parts = r.contributions;
  const total = r.lut;
  const c = $("cell"), g = c.getContext("2d");
  g.clearRect(0, 0, c.width, c.height);
  let x = 20;
  const w = (v) => (v / total) * (c.width - 40);
  g.fillStyle = "#444";
  g.fillRect(x, 30, w(total - parts.reduce((a, b) => a + b, 0)), 40);
  x += w(total - parts.reduce((a, b) => a + b, 0));
  parts.forEach((v, k) => {
    g.fillStyle = COLORS[k];
    g.fillRect(x, 30, w(v), 40);
    x += w(v);
  });
  const ms = (v) => (v * 1e3).toFixed(3) + " ms";
  $("cell-out").textContent =
    `architecture ${r.index}: measured ${ms(r.measured)}, noiseless ${ms(r.noiseless)}, LUT ${ms(r.lut)}\n` +
    `bar: overhead (dark) then ` + OPS.map((o, k) => `${o} ${ms(parts[k])}`).join(", ");
  r.free();
}

function redraw() {
  drawScatter();
  drawSpread();
  drawCell();
}

await init();
device_names().forEach((name, i) => $("device").add(new Option(name, i)));
$("device").value = "5";
EDGES.forEach((e, i) => {
  const sel = document.createElement("select");
  sel.id = `edge-${i}`;
  OPS.forEach((o, k) => sel.add(new Option(o, k)));
  sel.value = String([3, 3, 1, 0, 2, 4][i]);
  sel.onchange = drawCell;
  const label = document.createElement("label");
  label.append(`edge ${e} `, sel);
  $("edges").append(label);
});
for (const id of ["seed", "device"]) $(id).onchange = redraw;
for (const id of ["fusion", "elide"]) $(id).oninput = drawScatter;
for (const id of ["n", "sseed"]) $(id).onchange = drawSpread;
redraw();
