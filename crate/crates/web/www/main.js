import init, { convergence, fixed_point, binary_landscape } from "./pkg/pacap_web.js";

const COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];
const PAD = { left: 60, right: 150, top: 15, bottom: 35 };

function values(form) {
  const out = {};
  for (const el of form.elements) if (el.name) out[el.name] = Number(el.value);
  return out;
}

// series: [{label, xs, ys}]; log axes are base 10
function plot(canvas, series, { logX = false, logY = false, xLabel = "", yLabel = "" } = {}) {
  const ctx = canvas.getContext("2d");
  const w = canvas.width - PAD.left - PAD.right;
  const h = canvas.height - PAD.top - PAD.bottom;
  const fx = logX ? Math.log10 : (v) => v;
  const fy = logY ? (v) => Math.log10(Math.max(v, 1e-16)) : (v) => v;
  const xs = series.flatMap((s) => s.xs.map(fx));
  const ys = series.flatMap((s) => s.ys.map(fy)).filter(Number.isFinite);
  let [x0, x1] = [Math.min(...xs), Math.max(...xs)];
  let [y0, y1] = [Math.min(...ys), Math.max(...ys)];
  if (logY) { y0 = Math.floor(y0); y1 = Math.ceil(y1); }
  if (x1 === x0) x1 = x0 + 1;
  if (y1 === y0) y1 = y0 + 1;
  const sx = (v) => PAD.left + ((fx(v) - x0) / (x1 - x0)) * w;
  const sy = (v) => PAD.top + ((y1 - fy(v)) / (y1 - y0)) * h;

  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.font = "12px sans-serif";
  ctx.strokeStyle = "#ddd";
  ctx.fillStyle = "#222";
  ctx.textAlign = "right";
  const yTicks = logY ? Array.from({ length: y1 - y0 + 1 }, (_, i) => y0 + i)
    : Array.from({ length: 5 }, (_, i) => y0 + ((y1 - y0) * i) / 4);
  for (const t of yTicks) {
    const y = PAD.top + ((y1 - t) / (y1 - y0)) * h;
    ctx.beginPath(); ctx.moveTo(PAD.left, y); ctx.lineTo(PAD.left + w, y); ctx.stroke();
    ctx.fillText(logY ? `1e${t}` : t.toPrecision(3), PAD.left - 5, y + 4);
  }
  ctx.textAlign = "center";
  ctx.fillText(xLabel, PAD.left + w / 2, canvas.height - 5);
  ctx.fillText(logX ? `1 … 10^${x1.toFixed(1)}` : `${x0.toPrecision(2)} … ${x1.toPrecision(2)}`, PAD.left + w / 2, PAD.top + h + 15);
  ctx.save();
  ctx.translate(12, PAD.top + h / 2); ctx.rotate(-Math.PI / 2); ctx.fillText(yLabel, 0, 0);
  ctx.restore();
  ctx.strokeStyle = "#000";
  ctx.strokeRect(PAD.left, PAD.top, w, h);

  series.forEach((s, i) => {
    ctx.strokeStyle = COLORS[i % COLORS.length];
    ctx.lineWidth = s.dashed ? 1 : 1.6;
    ctx.setLineDash(s.dashed ? [5, 4] : []);
    ctx.beginPath();
    s.xs.forEach((x, k) => (k ? ctx.lineTo(sx(x), sy(s.ys[k])) : ctx.moveTo(sx(x), sy(s.ys[k]))));
    ctx.stroke();
    const ly = PAD.top + 15 + 20 * i;
    ctx.beginPath(); ctx.moveTo(PAD.left + w + 10, ly); ctx.lineTo(PAD.left + w + 30, ly); ctx.stroke();
    ctx.fillStyle = "#222"; ctx.textAlign = "left";
    ctx.fillText(s.label, PAD.left + w + 35, ly + 4);
  });
  ctx.setLineDash([]);
  ctx.lineWidth = 1;
}

function guard(outEl, fn) {
  try {
    outEl.classList.remove("err");
    fn();
  } catch (e) {
    outEl.classList.add("err");
    outEl.textContent = e.message ?? String(e);
  }
}

function runConvergence() {
  const v = values(document.getElementById("conv"));
  const out = document.getElementById("conv-out");
  guard(out, () => {
    const r = JSON.parse(convergence(v.n, v.d, v.seed, v.alpha, v.iters));
    const series = r.curves.map((c) => ({
      label: c.label,
      xs: c.errors.map((_, t) => t + 1),
      ys: c.errors,
    }));
    plot(document.getElementById("conv-plot"), series, { logX: true, logY: true, xLabel: "iteration t", yLabel: "error" });
    out.textContent = `reference capacity ${r.reference.toFixed(10)} · final errors ` +
      r.curves.map((c) => `${c.label} ${c.errors.at(-1).toExponential(2)}`).join(", ");
  });
}

function runFixedPoint() {
  const v = values(document.getElementById("fp"));
  const out = document.getElementById("fp-out");
  guard(out, () => {
    const r = JSON.parse(fixed_point(v.n, v.d, v.seed, v.alpha, 2000, v.tol));
    const xs = r.bounds.map((_, t) => t + 1);
    const rate = xs.map((t) => r.bounds[0] * r.kappa ** (t - 1));
    plot(document.getElementById("fp-plot"), [
      { label: "bound", xs, ys: r.bounds },
      { label: "κ^t", xs, ys: rate, dashed: true },
    ], { logY: true, xLabel: "iteration t", yLabel: "bound" });
    out.textContent = `κ = ${r.kappa.toFixed(4)} · ${r.bounds.length} iterations · I_α = ${r.info.toFixed(12)}`;
  });
}

function runLandscape() {
  const v = values(document.getElementById("land"));
  const out = document.getElementById("land-out");
  guard(out, () => {
    const r = JSON.parse(binary_landscape(v.a, v.b, v.alpha, 200));
    plot(document.getElementById("land-plot"), [
      { label: "Rényi", xs: r.p, ys: r.renyi },
      { label: "Augustin", xs: r.p, ys: r.augustin },
    ], { xLabel: "x", yLabel: "nats" });
    out.textContent = `a = ${v.a}, b = ${v.b}, α = ${v.alpha} · capacity ≈ ${r.capacity.toFixed(8)}`;
  });
}

await init();
for (const [id, run] of [["conv", runConvergence], ["fp", runFixedPoint]]) {
  document.getElementById(id).addEventListener("submit", (e) => { e.preventDefault(); run(); });
}
document.getElementById("land").addEventListener("input", runLandscape);
runConvergence();
runFixedPoint();
runLandscape();
