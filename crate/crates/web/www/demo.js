import init, { maxcutDemo, lemmaSweep, kdenseDemo } from "./pkg/smoothopt_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function drawGraph(canvas, graph, color) {
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  ctx.clearRect(0, 0, w, h);
  const r = Math.min(w, h) / 2 - 20;
  const pos = Array.from({ length: graph.n }, (_, i) => {
    const a = (2 * Math.PI * i) / graph.n - Math.PI / 2;
    return [w / 2 + r * Math.cos(a), h / 2 + r * Math.sin(a)];
  });
  for (const [u, v] of graph.edges) {
    const c = color.edge(u, v);
    ctx.strokeStyle = c;
    ctx.lineWidth = c === "#999" ? 0.6 : 1.6;
    ctx.beginPath();
    ctx.moveTo(...pos[u]);
    ctx.lineTo(...pos[v]);
    ctx.stroke();
  }
  pos.forEach(([x, y], i) => {
    ctx.fillStyle = color.vertex(i);
    ctx.beginPath();
    ctx.arc(x, y, 8, 0, 2 * Math.PI);
    ctx.fill();
    ctx.fillStyle = "#000";
    ctx.fillText(String(i + 1), x + 10, y - 8);
  });
}

function guard(out, f) {
  try {
    f();
  } catch (e) {
    out.innerHTML = `<span class="err">${e}</span>`;
  }
}

function runMaxcut() {
  guard($("mc-out"), () => {
    const d = JSON.parse(maxcutDemo(num("mc-n"), num("mc-delta"), num("mc-eps"), BigInt(num("mc-seed")), $("mc-planted").checked));
    drawGraph($("mc-canvas"), d.graph, {
      vertex: (i) => (d.sides[i] ? "#d55" : "#36c"),
      edge: (u, v) => (d.sides[u] !== d.sides[v] ? "#2a2" : "#999"),
    });
    const ratio = d.optimum ? (d.cut / d.optimum).toFixed(3) : "n/a";
    $("mc-out").textContent =
      `edges ${d.graph.edges.length}, cut ${d.cut} (green), planted cut ${d.planted_cut}, ` +
      `optimum ${d.optimum ?? "n/a"}, ratio ${ratio}\n` +
      `LP objective ${d.fractional_objective?.toFixed(3)}, sample assignments tried ${d.assignments_tried}`;
  });
}

function runLemmas() {
  guard($("lm-out"), () => {
    const alphas = new Float64Array([0.1, 0.25, 0.5, 1.0]);
    const pts = JSON.parse(lemmaSweep(num("lm-n"), num("lm-delta"), alphas, num("lm-trials"), BigInt(num("lm-seed"))));
    const rows = pts
      .map((p) => `<tr><td>${p.alpha}</td><td>${p.sample_size}</td><td>${p.sampling_rate.toFixed(4)}</td><td>${p.rounding_rate.toFixed(4)}</td></tr>`)
      .join("");
    $("lm-out").innerHTML =
      `<table><tr><th>α</th><th>sample size</th><th>sampling violations</th><th>rounding violations</th></tr>${rows}</table>`;
  });
}

function runKdense() {
  guard($("kd-out"), () => {
    const d = JSON.parse(kdenseDemo(num("kd-n"), num("kd-delta"), num("kd-k"), num("kd-eps"), BigInt(num("kd-seed")), $("kd-sampled").checked));
    drawGraph($("kd-canvas"), d.graph, {
      vertex: (i) => (d.selected[i] ? "#d55" : "#bbb"),
      edge: (u, v) => (d.selected[u] && d.selected[v] ? "#d55" : "#999"),
    });
    $("kd-out").textContent =
      `branch ${d.branch}, k ${d.k}, induced edges ${d.edges}, optimum ${d.optimum ?? "n/a"}`;
  });
}

await init();
$("mc-run").onclick = runMaxcut;
$("lm-run").onclick = runLemmas;
$("kd-run").onclick = runKdense;
runMaxcut();
runKdense();
