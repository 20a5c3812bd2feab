#include <string_view>

namespace innervsense::detail {

// Fallback operator page used when no --ui-dir is given.
extern const std::string_view kBuiltinPage = R"html(<!doctype html>
<html lang="en">
<head>
<meta charset="utf-8">
<title>innervsense live</title>
<style>
body { font-family: sans-serif; margin: 1em; }
#state { font-weight: bold; }
canvas { border: 1px solid #ccc; width: 100%; height: 300px; }
</style>
</head>
<body>
<p>Connection: <span id="state">connecting</span> | latest: <span id="latest">no signal</span></p>
<canvas id="chart" width="900" height="300"></canvas>
<p>
<input id="label" placeholder="label">
<button data-type="trial_start">start</button>
<button data-type="trial_stop">stop</button>
<button data-type="annotate">annotate</button>
<span id="ack"></span>
</p>
<script>
const windowS = 15;
const points = [];
let lastArrival = 0;
const chart = document.getElementById("chart");
const ctx = chart.getContext("2d");

function draw() {
  ctx.clearRect(0, 0, chart.width, chart.height);
  if (points.length < 2) return;
  const tEnd = points[points.length - 1][0];
  let lo = Infinity, hi = -Infinity;
  for (const [, p] of points) { lo = Math.min(lo, p); hi = Math.max(hi, p); }
  if (hi - lo < 1) { hi += 0.5; lo -= 0.5; }
  ctx.beginPath();
  points.forEach(([t, p], i) => {
    const x = chart.width * (1 - (tEnd - t) / windowS);
    const y = chart.height * (1 - (p - lo) / (hi - lo));
    i ? ctx.lineTo(x, y) : ctx.moveTo(x, y);
  });
  ctx.stroke();
}

function connect(delay) {
  const ws = new WebSocket(`ws://${location.host}/stream`);
  ws.onopen = () => { document.getElementById("state").textContent = "connected"; delay = 250; };
  ws.onmessage = (m) => {
    const msg = JSON.parse(m.data);
    if (msg.type !== "sample") return;
    points.push([msg.t_s, msg.pa]);
    while (points.length && points[0][0] < msg.t_s - windowS) points.shift();
    lastArrival = performance.now();
    document.getElementById("latest").textContent = `${msg.pa.toFixed(1)} Pa at ${msg.t_s.toFixed(2)} s`;
  };
  ws.onclose = () => {
    document.getElementById("state").textContent = "disconnected";
    setTimeout(() => connect(Math.min(delay * 2, 5000)), delay);
  };
}

setInterval(() => {
  if (performance.now() - lastArrival > 1000) document.getElementById("latest").textContent = "no signal";
  draw();
}, 40);

for (const b of document.querySelectorAll("button")) {
  b.onclick = async () => {
    const body = JSON.stringify({ type: b.dataset.type, label: document.getElementById("label").value });
    const r = await fetch("/control", { method: "POST", body, headers: { "Content-Type": "application/json" } });
    const ack = await r.json();
    document.getElementById("ack").textContent = ack.ok ? `ok at ${ack.event.t_s} s` : ack.error;
  };
}
connect(250);
</script>
</body>
</html>
)html";

}  // namespace innervsense::detail
