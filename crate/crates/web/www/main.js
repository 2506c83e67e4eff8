import init, { steadyHistogram, w1Curves, Swarm } from "./pkg/kga_web.js";

const COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

function field(section, name) {
  return section.querySelector(`[name=${name}]`);
}

function num(section, name) {
  return Number(field(section, name).value);
}

function clear(canvas) {
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  return ctx;
}

function drawHistogram(canvas, density) {
  const ctx = clear(canvas);
  const max = Math.max(...density, 1e-12);
  const w = canvas.width / density.length;
  ctx.fillStyle = COLORS[0];
  density.forEach((d, i) => {
    const h = (d / max) * (canvas.height - 20);
    ctx.fillRect(i * w, canvas.height - h, Math.max(w - 0.5, 0.5), h);
  });
  ctx.fillStyle = "#444";
  ctx.fillText(`x in [-2, 2], peak density ${max.toFixed(2)}`, 6, 12);
}

function drawSwarm(canvas, flat, label) {
  const ctx = clear(canvas);
  const s = canvas.width / 4;
  ctx.strokeStyle = "#eee";
  ctx.beginPath();
  ctx.moveTo(canvas.width / 2, 0); ctx.lineTo(canvas.width / 2, canvas.height);
  ctx.moveTo(0, canvas.height / 2); ctx.lineTo(canvas.width, canvas.height / 2);
  ctx.stroke();
  ctx.fillStyle = "rgba(31, 119, 180, 0.6)";
  for (let i = 0; i < flat.length; i += 2) {
    ctx.fillRect((flat[i] + 2) * s - 1.5, canvas.height - (flat[i + 1] + 2) * s - 1.5, 3, 3);
  }
  ctx.fillStyle = "#222";
  ctx.fillText(label, 6, 14);
}

function drawCurves(canvas, curves, sizes, kMax, stride) {
  const ctx = clear(canvas);
  const snaps = curves.length / sizes.length;
  const logs = curves.map((v) => Math.log10(Math.max(v, 1e-12)));
  const lo = Math.min(...logs), hi = Math.max(...logs);
  const x = (j) => 40 + (j * stride / kMax) * (canvas.width - 60);
  const y = (v) => 10 + (hi - v) / Math.max(hi - lo, 1e-9) * (canvas.height - 40);
  sizes.forEach((n, c) => {
    ctx.strokeStyle = COLORS[c % COLORS.length];
    ctx.beginPath();
    for (let j = 0; j < snaps; j++) {
      const v = logs[c * snaps + j];
      j === 0 ? ctx.moveTo(x(j), y(v)) : ctx.lineTo(x(j), y(v));
    }
    ctx.stroke();
    ctx.fillStyle = ctx.strokeStyle;
    ctx.fillText(`N = ${n}`, canvas.width - 90, 20 + 14 * c);
  });
  ctx.fillStyle = "#444";
  ctx.fillText(`log10 mean W1: ${lo.toFixed(1)} .. ${hi.toFixed(1)}, k = 0 .. ${kMax}`, 44, canvas.height - 8);
}

function busy(status, text, work) {
  status.textContent = text;
  setTimeout(() => {
    const t0 = performance.now();
    try {
      work();
      status.textContent = `done in ${((performance.now() - t0) / 1000).toFixed(1)} s`;
    } catch (e) {
      status.textContent = `error: ${e}`;
    }
  }, 20);
}

function setupSteady() {
  const sec = document.getElementById("steady");
  sec.querySelector("button").onclick = () => busy(sec.querySelector(".status"), "running...", () => {
    const d = steadyHistogram(field(sec, "kernel").value, num(sec, "alpha"), num(sec, "sigma"),
      num(sec, "cooling"), num(sec, "n"), num(sec, "kmax"), 200, 1);
    drawHistogram(sec.querySelector("canvas"), d);
  });
}

function setupSwarm() {
  const sec = document.getElementById("swarm");
  const status = sec.querySelector(".status");
  let swarm = null, timer = null;
  const draw = () => {
    const [ga, cbo] = swarm.bestErrors();
    drawSwarm(sec.querySelector(".ga"), swarm.gaPositions(), `GA eps=${num(sec, "epsilon")}  best error ${ga.toExponential(2)}`);
    drawSwarm(sec.querySelector(".cbo"), swarm.cboPositions(), `CBO  best error ${cbo.toExponential(2)}`);
    status.textContent = `k = ${swarm.generation()}`;
  };
  const reset = () => {
    try {
      swarm = new Swarm(field(sec, "objective").value, num(sec, "n"), num(sec, "epsilon"), field(sec, "aniso").checked, 5);
      draw();
    } catch (e) {
      status.textContent = `error: ${e}`;
    }
  };
  field(sec, "reset").onclick = reset;
  field(sec, "play").onclick = () => {
    if (timer) {
      clearInterval(timer); timer = null; field(sec, "play").textContent = "play";
      return;
    }
    field(sec, "play").textContent = "pause";
    timer = setInterval(() => { swarm.step(1); draw(); }, 60);
  };
  reset();
}

function setupChaos() {
  const sec = document.getElementById("chaos");
  sec.querySelector("button").onclick = () => busy(sec.querySelector(".status"), "running...", () => {
    const sizes = [100, 1000];
    const kMax = num(sec, "kmax"), stride = 5;
    const c = w1Curves(field(sec, "kernel").value, 1e4, Uint32Array.from(sizes), num(sec, "ref"),
      num(sec, "reps"), kMax, stride, 1);
    drawCurves(sec.querySelector("canvas"), c, sizes, kMax, stride);
  });
}

await init();
setupSteady();
setupSwarm();
setupChaos();
