import init, { purify_slice, error_model, box_size_curve } from "./pkg/purify_wasm_demo.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function draw(view) {
  const canvas = $("view");
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const [dx, dy] = view.fine_dims;
  const s = Math.min(canvas.width / dx, canvas.height / dy);
  const at = (p) => [(p[0] + 0.5) * s, (p[1] + 0.5) * s];

  ctx.strokeStyle = "#ddd";
  for (let x = 0; x <= dx; x += view.box_size) {
    ctx.beginPath(); ctx.moveTo(x * s, 0); ctx.lineTo(x * s, dy * s); ctx.stroke();
  }
  for (let y = 0; y <= dy; y += view.box_size) {
    ctx.beginPath(); ctx.moveTo(0, y * s); ctx.lineTo(dx * s, y * s); ctx.stroke();
  }

  for (const path of view.paths) {
    if (path.realized) {
      ctx.strokeStyle = "#2a6";
      ctx.beginPath();
      path.points.forEach((p, i) => (i ? ctx.lineTo(...at(p)) : ctx.moveTo(...at(p))));
      ctx.stroke();
    } else {
      const b = view.box_size;
      const mid = (c) => [(c[0] + 0.5) * b * s, (c[1] + 0.5) * b * s];
      ctx.strokeStyle = "#d33";
      ctx.setLineDash([4, 4]);
      ctx.beginPath(); ctx.moveTo(...mid(path.bond[0])); ctx.lineTo(...mid(path.bond[1])); ctx.stroke();
      ctx.setLineDash([]);
    }
  }
  ctx.fillStyle = "#124";
  for (const c of view.centers) {
    const [x, y] = at(c);
    ctx.beginPath(); ctx.arc(x, y, 3, 0, 2 * Math.PI); ctx.fill();
  }
}

function purify() {
  try {
    const view = JSON.parse(purify_slice(num("cx"), num("cy"), num("cz"), num("box"), num("pfail"), num("seed")));
    const rate = view.output_error_rate === null ? "undefined" : view.output_error_rate.toFixed(4);
    const input = (view.failed_input_bonds / view.ideal_bonds).toFixed(4);
    $("summary").textContent =
      `input bond loss ${input}, output error rate ${rate}, ${view.paths.length} bonds, ` +
      `${view.measured_y} Y and ${view.measured_z} Z measurements`;
    draw(view);
  } catch (e) {
    $("summary").textContent = `error: ${e}`;
  }
}

function errors() {
  try {
    const v = JSON.parse(error_model(num("fid"), num("lbar"), num("target")));
    const pct = (x) => (100 * x).toFixed(3) + " %";
    $("errors").textContent =
      `path error        ${pct(v.path_error)}\n` +
      `node error        ${pct(v.node_error)}\n` +
      `node error halved ${pct(v.node_error_halved)}\n` +
      `fidelity needed   ${v.required_fidelity === null ? "unattainable" : v.required_fidelity.toFixed(6)}`;
  } catch (e) {
    $("errors").textContent = `error: ${e}`;
  }
}

function curve() {
  $("curve").textContent = "running...";
  setTimeout(() => {
    try {
      const sizes = new Uint32Array([6, 8, 10, 12, 16]);
      const pts = JSON.parse(box_size_curve(num("curve-p"), sizes, num("curve-seeds")));
      $("curve").textContent = "B    output error   mean length\n" + pts
        .map((p) => `${String(p.box_size).padEnd(4)} ${p.mean_output_error.toFixed(4).padEnd(14)} ${p.mean_path_length?.toFixed(2) ?? "-"}`)
        .join("\n");
    } catch (e) {
      $("curve").textContent = `error: ${e}`;
    }
  }, 0);
}

await init();
$("run").addEventListener("click", purify);
$("curve-run").addEventListener("click", curve);
for (const id of ["fid", "lbar", "target"]) $(id).addEventListener("input", errors);
purify();
errors();
