import init, {
  panorama_width, panorama_height, panorama_rgba,
  render_view, frustum_overlay, trajectory_path, trajectory_frame,
} from "./pkg/panotrack_web.js";

const $ = (id) => document.getElementById(id);
const errorBox = $("error");

function paint(canvas, rgba, w, h) {
  canvas.width = w;
  canvas.height = h;
  const ctx = canvas.getContext("2d");
  ctx.putImageData(new ImageData(new Uint8ClampedArray(rgba), w, h), 0, 0);
  return ctx;
}

function guarded(fn) {
  return () => {
    try {
      fn();
      errorBox.textContent = "";
    } catch (e) {
      errorBox.textContent = String(e);
    }
  };
}

await init();
const pw = panorama_width();
const ph = panorama_height();
const pano = panorama_rgba();

const angle = (id) => {
  const v = Number($(id).value);
  $(id).nextElementSibling.textContent = `${v}°`;
  return v;
};

const updateView = guarded(() => {
  const [yaw, pitch, roll, fov] = ["yaw", "pitch", "roll", "fov"].map(angle);
  const { width, height } = $("view");
  paint($("view"), render_view(yaw, pitch, roll, fov, width, height), width, height);
  paint($("frustum"), frustum_overlay(yaw, pitch, roll, fov, width, height), pw, ph);
});

const updateTrajectory = guarded(() => {
  const kind = $("kind").value;
  const frames = Math.max(2, Number($("frames").value) | 0);
  const seed = Math.max(0, Number($("seed").value) | 0);
  const btf = $("btf").checked;
  const slider = $("frame");
  slider.max = frames - 1;
  const index = Math.min(Number(slider.value), frames - 1);
  slider.nextElementSibling.textContent = index;

  const ctx = paint($("traj"), pano, pw, ph);
  const path = trajectory_path(kind, frames, seed, btf);
  ctx.strokeStyle = "#ffe14d";
  ctx.lineWidth = 2;
  ctx.beginPath();
  for (let i = 0; i < path.length; i += 2) {
    const [u, v] = [path[i], path[i + 1]];
    const jump = i > 0 && Math.abs(u - path[i - 2]) > pw / 2;
    if (i === 0 || jump) ctx.moveTo(u, v);
    else ctx.lineTo(u, v);
  }
  ctx.stroke();
  ctx.fillStyle = "#ff4d4d";
  ctx.beginPath();
  ctx.arc(path[2 * index], path[2 * index + 1], 6, 0, 2 * Math.PI);
  ctx.fill();

  const { width, height } = $("traj-view");
  paint($("traj-view"), trajectory_frame(kind, frames, seed, btf, index, width), width, height);
});

for (const id of ["yaw", "pitch", "roll", "fov"]) $(id).addEventListener("input", updateView);
for (const id of ["kind", "frames", "seed", "btf", "frame"]) $(id).addEventListener("input", updateTrajectory);
updateView();
updateTrajectory();
