import { ServiceClient } from "./api.js";
import { MaskLayer } from "./mask-layer.js";
import { dividerX, splitFraction } from "./slider.js";
import { SelectTimer } from "./timer.js";
import {
  BrushState,
  DEFAULT_PARAMS,
  JobInfo,
  Point,
  SolverParamsForm,
  paramsPayload,
} from "./types.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) {
    throw new Error(`missing element #${id}`);
  }
  return node as T;
}

const photoCanvas = el<HTMLCanvasElement>("photo");
const overlayCanvas = el<HTMLCanvasElement>("overlay");
const fileInput = el<HTMLInputElement>("file");
const radiusInput = el<HTMLInputElement>("brush-radius");
const intensityInput = el<HTMLInputElement>("brush-intensity");
const paintBtn = el<HTMLButtonElement>("mode-paint");
const eraseBtn = el<HTMLButtonElement>("mode-erase");
const clearBtn = el<HTMLButtonElement>("clear-mask");
const exportBtn = el<HTMLButtonElement>("export-mask");
const defaultMaskBox = el<HTMLInputElement>("default-mask");
const runBtn = el<HTMLButtonElement>("run");
const statusLine = el<HTMLElement>("status");
const progressBar = el<HTMLProgressElement>("progress");
const selectTime = el<HTMLElement>("select-time");
const serviceInput = el<HTMLInputElement>("service-url");
const paramsForm = el<HTMLFormElement>("params");
const compareSection = el<HTMLElement>("compare");
const compareBox = el<HTMLElement>("compare-box");
const beforeCanvas = el<HTMLCanvasElement>("before");
const afterCanvas = el<HTMLCanvasElement>("after");
const afterClip = el<HTMLElement>("after-clip");
const dividerEl = el<HTMLElement>("divider");

interface Session {
  sourceBlob: Blob;
  width: number;
  height: number;
  mask: MaskLayer;
  pollAbort: AbortController | null;
  resultUrl: string | null;
}

let session: Session | null = null;
const brush: BrushState = { radius: 16, intensity: 1, mode: "paint" };
const timer = new SelectTimer();

function setStatus(text: string): void {
  statusLine.textContent = text;
}

function renderOverlay(): void {
  if (!session) {
    return;
  }
  const { mask } = session;
  const ctx = overlayCanvas.getContext("2d")!;
  const img = ctx.createImageData(mask.width, mask.height);
  for (let i = 0; i < mask.gray.length; i++) {
    const v = mask.gray[i];
    img.data[i * 4] = 255;
    img.data[i * 4 + 1] = 255;
    img.data[i * 4 + 2] = 255;
    img.data[i * 4 + 3] = Math.round(v * 0.65);
  }
  ctx.clearRect(0, 0, mask.width, mask.height);
  ctx.putImageData(img, 0, 0);
  defaultMaskBox.checked = mask.untouched;
}

async function loadImage(blob: Blob): Promise<void> {
  const bitmap = await createImageBitmap(blob);
  // 1:1 pixel mapping throughout; big photos scroll instead of scaling
  for (const canvas of [photoCanvas, overlayCanvas, beforeCanvas, afterCanvas]) {
    canvas.width = bitmap.width;
    canvas.height = bitmap.height;
  }
  photoCanvas.getContext("2d")!.drawImage(bitmap, 0, 0);
  beforeCanvas.getContext("2d")!.drawImage(bitmap, 0, 0);
  if (session?.resultUrl) {
    URL.revokeObjectURL(session.resultUrl);
  }
  session?.pollAbort?.abort();
  session = {
    sourceBlob: blob,
    width: bitmap.width,
    height: bitmap.height,
    mask: new MaskLayer(bitmap.width, bitmap.height),
    pollAbort: null,
    resultUrl: null,
  };
  bitmap.close();
  timer.reset();
  compareSection.hidden = true;
  progressBar.value = 0;
  renderOverlay();
  setStatus(`loaded ${session.width}x${session.height}; paint over the reflections`);
}

function canvasPoint(event: PointerEvent): Point {
  const rect = overlayCanvas.getBoundingClientRect();
  // guard against accidental CSS scaling; normally 1:1
  const sx = overlayCanvas.width / rect.width;
  const sy = overlayCanvas.height / rect.height;
  return { x: (event.clientX - rect.left) * sx, y: (event.clientY - rect.top) * sy };
}

let strokeLast: Point | null = null;

overlayCanvas.addEventListener("pointerdown", (event) => {
  if (!session) {
    return;
  }
  overlayCanvas.setPointerCapture(event.pointerId);
  timer.strokeStarted();
  strokeLast = canvasPoint(event);
  session.mask.stroke([strokeLast], brush);
  renderOverlay();
});

overlayCanvas.addEventListener("pointermove", (event) => {
  if (!session || strokeLast === null) {
    return;
  }
  const next = canvasPoint(event);
  session.mask.stroke([strokeLast, next], brush);
  strokeLast = next;
  renderOverlay();
});

for (const type of ["pointerup", "pointercancel"] as const) {
  overlayCanvas.addEventListener(type, () => {
    strokeLast = null;
    selectTime.textContent = timer.seconds().toFixed(1);
  });
}

function setMode(mode: BrushState["mode"]): void {
  brush.mode = mode;
  paintBtn.classList.toggle("active", mode === "paint");
  eraseBtn.classList.toggle("active", mode === "erase");
}

paintBtn.addEventListener("click", () => setMode("paint"));
eraseBtn.addEventListener("click", () => setMode("erase"));
radiusInput.addEventListener("input", () => {
  brush.radius = Math.max(1, Number(radiusInput.value));
});
intensityInput.addEventListener("input", () => {
  brush.intensity = Number(intensityInput.value);
});
clearBtn.addEventListener("click", () => {
  session?.mask.clear();
  renderOverlay();
});

fileInput.addEventListener("change", () => {
  const file = fileInput.files?.[0];
  if (file) {
    void loadImage(file);
  }
});

exportBtn.addEventListener("click", async () => {
  if (!session) {
    return;
  }
  const png = await session.mask.exportPng();
  const url = URL.createObjectURL(new Blob([png as BlobPart], { type: "image/png" }));
  const a = document.createElement("a");
  a.href = url;
  a.download = "mask.png";
  a.click();
  URL.revokeObjectURL(url);
});

function readParams(): SolverParamsForm {
  const form = { ...DEFAULT_PARAMS };
  for (const key of Object.keys(form) as (keyof SolverParamsForm)[]) {
    const input = paramsForm.elements.namedItem(key) as HTMLInputElement | null;
    if (!input) {
      continue;
    }
    const text = input.value.trim();
    if (text === "") {
      (form as Record<string, number | null>)[key] = null;
    } else {
      (form as Record<string, number | null>)[key] = Number(text);
    }
  }
  return form;
}

function fillParamsForm(): void {
  for (const [key, value] of Object.entries(DEFAULT_PARAMS)) {
    const input = paramsForm.elements.namedItem(key) as HTMLInputElement | null;
    if (input) {
      input.value = value === null ? "" : String(value);
    }
  }
}

function showResult(url: string): void {
  const img = new Image();
  img.onload = () => {
    afterCanvas.getContext("2d")!.drawImage(img, 0, 0);
    compareSection.hidden = false;
    setSplit(0.5);
  };
  img.src = url;
}

function setSplit(fraction: number): void {
  if (!session) {
    return;
  }
  const x = dividerX(fraction, session.width);
  afterClip.style.width = `${x}px`;
  dividerEl.style.left = `${x}px`;
}

compareBox.addEventListener("pointermove", (event) => {
  if (event.buttons === 0 && event.pointerType === "mouse") {
    return;
  }
  const rect = compareBox.getBoundingClientRect();
  setSplit(splitFraction(event.clientX, rect.left, rect.width));
});
compareBox.addEventListener("pointerdown", (event) => {
  const rect = compareBox.getBoundingClientRect();
  setSplit(splitFraction(event.clientX, rect.left, rect.width));
});

runBtn.addEventListener("click", async () => {
  if (!session) {
    setStatus("load an image first");
    return;
  }
  // one active job per session: drop the old poll, the server job is abandoned
  session.pollAbort?.abort();
  const abort = new AbortController();
  session.pollAbort = abort;

  const spent = timer.submitted();
  selectTime.textContent = (spent / 1000).toFixed(1);

  const client = new ServiceClient(serviceInput.value || "http://127.0.0.1:8787");
  const useDefault = defaultMaskBox.checked || session.mask.untouched;
  let maskBlob: Blob | null = null;
  if (!useDefault) {
    const png = await session.mask.exportPng();
    maskBlob = new Blob([png as BlobPart], { type: "image/png" });
  }
  progressBar.value = 0;
  runBtn.disabled = true;
  try {
    setStatus("submitting job...");
    const id = await client.createJob(
      session.sourceBlob,
      maskBlob,
      paramsPayload(readParams()),
    );
    setStatus(`job ${id.slice(0, 8)} running...`);
    const job: JobInfo = await client.pollUntilDone(id, {
      signal: abort.signal,
      onProgress: (fraction) => {
        progressBar.value = fraction;
      },
    });
    if (job.status === "failed") {
      setStatus(`job failed: ${job.error ?? "unknown error"}`);
      return;
    }
    progressBar.value = 1;
    const blob = await client.fetchResult(id);
    if (session.resultUrl) {
      URL.revokeObjectURL(session.resultUrl);
    }
    session.resultUrl = URL.createObjectURL(blob);
    showResult(session.resultUrl);
    setStatus("done; repaint and run again to refine");
  } catch (err) {
    if ((err as DOMException).name === "AbortError") {
      setStatus("superseded by a newer run");
    } else {
      setStatus(`error: ${(err as Error).message}`);
    }
  } finally {
    runBtn.disabled = false;
  }
});

fillParamsForm();
setMode("paint");
setStatus("load a photo to begin");
