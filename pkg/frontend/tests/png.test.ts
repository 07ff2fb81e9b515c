import { execFileSync } from "node:child_process";
import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { describe, expect, it } from "vitest";

import { MaskLayer } from "../src/mask-layer.js";
import { decodeGrayPng, encodeGrayPng } from "../src/png.js";

function pythonWithPackage(): string | null {
  for (const exe of ["python3", "python"]) {
    try {
      execFileSync(exe, ["-c", "import unreflect"], { stdio: "ignore" });
      return exe;
    } catch {
      // try the next interpreter
    }
  }
  return null;
}

describe("gray PNG codec", () => {
  it("round-trips arbitrary buffers exactly", async () => {
    const w = 23;
    const h = 17;
    const gray = new Uint8Array(w * h);
    for (let i = 0; i < gray.length; i++) {
      gray[i] = (i * 37 + 11) % 256;
    }
    const png = await encodeGrayPng(w, h, gray);
    const back = await decodeGrayPng(png);
    expect(back.width).toBe(w);
    expect(back.height).toBe(h);
    expect([...back.gray]).toEqual([...gray]);
  });

  it("emits the PNG signature and IHDR fields", async () => {
    const png = await encodeGrayPng(4, 2, new Uint8Array(8));
    expect([...png.slice(0, 8)]).toEqual([137, 80, 78, 71, 13, 10, 26, 10]);
    const view = new DataView(png.buffer, png.byteOffset);
    expect(view.getUint32(16)).toBe(4); // width
    expect(view.getUint32(20)).toBe(2); // height
    expect(png[24]).toBe(8); // bit depth
    expect(png[25]).toBe(0); // grayscale
  });

  it("rejects mismatched buffer sizes", async () => {
    await expect(encodeGrayPng(4, 4, new Uint8Array(3))).rejects.toThrow();
  });

  it("exports painted masks at source dims with exact values", async () => {
    const mask = new MaskLayer(30, 20);
    mask.stroke([{ x: 8, y: 10 }], { radius: 5, intensity: 1, mode: "paint" });
    const png = await mask.exportPng();
    const back = await decodeGrayPng(png);
    expect(back.width).toBe(30);
    expect(back.height).toBe(20);
    expect([...back.gray]).toEqual([...mask.gray]);
  });

  it("round-trips through the service-side mask loader within 1/255", async () => {
    const python = pythonWithPackage();
    if (!python) {
      console.warn("python interpreter with the solver package not found; skipping");
      return;
    }
    const mask = new MaskLayer(32, 24);
    mask.stroke(
      [
        { x: 6, y: 6 },
        { x: 24, y: 16 },
      ],
      { radius: 4, intensity: 1, mode: "paint" },
    );
    const dir = mkdtempSync(join(tmpdir(), "maskrt-"));
    const pngPath = join(dir, "mask.png");
    const grayPath = join(dir, "gray.bin");
    writeFileSync(pngPath, await mask.exportPng());
    writeFileSync(grayPath, mask.gray);

    const script = `
import sys
import numpy as np
from unreflect.selection import load_mask

phi = load_mask(sys.argv[1])
painted = np.fromfile(sys.argv[2], dtype=np.uint8).reshape(phi.shape) / 255.0
assert phi.shape == (24, 32), phi.shape
err = np.abs(phi - painted).max()
assert err <= 1.0 / 255 + 1e-12, err
assert phi[6, 6] == 1.0 and phi[0, 31] == 0.0
print("ok", err)
`;
    const out = execFileSync(python, ["-c", script, pngPath, grayPath], {
      encoding: "utf-8",
    });
    expect(out).toContain("ok");
  });
});
