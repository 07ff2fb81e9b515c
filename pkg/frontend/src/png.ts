/** Minimal 8-bit grayscale PNG encode/decode.
 *
 * The encoder is the export path for painted masks, shared between the app
 * and its tests (CompressionStream exists in browsers and in Node 20+).
 * The decoder understands only what the encoder emits (color type 0,
 * bit depth 8, filter 0) and exists for round-trip verification.
 */

const SIGNATURE = new Uint8Array([137, 80, 78, 71, 13, 10, 26, 10]);

const CRC_TABLE = (() => {
  const table = new Uint32Array(256);
  for (let n = 0; n < 256; n++) {
    let c = n;
    for (let k = 0; k < 8; k++) {
      c = c & 1 ? 0xedb88320 ^ (c >>> 1) : c >>> 1;
    }
    table[n] = c >>> 0;
  }
  return table;
})();

function crc32(bytes: Uint8Array): number {
  let crc = 0xffffffff;
  for (let i = 0; i < bytes.length; i++) {
    crc = CRC_TABLE[(crc ^ bytes[i]) & 0xff] ^ (crc >>> 8);
  }
  return (crc ^ 0xffffffff) >>> 0;
}

function chunk(type: string, data: Uint8Array): Uint8Array {
  const out = new Uint8Array(12 + data.length);
  const view = new DataView(out.buffer);
  view.setUint32(0, data.length);
  for (let i = 0; i < 4; i++) {
    out[4 + i] = type.charCodeAt(i);
  }
  out.set(data, 8);
  view.setUint32(8 + data.length, crc32(out.subarray(4, 8 + data.length)));
  return out;
}

async function pipeThrough(
  data: Uint8Array,
  stream: CompressionStream | DecompressionStream,
): Promise<Uint8Array> {
  const response = new Response(
    new Blob([data as BlobPart]).stream().pipeThrough(stream),
  );
  return new Uint8Array(await response.arrayBuffer());
}

export async function encodeGrayPng(
  width: number,
  height: number,
  gray: Uint8Array,
): Promise<Uint8Array> {
  if (gray.length !== width * height) {
    throw new Error(`buffer length ${gray.length} != ${width}x${height}`);
  }
  const ihdr = new Uint8Array(13);
  const view = new DataView(ihdr.buffer);
  view.setUint32(0, width);
  view.setUint32(4, height);
  ihdr[8] = 8; // bit depth
  ihdr[9] = 0; // grayscale
  // compression 0, filter 0, interlace 0 already zeroed

  // every scanline gets filter byte 0
  const raw = new Uint8Array(height * (width + 1));
  for (let y = 0; y < height; y++) {
    raw.set(gray.subarray(y * width, (y + 1) * width), y * (width + 1) + 1);
  }
  const idat = await pipeThrough(raw, new CompressionStream("deflate"));

  const parts = [
    SIGNATURE,
    chunk("IHDR", ihdr),
    chunk("IDAT", idat),
    chunk("IEND", new Uint8Array(0)),
  ];
  const total = parts.reduce((n, p) => n + p.length, 0);
  const out = new Uint8Array(total);
  let offset = 0;
  for (const part of parts) {
    out.set(part, offset);
    offset += part.length;
  }
  return out;
}

export interface GrayImage {
  width: number;
  height: number;
  gray: Uint8Array;
}

/** Width/height from the header of any PNG (no scanline decode). */
export function pngDims(bytes: Uint8Array): { width: number; height: number } {
  for (let i = 0; i < SIGNATURE.length; i++) {
    if (bytes[i] !== SIGNATURE[i]) {
      throw new Error("not a PNG");
    }
  }
  const view = new DataView(bytes.buffer, bytes.byteOffset, bytes.byteLength);
  return { width: view.getUint32(16), height: view.getUint32(20) };
}

export async function decodeGrayPng(bytes: Uint8Array): Promise<GrayImage> {
  for (let i = 0; i < SIGNATURE.length; i++) {
    if (bytes[i] !== SIGNATURE[i]) {
      throw new Error("not a PNG");
    }
  }
  const view = new DataView(bytes.buffer, bytes.byteOffset, bytes.byteLength);
  let pos = 8;
  let width = 0;
  let height = 0;
  const idatParts: Uint8Array[] = [];
  while (pos < bytes.length) {
    const length = view.getUint32(pos);
    const type = String.fromCharCode(...bytes.subarray(pos + 4, pos + 8));
    const data = bytes.subarray(pos + 8, pos + 8 + length);
    if (type === "IHDR") {
      const v = new DataView(data.buffer, data.byteOffset, data.byteLength);
      width = v.getUint32(0);
      height = v.getUint32(4);
      if (data[8] !== 8 || data[9] !== 0 || data[12] !== 0) {
        throw new Error("decoder only handles non-interlaced 8-bit grayscale");
      }
    } else if (type === "IDAT") {
      idatParts.push(data);
    } else if (type === "IEND") {
      break;
    }
    pos += 12 + length;
  }
  const compressed = new Uint8Array(idatParts.reduce((n, p) => n + p.length, 0));
  let offset = 0;
  for (const part of idatParts) {
    compressed.set(part, offset);
    offset += part.length;
  }
  const raw = await pipeThrough(compressed, new DecompressionStream("deflate"));
  const gray = new Uint8Array(width * height);
  for (let y = 0; y < height; y++) {
    const filter = raw[y * (width + 1)];
    if (filter !== 0) {
      throw new Error(`unsupported scanline filter ${filter}`);
    }
    gray.set(raw.subarray(y * (width + 1) + 1, (y + 1) * (width + 1)), y * width);
  }
  return { width, height, gray };
}
