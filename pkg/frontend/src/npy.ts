/**
 * Minimal NumPy .npy (format v1.0) read/write for the pixel arrays the CLI
 * exchanges: little-endian float32 and uint8, C-order, (H, W, C) shape.
 */

const MAGIC = Buffer.from('\x93NUMPY', 'latin1');

export type PixelData = Float32Array | Uint8Array;

export interface NpyArray {
  data: PixelData;
  shape: number[];
}

export function encodeNpy(data: PixelData, shape: number[]): Buffer {
  const count = shape.reduce((a, b) => a * b, 1);
  if (count !== data.length) {
    throw new Error(`shape ${shape} does not match length ${data.length}`);
  }
  const descr = data instanceof Float32Array ? '<f4' : '|u1';
  const shapeText = shape.length === 1 ? `(${shape[0]},)` : `(${shape.join(', ')})`;
  let header = `{'descr': '${descr}', 'fortran_order': False, 'shape': ${shapeText}, }`;
  const unpadded = MAGIC.length + 4 + header.length + 1;
  header += ' '.repeat((64 - (unpadded % 64)) % 64) + '\n';

  const head = Buffer.alloc(MAGIC.length + 4 + header.length);
  MAGIC.copy(head, 0);
  head[6] = 1; // major version
  head[7] = 0;
  head.writeUInt16LE(header.length, 8);
  head.write(header, 10, 'latin1');
  const payload = Buffer.from(data.buffer, data.byteOffset, data.byteLength);
  return Buffer.concat([head, payload]);
}

export function decodeNpy(raw: Buffer): NpyArray {
  if (!raw.subarray(0, 6).equals(MAGIC)) {
    throw new Error('not an npy payload');
  }
  const major = raw[6];
  const headerLen = major === 1 ? raw.readUInt16LE(8) : raw.readUInt32LE(8);
  const headerStart = major === 1 ? 10 : 12;
  const header = raw.subarray(headerStart, headerStart + headerLen).toString('latin1');

  const descr = /'descr':\s*'([^']+)'/.exec(header)?.[1];
  const fortran = /'fortran_order':\s*(True|False)/.exec(header)?.[1];
  const shapeText = /'shape':\s*\(([^)]*)\)/.exec(header)?.[1];
  if (!descr || !fortran || shapeText === undefined) {
    throw new Error(`unparseable npy header: ${header}`);
  }
  if (fortran === 'True') {
    throw new Error('fortran-order arrays are not supported');
  }
  const shape = shapeText
    .split(',')
    .map((t) => t.trim())
    .filter((t) => t.length > 0)
    .map(Number);
  const count = shape.reduce((a, b) => a * b, 1);
  const body = raw.subarray(headerStart + headerLen);

  let data: PixelData;
  if (descr === '<f4') {
    data = new Float32Array(count);
    for (let i = 0; i < count; i++) data[i] = body.readFloatLE(4 * i);
  } else if (descr === '|u1') {
    data = new Uint8Array(body.subarray(0, count));
  } else {
    throw new Error(`unsupported npy dtype ${descr}`);
  }
  return { data, shape };
}
