/**
 * Bindings for the degrade-forge pipeline, driven through its CLI and .npy
 * array-exchange interface. Results are byte-identical to what the CLI's
 * batch commands produce for the same pixels, config, and seed.
 */

import { execFile } from 'node:child_process';
import { mkdtemp, readFile, rm, writeFile } from 'node:fs/promises';
import { tmpdir } from 'node:os';
import { join } from 'node:path';
import { promisify } from 'node:util';

import { decodeNpy, encodeNpy, PixelData } from './npy.js';

const execFileAsync = promisify(execFile);

export interface BoundImage {
  /** Row-major, channel-interleaved samples: float32 in [0,1] or uint8. */
  data: PixelData;
  height: number;
  width: number;
  channels: number;
}

export interface DegradeResult {
  lr: BoundImage;
  /** The encoded LR payload exactly as the pipeline emitted it. */
  lrBytes: Uint8Array;
  lrFormat: 'jpeg' | 'png';
  /** The manifest document exactly as the CLI writes it. */
  manifest: string;
}

export interface CliOptions {
  /** Path to the degrade-forge executable (default: $DEGRADE_FORGE_BIN or PATH). */
  binary?: string;
}

export interface DegradeOptions extends CliOptions {
  /** JSON config document; omitted keys keep the pipeline defaults. */
  config?: string;
  scale?: 2 | 4;
  variant?: number;
}

function binaryOf(opts?: CliOptions): string {
  return opts?.binary ?? process.env.DEGRADE_FORGE_BIN ?? 'degrade-forge';
}

function checkImage(img: BoundImage): void {
  const count = img.height * img.width * img.channels;
  if (img.height < 1 || img.width < 1 || count === 0 || img.data.length !== count) {
    throw new Error(
      `invalid image: ${img.height}x${img.width}x${img.channels} ` +
        `with ${img.data.length} samples`,
    );
  }
  if (img.data instanceof Float32Array) {
    for (let i = 0; i < img.data.length; i++) {
      if (!Number.isFinite(img.data[i])) {
        throw new Error(`non-finite sample at index ${i}`);
      }
    }
  }
}

async function runCli(binary: string, args: string[]): Promise<string> {
  try {
    const { stdout } = await execFileAsync(binary, args);
    return stdout;
  } catch (err) {
    const e = err as { stderr?: string; stdout?: string; message: string };
    const detail = (e.stderr || e.stdout || e.message).trim();
    throw new Error(`degrade-forge failed: ${detail}`);
  }
}

async function withTempDir<T>(fn: (dir: string) => Promise<T>): Promise<T> {
  const dir = await mkdtemp(join(tmpdir(), 'degrade-forge-'));
  try {
    return await fn(dir);
  } finally {
    await rm(dir, { recursive: true, force: true });
  }
}

async function writeImage(dir: string, name: string, img: BoundImage): Promise<string> {
  checkImage(img);
  const path = join(dir, name);
  await writeFile(path, encodeNpy(img.data, [img.height, img.width, img.channels]));
  return path;
}

async function readImage(path: string): Promise<BoundImage> {
  const { data, shape } = decodeNpy(await readFile(path));
  const [height, width, channels] = shape;
  return { data, height, width, channels };
}

function sniffFormat(bytes: Uint8Array): 'jpeg' | 'png' {
  return bytes[0] === 0xff && bytes[1] === 0xd8 ? 'jpeg' : 'png';
}

/** Degrade one HR image; bit-identical to the CLI for the same inputs. */
export async function degrade(
  hr: BoundImage,
  seed: number | bigint,
  opts?: DegradeOptions,
): Promise<DegradeResult> {
  return withTempDir(async (dir) => {
    const hrPath = await writeImage(dir, 'hr.npy', hr);
    const lrPath = join(dir, 'lr.bin');
    const npyPath = join(dir, 'lr.npy');
    const manPath = join(dir, 'manifest.json');
    const args = [
      'degrade', '--hr', hrPath, '--seed', String(seed),
      '--out-lr', lrPath, '--out-npy', npyPath, '--out-manifest', manPath,
    ];
    if (opts?.scale !== undefined) args.push('--scale', String(opts.scale));
    if (opts?.variant !== undefined) args.push('--variant', String(opts.variant));
    if (opts?.config !== undefined) {
      const cfgPath = join(dir, 'config.json');
      await writeFile(cfgPath, opts.config);
      args.push('--config', cfgPath);
    }
    await runCli(binaryOf(opts), args);
    const lrBytes = new Uint8Array(await readFile(lrPath));
    return {
      lr: await readImage(npyPath),
      lrBytes,
      lrFormat: sniffFormat(lrBytes),
      manifest: await readFile(manPath, 'utf8'),
    };
  });
}

/** Re-execute a manifest on its HR pixels; the document is trusted as-is. */
export async function replay(
  hr: BoundImage,
  manifest: string,
  opts?: CliOptions,
): Promise<DegradeResult> {
  return withTempDir(async (dir) => {
    const hrPath = await writeImage(dir, 'hr.npy', hr);
    const manPath = join(dir, 'manifest.json');
    await writeFile(manPath, manifest);
    const lrPath = join(dir, 'lr.bin');
    const npyPath = join(dir, 'lr.npy');
    await runCli(binaryOf(opts), [
      'replay', '--manifest', manPath, '--hr', hrPath,
      '--out', lrPath, '--out-npy', npyPath,
    ]);
    const lrBytes = new Uint8Array(await readFile(lrPath));
    return {
      lr: await readImage(npyPath),
      lrBytes,
      lrFormat: sniffFormat(lrBytes),
      manifest,
    };
  });
}

/** Luma-channel PSNR in dB between two equal-sized images (Infinity if equal). */
export async function psnrY(
  a: BoundImage,
  b: BoundImage,
  opts?: CliOptions,
): Promise<number> {
  return withTempDir(async (dir) => {
    const aPath = await writeImage(dir, 'a.npy', a);
    const bPath = await writeImage(dir, 'b.npy', b);
    const out = await runCli(binaryOf(opts), ['psnr', '--ref', aPath, '--dist', bPath]);
    const match = /mean:\s*(inf|[-\d.]+)\s*dB/.exec(out);
    if (!match) throw new Error(`unparseable psnr output: ${out}`);
    return match[1] === 'inf' ? Infinity : Number(match[1]);
  });
}

/** Sample a degradation plan as its JSON document. */
export async function makePlan(
  seed: number | bigint,
  opts?: DegradeOptions,
): Promise<string> {
  return withTempDir(async (dir) => {
    const args = ['plan', '--seed', String(seed)];
    if (opts?.scale !== undefined) args.push('--scale', String(opts.scale));
    if (opts?.config !== undefined) {
      const cfgPath = join(dir, 'config.json');
      await writeFile(cfgPath, opts.config);
      args.push('--config', cfgPath);
    }
    return runCli(binaryOf(opts), args);
  });
}

/** Round-trip an image through the CLI's array boundary (format conversion). */
export async function convert(
  img: BoundImage,
  opts?: CliOptions,
): Promise<BoundImage> {
  return withTempDir(async (dir) => {
    const inPath = await writeImage(dir, 'in.npy', img);
    const outPath = join(dir, 'out.npy');
    await runCli(binaryOf(opts), ['convert', '--in', inPath, '--out', outPath]);
    return readImage(outPath);
  });
}

export { encodeNpy, decodeNpy } from './npy.js';
export type { PixelData } from './npy.js';
