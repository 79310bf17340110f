/**
 * The GCTC logits container: 13-byte header (magic "GCTC", u8 version,
 * u32 rows, u32 cols, all little-endian) followed by row-major f64.
 */

const MAGIC = "GCTC";
const VERSION = 1;
const HEADER_BYTES = 13;

/** Row-major 64-bit matrix; data.length must equal rows * cols. */
export interface Matrix {
  rows: number;
  cols: number;
  data: Float64Array;
}

export function matrix(rows: number, cols: number, values: ArrayLike<number>): Matrix {
  const data = Float64Array.from(values);
  if (data.length !== rows * cols) {
    throw new Error(`matrix needs ${rows * cols} values, got ${data.length}`);
  }
  return { rows, cols, data };
}

export function encodeGctc(m: Matrix): Buffer {
  if (m.data.length !== m.rows * m.cols) {
    throw new Error(`matrix data length ${m.data.length} != ${m.rows} * ${m.cols}`);
  }
  const buf = Buffer.alloc(HEADER_BYTES + 8 * m.data.length);
  buf.write(MAGIC, 0, "ascii");
  buf.writeUInt8(VERSION, 4);
  buf.writeUInt32LE(m.rows, 5);
  buf.writeUInt32LE(m.cols, 9);
  for (let i = 0; i < m.data.length; i++) {
    buf.writeDoubleLE(m.data[i], HEADER_BYTES + 8 * i);
  }
  return buf;
}

export function decodeGctc(buf: Buffer): Matrix {
  if (buf.length < HEADER_BYTES || buf.toString("ascii", 0, 4) !== MAGIC) {
    throw new Error("not a GCTC container (bad magic)");
  }
  const version = buf.readUInt8(4);
  if (version !== VERSION) {
    throw new Error(`unsupported GCTC version ${version}`);
  }
  const rows = buf.readUInt32LE(5);
  const cols = buf.readUInt32LE(9);
  const expected = HEADER_BYTES + 8 * rows * cols;
  if (buf.length !== expected) {
    throw new Error(`GCTC payload truncated: expected ${expected} bytes, got ${buf.length}`);
  }
  const data = new Float64Array(rows * cols);
  for (let i = 0; i < data.length; i++) {
    data[i] = buf.readDoubleLE(HEADER_BYTES + 8 * i);
  }
  return { rows, cols, data };
}
