/** File previews: figures render as images, CSV series as line charts,
 * everything else is download-only. */

import { FileEntry } from "./api.js";

export type PreviewKind = "image" | "chart" | "download";

export function previewKind(entry: FileEntry): PreviewKind {
  if (entry.kind === "figure" || entry.path.endsWith(".ppm")) return "image";
  if (entry.kind === "series" || entry.path.endsWith(".csv")) return "chart";
  return "download";
}

export interface RasterImage {
  width: number;
  height: number;
  /** RGBA pixel data, row-major, 4 bytes per pixel. */
  pixels: Uint8ClampedArray;
}

/** Decode a binary (P6) portable pixmap into RGBA pixels.
 *
 * The service emits figures in this format; browsers do not display it
 * natively, so the client paints the pixels onto a canvas.
 */
export function decodePpm(bytes: Uint8Array): RasterImage {
  const fields: string[] = [];
  let pos = 0;
  while (fields.length < 4) {
    while (pos < bytes.length && isWhitespace(bytes[pos])) pos += 1;
    if (pos < bytes.length && bytes[pos] === 0x23) {
      // comment line
      while (pos < bytes.length && bytes[pos] !== 0x0a) pos += 1;
      continue;
    }
    let token = "";
    while (pos < bytes.length && !isWhitespace(bytes[pos])) {
      token += String.fromCharCode(bytes[pos]);
      pos += 1;
    }
    if (!token) throw new Error("truncated ppm header");
    fields.push(token);
  }
  pos += 1; // single whitespace byte after maxval
  const [magic, widthText, heightText, maxvalText] = fields;
  if (magic !== "P6") throw new Error(`not a P6 pixmap: ${magic}`);
  const width = Number(widthText);
  const height = Number(heightText);
  if (Number(maxvalText) !== 255) {
    throw new Error(`unsupported maxval ${maxvalText}`);
  }
  const expected = width * height * 3;
  const raster = bytes.subarray(pos, pos + expected);
  if (raster.length !== expected) {
    throw new Error(`pixmap body is ${raster.length} bytes, expected ${expected}`);
  }
  const pixels = new Uint8ClampedArray(width * height * 4);
  for (let i = 0; i < width * height; i += 1) {
    pixels[4 * i] = raster[3 * i];
    pixels[4 * i + 1] = raster[3 * i + 1];
    pixels[4 * i + 2] = raster[3 * i + 2];
    pixels[4 * i + 3] = 255;
  }
  return { width, height, pixels };
}

function isWhitespace(byte: number): boolean {
  return byte === 0x20 || byte === 0x09 || byte === 0x0a || byte === 0x0d;
}

export interface SeriesData {
  /** Axis labels from the header row. */
  labels: string[];
  /** One row per sample, aligned with labels. */
  rows: number[][];
  /** Provenance comments ("# label: ...", "# trajectory: ..."). */
  comments: string[];
}

/** Parse a series CSV as written by the analysis tools: comment lines
 * prefixed with '#', then a header row, then numeric rows. */
export function parseSeriesCsv(text: string): SeriesData {
  const comments: string[] = [];
  const lines = text.split("\n").filter((line) => line.trim() !== "");
  let headerIndex = 0;
  while (headerIndex < lines.length && lines[headerIndex].startsWith("#")) {
    comments.push(lines[headerIndex].slice(1).trim());
    headerIndex += 1;
  }
  if (headerIndex >= lines.length) throw new Error("csv has no header row");
  const labels = lines[headerIndex].split(",").map((s) => s.trim());
  const rows: number[][] = [];
  for (const line of lines.slice(headerIndex + 1)) {
    const values = line.split(",").map((s) => Number(s.trim()));
    if (values.length !== labels.length || values.some(Number.isNaN)) {
      throw new Error(`bad csv row: ${line}`);
    }
    rows.push(values);
  }
  return { labels, rows, comments };
}

/** Chart geometry for an SVG polyline of column 1 against column 0,
 * scaled into the given viewport. Pure data in, pure points out. */
export function chartPoints(
  series: SeriesData,
  width: number,
  height: number,
): string {
  if (series.rows.length === 0) return "";
  const xs = series.rows.map((r) => r[0]);
  const ys = series.rows.map((r) => r[1]);
  const xMin = Math.min(...xs);
  const xMax = Math.max(...xs);
  const yMin = Math.min(...ys);
  const yMax = Math.max(...ys);
  const xSpan = xMax - xMin || 1;
  const ySpan = yMax - yMin || 1;
  return series.rows
    .map((r) => {
      const px = ((r[0] - xMin) / xSpan) * width;
      const py = height - ((r[1] - yMin) / ySpan) * height;
      return `${px.toFixed(2)},${py.toFixed(2)}`;
    })
    .join(" ");
}
