import { describe, expect, it } from "vitest";

import { FileEntry } from "../src/api.js";
import {
  chartPoints,
  decodePpm,
  parseSeriesCsv,
  previewKind,
} from "../src/filePreview.js";

function entry(kind: string, path: string): FileEntry {
  return { file_id: "f001", path, description: "", kind, missing: false };
}

describe("previewKind", () => {
  it("maps figures to images, series to charts, the rest to download", () => {
    expect(previewKind(entry("figure", "f001_plot.ppm"))).toBe("image");
    expect(previewKind(entry("series", "f002_rmsd.csv"))).toBe("chart");
    expect(previewKind(entry("trajectory", "f003_traj.npz"))).toBe("download");
    expect(previewKind(entry("structure", "f004_1LYZ.pdb"))).toBe("download");
  });

  it("falls back to the file extension when the kind is unfamiliar", () => {
    expect(previewKind(entry("other", "f005_thing.ppm"))).toBe("image");
    expect(previewKind(entry("other", "f006_thing.csv"))).toBe("chart");
  });
});

describe("decodePpm", () => {
  function ppm(width: number, height: number, rgb: number[]): Uint8Array {
    const header = `P6\n${width} ${height}\n255\n`;
    const bytes = new Uint8Array(header.length + rgb.length);
    for (let i = 0; i < header.length; i += 1) bytes[i] = header.charCodeAt(i);
    bytes.set(rgb, header.length);
    return bytes;
  }

  it("decodes a 2x1 pixmap into RGBA", () => {
    const image = decodePpm(ppm(2, 1, [255, 0, 0, 0, 0, 255]));
    expect(image.width).toBe(2);
    expect(image.height).toBe(1);
    expect(Array.from(image.pixels)).toEqual([255, 0, 0, 255, 0, 0, 255, 255]);
  });

  it("rejects a non-P6 header", () => {
    const bytes = new TextEncoder().encode("P3\n1 1\n255\n1 2 3\n");
    expect(() => decodePpm(bytes)).toThrow("P6");
  });

  it("rejects a truncated body", () => {
    expect(() => decodePpm(ppm(2, 2, [255, 0, 0]))).toThrow("expected 12");
  });
});

describe("parseSeriesCsv", () => {
  const text = [
    "# label: RMSD",
    "# trajectory: f003",
    "frame,rmsd_A",
    "0,0.0",
    "1,0.5",
    "2,0.4",
  ].join("\n");

  it("separates provenance comments, labels, and rows", () => {
    const series = parseSeriesCsv(text);
    expect(series.comments).toEqual(["label: RMSD", "trajectory: f003"]);
    expect(series.labels).toEqual(["frame", "rmsd_A"]);
    expect(series.rows).toEqual([
      [0, 0.0],
      [1, 0.5],
      [2, 0.4],
    ]);
  });

  it("rejects a ragged or non-numeric row", () => {
    expect(() => parseSeriesCsv("a,b\n1\n")).toThrow("bad csv row");
    expect(() => parseSeriesCsv("a,b\n1,x\n")).toThrow("bad csv row");
  });

  it("rejects a file with no header", () => {
    expect(() => parseSeriesCsv("# only comments\n")).toThrow("no header");
  });
});

describe("chartPoints", () => {
  it("scales extremes to the viewport corners", () => {
    const series = parseSeriesCsv("x,y\n0,0\n10,5\n");
    const points = chartPoints(series, 100, 50).split(" ");
    expect(points[0]).toBe("0.00,50.00");
    expect(points[1]).toBe("100.00,0.00");
  });

  it("handles a flat series without dividing by zero", () => {
    const series = parseSeriesCsv("x,y\n0,2\n1,2\n");
    expect(chartPoints(series, 100, 50)).toContain(",");
  });
});
