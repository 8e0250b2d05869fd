// Small deterministic SVG builder: linear scales, polylines, circles, axes.

export interface Box {
  width: number;
  height: number;
  margin: { top: number; right: number; bottom: number; left: number };
}

export const DEFAULT_BOX: Box = {
  width: 760,
  height: 420,
  margin: { top: 28, right: 16, bottom: 44, left: 58 },
};

export class LinearScale {
  constructor(
    readonly d0: number,
    readonly d1: number,
    readonly r0: number,
    readonly r1: number,
  ) {}

  at(v: number): number {
    const span = this.d1 - this.d0;
    const f = span === 0 ? 0.5 : (v - this.d0) / span;
    return this.r0 + f * (this.r1 - this.r0);
  }

  ticks(n = 6): number[] {
    const span = this.d1 - this.d0;
    if (span === 0) return [this.d0];
    const rawStep = span / n;
    const mag = Math.pow(10, Math.floor(Math.log10(Math.abs(rawStep))));
    const step = [1, 2, 5, 10].map((m) => m * mag).find((s) => span / s <= n) ?? rawStep;
    const first = Math.ceil(this.d0 / step) * step;
    const out: number[] = [];
    for (let v = first; v <= this.d1 + 1e-9; v += step) out.push(Number(v.toPrecision(12)));
    return out;
  }
}

export function extent(values: number[], pad = 0.05): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  const span = hi - lo || 1;
  return [lo - pad * span, hi + pad * span];
}

export const PALETTE = [
  "#1f77b4",
  "#d62728",
  "#2ca02c",
  "#9467bd",
  "#ff7f0e",
  "#17becf",
  "#8c564b",
  "#e377c2",
];

function fmt(v: number): string {
  return Number.isInteger(v) ? String(v) : String(Number(v.toPrecision(6)));
}

export function polyline(
  pts: Array<[number, number]>,
  sx: LinearScale,
  sy: LinearScale,
  stroke: string,
  attrs = "",
): string {
  const d = pts.map(([x, y]) => `${fmt(sx.at(x))},${fmt(sy.at(y))}`).join(" ");
  return `<polyline fill="none" stroke="${stroke}" stroke-width="1.5" points="${d}" ${attrs}/>`;
}

export function referenceLine(
  y: number,
  sx: LinearScale,
  sy: LinearScale,
  label: string,
): string {
  const py = fmt(sy.at(y));
  return (
    `<line data-role="reference" x1="${fmt(sx.r0)}" y1="${py}" x2="${fmt(sx.r1)}" y2="${py}" ` +
    `stroke="#555" stroke-dasharray="6 4"/>` +
    `<text x="${fmt(sx.r1 - 4)}" y="${fmt(sy.at(y) - 5)}" text-anchor="end" font-size="11" fill="#555">${label}</text>`
  );
}

export function axes(
  sx: LinearScale,
  sy: LinearScale,
  xLabel: string,
  yLabel: string,
): string {
  const parts: string[] = [];
  const y0 = fmt(sy.r0);
  const x0 = fmt(sx.r0);
  parts.push(`<line x1="${x0}" y1="${y0}" x2="${fmt(sx.r1)}" y2="${y0}" stroke="#222"/>`);
  parts.push(`<line x1="${x0}" y1="${y0}" x2="${x0}" y2="${fmt(sy.r1)}" stroke="#222"/>`);
  for (const v of sx.ticks()) {
    const px = fmt(sx.at(v));
    parts.push(`<line x1="${px}" y1="${y0}" x2="${px}" y2="${fmt(sy.r0 + 5)}" stroke="#222"/>`);
    parts.push(
      `<text x="${px}" y="${fmt(sy.r0 + 18)}" text-anchor="middle" font-size="11">${fmt(v)}</text>`,
    );
  }
  for (const v of sy.ticks()) {
    const py = fmt(sy.at(v));
    parts.push(`<line x1="${x0}" y1="${py}" x2="${fmt(sx.r0 - 5)}" y2="${py}" stroke="#222"/>`);
    parts.push(
      `<text x="${fmt(sx.r0 - 8)}" y="${fmt(sy.at(v) + 4)}" text-anchor="end" font-size="11">${fmt(v)}</text>`,
    );
  }
  const cx = fmt((sx.r0 + sx.r1) / 2);
  parts.push(`<text x="${cx}" y="${fmt(sy.r0 + 36)}" text-anchor="middle" font-size="12">${xLabel}</text>`);
  parts.push(
    `<text x="14" y="${fmt((sy.r0 + sy.r1) / 2)}" font-size="12" ` +
      `transform="rotate(-90 14 ${fmt((sy.r0 + sy.r1) / 2)})" text-anchor="middle">${yLabel}</text>`,
  );
  return parts.join("\n");
}

export function document(box: Box, title: string, body: string): string {
  return (
    `<svg xmlns="http://www.w3.org/2000/svg" width="${box.width}" height="${box.height}" ` +
    `viewBox="0 0 ${box.width} ${box.height}" font-family="sans-serif">\n` +
    `<rect width="100%" height="100%" fill="white"/>\n` +
    `<text x="${box.width / 2}" y="18" text-anchor="middle" font-size="13">${title}</text>\n` +
    body +
    `\n</svg>\n`
  );
}
