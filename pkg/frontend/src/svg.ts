/**
 * Tiny SVG builder: axes, polylines, bars and text, nothing else.
 * Figures are deterministic text files so tests can assert on annotations.
 */

export interface Extent {
  min: number;
  max: number;
}

export interface Scale {
  (x: number): number;
  ticks: number[];
  label: (t: number) => string;
}

export function linearScale(domain: Extent, range: Extent, tickCount = 5): Scale {
  const span = domain.max - domain.min || 1;
  const fn = ((x: number) =>
    range.min + ((x - domain.min) / span) * (range.max - range.min)) as Scale;
  const step = niceStep(span / tickCount);
  const first = Math.ceil(domain.min / step) * step;
  fn.ticks = [];
  for (let t = first; t <= domain.max + 1e-12 * Math.abs(span); t += step) fn.ticks.push(t);
  fn.label = (t) => formatTick(t);
  return fn;
}

export function logScale(domain: Extent, range: Extent): Scale {
  const lo = Math.log10(domain.min);
  const hi = Math.log10(domain.max);
  const span = hi - lo || 1;
  const fn = ((x: number) =>
    range.min + ((Math.log10(x) - lo) / span) * (range.max - range.min)) as Scale;
  fn.ticks = [];
  for (let d = Math.ceil(lo); d <= Math.floor(hi); d++) fn.ticks.push(10 ** d);
  if (fn.ticks.length === 0) fn.ticks = [domain.min, domain.max];
  fn.label = (t) => formatTick(t);
  return fn;
}

function niceStep(raw: number): number {
  const mag = 10 ** Math.floor(Math.log10(Math.abs(raw) || 1));
  const m = raw / mag;
  const nice = m >= 5 ? 10 : m >= 2 ? 5 : m >= 1 ? 2 : 1;
  return nice * mag;
}

function formatTick(t: number): string {
  if (t === 0) return "0";
  const a = Math.abs(t);
  if (a >= 1e4 || a < 1e-3) return t.toExponential(0);
  return String(Number(t.toPrecision(6)));
}

const esc = (s: string) => s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");

export class Svg {
  private parts: string[] = [];
  constructor(readonly width: number, readonly height: number) {}

  rect(x: number, y: number, w: number, h: number, fill: string, opts = ""): void {
    this.parts.push(`<rect x="${x.toFixed(2)}" y="${y.toFixed(2)}" width="${w.toFixed(2)}" height="${h.toFixed(2)}" fill="${fill}" ${opts}/>`);
  }

  line(x1: number, y1: number, x2: number, y2: number, stroke: string, width = 1, dash = ""): void {
    const d = dash ? ` stroke-dasharray="${dash}"` : "";
    this.parts.push(`<line x1="${x1.toFixed(2)}" y1="${y1.toFixed(2)}" x2="${x2.toFixed(2)}" y2="${y2.toFixed(2)}" stroke="${stroke}" stroke-width="${width}"${d}/>`);
  }

  polyline(points: Array<[number, number]>, stroke: string, width = 1.5): void {
    const pts = points.map(([x, y]) => `${x.toFixed(2)},${y.toFixed(2)}`).join(" ");
    this.parts.push(`<polyline fill="none" stroke="${stroke}" stroke-width="${width}" points="${pts}"/>`);
  }

  circle(x: number, y: number, r: number, fill: string): void {
    this.parts.push(`<circle cx="${x.toFixed(2)}" cy="${y.toFixed(2)}" r="${r}" fill="${fill}"/>`);
  }

  text(x: number, y: number, content: string, opts: { size?: number; anchor?: string; fill?: string; cls?: string } = {}): void {
    const size = opts.size ?? 11;
    const anchor = opts.anchor ?? "start";
    const fill = opts.fill ?? "#222";
    const cls = opts.cls ? ` class="${opts.cls}"` : "";
    this.parts.push(`<text x="${x.toFixed(2)}" y="${y.toFixed(2)}" font-size="${size}" text-anchor="${anchor}" fill="${fill}" font-family="sans-serif"${cls}>${esc(content)}</text>`);
  }

  render(): string {
    return `<svg xmlns="http://www.w3.org/2000/svg" width="${this.width}" height="${this.height}" viewBox="0 0 ${this.width} ${this.height}">\n<rect width="100%" height="100%" fill="white"/>\n${this.parts.join("\n")}\n</svg>\n`;
  }
}

export interface Frame {
  x: Scale;
  y: Scale;
  left: number;
  right: number;
  top: number;
  bottom: number;
}

/** Draw axes with ticks inside the standard margins and return the frame. */
export function axes(
  svg: Svg,
  xDomain: Extent,
  yDomain: Extent,
  opts: { logX?: boolean; logY?: boolean; xLabel?: string; yLabel?: string; title?: string },
): Frame {
  const left = 62, right = svg.width - 16, top = 34, bottom = svg.height - 40;
  const x = opts.logX ? logScale(xDomain, { min: left, max: right }) : linearScale(xDomain, { min: left, max: right });
  const y = opts.logY ? logScale(yDomain, { min: bottom, max: top }) : linearScale(yDomain, { min: bottom, max: top });
  svg.line(left, bottom, right, bottom, "#444");
  svg.line(left, bottom, left, top, "#444");
  for (const t of x.ticks) {
    const px = x(t);
    svg.line(px, bottom, px, bottom + 4, "#444");
    svg.text(px, bottom + 16, x.label(t), { anchor: "middle", size: 10 });
  }
  for (const t of y.ticks) {
    const py = y(t);
    svg.line(left - 4, py, left, py, "#444");
    svg.text(left - 6, py + 3, y.label(t), { anchor: "end", size: 10 });
  }
  if (opts.xLabel) svg.text((left + right) / 2, svg.height - 8, opts.xLabel, { anchor: "middle" });
  if (opts.yLabel) svg.text(14, top - 12, opts.yLabel, { size: 11 });
  if (opts.title) svg.text((left + right) / 2, 18, opts.title, { anchor: "middle", size: 13 });
  return { x, y, left, right, top, bottom };
}
