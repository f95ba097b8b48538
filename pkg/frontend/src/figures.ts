/**
 * The four figure kinds rendered from an nlslab artifact directory.
 *
 * Figures never recompute physics: every plotted number comes from the
 * artifact CSV/JSON files, and the rate figure's slope annotation is the
 * rate_fit value read from rates.json verbatim.
 */

import { CsvRow } from "./csv.js";
import { Svg, axes } from "./svg.js";

export type FigureKind = "rate_loglog" | "observables_trace" | "contraction" | "probe_hist";

export const FIGURE_KINDS: FigureKind[] = [
  "rate_loglog",
  "observables_trace",
  "contraction",
  "probe_hist",
];

const SERIES_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];

interface RatesJson {
  reference_gamma?: number;
  wkm2?: { slope?: number; intercept?: number; error?: string; reference_slope?: number };
  wk?: { slope?: number; error?: string };
}

function extent(values: number[], padFactor = 0): { min: number; max: number } {
  let min = Math.min(...values);
  let max = Math.max(...values);
  if (padFactor > 0) {
    const pad = (max - min || Math.abs(max) || 1) * padFactor;
    min -= pad;
    max += pad;
  }
  return { min, max };
}

/** Log-log final-state error vs t, reference slope -gamma, annotated fit. */
export function rateLoglog(profiles: CsvRow[], rates: RatesJson): string {
  const series = new Map<string, Array<[number, number]>>();
  for (const row of profiles) {
    const name = row["series"];
    if (name !== "err_wkm2" && name !== "err_wk") continue;
    const t = Number(row["x"]);
    const e = Number(row["value_re"]);
    if (!(t > 0) || !(e > 0)) continue;
    if (!series.has(name)) series.set(name, []);
    series.get(name)!.push([t, e]);
  }
  if (series.size === 0) throw new Error("profiles.csv has no err_wkm2/err_wk rows");
  const all = [...series.values()].flat();
  const svg = new Svg(560, 400);
  const frame = axes(svg, extent(all.map((p) => p[0])), extent(all.map((p) => p[1])), {
    logX: true,
    logY: true,
    xLabel: "t",
    yLabel: "final-state error",
    title: "Convergence to the final state",
  });
  let ci = 0;
  for (const [name, pts] of series) {
    pts.sort((a, b) => a[0] - b[0]);
    const color = SERIES_COLORS[ci++ % SERIES_COLORS.length];
    svg.polyline(pts.map(([t, e]) => [frame.x(t), frame.y(e)]), color);
    for (const [t, e] of pts) svg.circle(frame.x(t), frame.y(e), 2, color);
    svg.text(frame.right - 4, frame.top + 14 * ci, name, { anchor: "end", fill: color });
  }
  const fit = rates.wkm2;
  if (fit && typeof fit.slope === "number") {
    // reference-slope guide through the first err_wkm2 point
    const gamma = rates.reference_gamma ?? 1;
    const pts = series.get("err_wkm2") ?? all;
    const [t0, e0] = pts[0];
    const t1 = pts[pts.length - 1][0];
    const guide: Array<[number, number]> = [
      [frame.x(t0), frame.y(e0)],
      [frame.x(t1), frame.y(e0 * (t1 / t0) ** -gamma)],
    ];
    svg.line(guide[0][0], guide[0][1], guide[1][0], guide[1][1], "#888", 1, "5,4");
    svg.text(frame.right - 4, frame.top + 14 * (ci + 1), `reference slope ${-gamma}`, {
      anchor: "end",
      fill: "#888",
    });
    svg.text(frame.left + 8, frame.top + 14, `fitted slope = ${fit.slope}`, {
      cls: "slope-annotation",
      size: 12,
    });
  }
  return svg.render();
}

const TRACE_COLUMNS = ["mass", "energy", "h", "Linf"] as const;

/** Observable traces vs t (normalized by each trace's initial value). */
export function observablesTrace(seriesRows: CsvRow[]): string {
  const have = TRACE_COLUMNS.filter((c) => seriesRows.length > 0 && c in seriesRows[0]);
  if (have.length === 0) throw new Error("series.csv has no observable columns");
  const ts = seriesRows.map((r) => Number(r["t"]));
  const svg = new Svg(560, 400);
  const traces = have.map((name) => {
    const vals = seriesRows.map((r) => Number(r[name]));
    const base = Math.abs(vals.find((v) => v !== 0) ?? 1) || 1;
    return { name, pts: ts.map((t, i) => [t, vals[i] / base] as [number, number]) };
  });
  const allY = traces.flatMap((tr) => tr.pts.map((p) => p[1]));
  const frame = axes(svg, extent(ts), extent(allY, 0.08), {
    xLabel: "t",
    yLabel: "observable / initial value",
    title: "Conservation traces",
  });
  traces.forEach((tr, i) => {
    const color = SERIES_COLORS[i % SERIES_COLORS.length];
    svg.polyline(tr.pts.map(([t, v]) => [frame.x(t), frame.y(v)]), color);
    svg.text(frame.right - 4, frame.top + 14 * (i + 1), tr.name, { anchor: "end", fill: color });
  });
  return svg.render();
}

interface ContractionJson {
  d_m?: number[];
  ratios?: number[];
  K?: number;
  S_used?: number;
}

/** Per-iteration contraction ratios as bars, with the 1/2 threshold line. */
export function contractionFigure(report: ContractionJson): string {
  const ratios = report.ratios ?? [];
  const distances = report.d_m ?? [];
  if (ratios.length === 0 && distances.length === 0) {
    throw new Error("contraction.json has no d_m/ratios");
  }
  const svg = new Svg(560, 400);
  const values = ratios.length > 0 ? ratios : distances;
  const label = ratios.length > 0 ? "d_{m+1} / d_m" : "d_m";
  const frame = axes(svg, { min: 0, max: values.length + 1 }, extent([0, ...values], 0.1), {
    xLabel: "iteration m",
    yLabel: label,
    title: `Picard contraction (S = ${report.S_used ?? "?"}, K = ${fmt(report.K)})`,
  });
  const bw = Math.min(36, (frame.right - frame.left) / (values.length + 1) * 0.6);
  values.forEach((v, i) => {
    const cx = frame.x(i + 1);
    svg.rect(cx - bw / 2, frame.y(v), bw, frame.bottom - frame.y(v), "#1f77b4");
  });
  if (ratios.length > 0) {
    svg.line(frame.left, frame.y(0.5), frame.right, frame.y(0.5), "#d62728", 1, "5,4");
    svg.text(frame.right - 4, frame.y(0.5) - 6, "ratio 1/2", { anchor: "end", fill: "#d62728" });
  }
  return svg.render();
}

function fmt(x?: number): string {
  return x === undefined ? "?" : Number(x.toPrecision(4)).toString();
}

type ProbesJson = Record<string, { ratios?: Array<Record<string, unknown>>; max_ratio?: number }>;

/** Histogram of all probe ratios, annotated with per-probe maxima. */
export function probeHist(probes: ProbesJson): string {
  const ratios: number[] = [];
  const maxima: string[] = [];
  for (const [name, rep] of Object.entries(probes)) {
    for (const r of rep.ratios ?? []) {
      const v = Number((r as Record<string, unknown>)["ratio"]);
      if (Number.isFinite(v)) ratios.push(v);
    }
    if (typeof rep.max_ratio === "number") maxima.push(`${name}: max ${fmt(rep.max_ratio)}`);
  }
  if (ratios.length === 0) throw new Error("probes.json has no ratio entries");
  const nBins = 24;
  const { min, max } = extent(ratios, 0.02);
  const width = (max - min) / nBins || 1;
  const counts = new Array<number>(nBins).fill(0);
  for (const v of ratios) {
    const b = Math.min(nBins - 1, Math.max(0, Math.floor((v - min) / width)));
    counts[b] += 1;
  }
  const svg = new Svg(560, 400);
  const frame = axes(svg, { min, max }, { min: 0, max: Math.max(...counts) * 1.1 }, {
    xLabel: "probe ratio (constant stripped)",
    yLabel: "count",
    title: "Inequality probe ratios",
  });
  counts.forEach((c, i) => {
    if (c === 0) return;
    const x0 = frame.x(min + i * width);
    const x1 = frame.x(min + (i + 1) * width);
    svg.rect(x0, frame.y(c), Math.max(1, x1 - x0 - 1), frame.bottom - frame.y(c), "#2ca02c");
  });
  maxima.forEach((m, i) => svg.text(frame.right - 4, frame.top + 14 * (i + 1), m, { anchor: "end" }));
  return svg.render();
}
