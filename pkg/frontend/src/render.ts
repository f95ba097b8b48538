/**
 * Render every available figure kind from an artifact directory.
 */

import { existsSync, readFileSync, writeFileSync } from "fs";
import { join } from "path";

import { parseCsv } from "./csv.js";
import { FIGURE_KINDS, FigureKind, contractionFigure, observablesTrace, probeHist, rateLoglog } from "./figures.js";

export interface RenderResult {
  rendered: Array<{ kind: FigureKind; path: string }>;
  warnings: string[];
}

function readJson(path: string): unknown {
  return JSON.parse(readFileSync(path, "utf-8"));
}

export function renderFigures(artifactDir: string, outDir?: string): RenderResult {
  const out = outDir ?? artifactDir;
  const result: RenderResult = { rendered: [], warnings: [] };

  const sources: Record<FigureKind, () => string> = {
    rate_loglog: () => {
      const profiles = join(artifactDir, "profiles.csv");
      const rates = join(artifactDir, "rates.json");
      if (!existsSync(profiles)) throw new Error("profiles.csv missing");
      if (!existsSync(rates)) throw new Error("rates.json missing");
      return rateLoglog(parseCsv(readFileSync(profiles, "utf-8")), readJson(rates) as never);
    },
    observables_trace: () => {
      const series = join(artifactDir, "series.csv");
      if (!existsSync(series)) throw new Error("series.csv missing");
      return observablesTrace(parseCsv(readFileSync(series, "utf-8")));
    },
    contraction: () => {
      const report = join(artifactDir, "contraction.json");
      if (!existsSync(report)) throw new Error("contraction.json missing");
      return contractionFigure(readJson(report) as never);
    },
    probe_hist: () => {
      const probes = join(artifactDir, "probes.json");
      if (!existsSync(probes)) throw new Error("probes.json missing");
      return probeHist(readJson(probes) as never);
    },
  };

  for (const kind of FIGURE_KINDS) {
    try {
      const svg = sources[kind]();
      const path = join(out, `${kind}.svg`);
      writeFileSync(path, svg);
      result.rendered.push({ kind, path });
    } catch (err) {
      result.warnings.push(`${kind}: ${(err as Error).message}`);
    }
  }
  return result;
}
