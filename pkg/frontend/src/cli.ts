/**
 * Usage: node dist/cli.js render <artifact_dir> [--out <dir>]
 */

import { renderFigures } from "./render.js";

export function main(argv: string[]): number {
  const [command, dir, ...rest] = argv;
  if (command !== "render" || !dir) {
    console.error("usage: render <artifact_dir> [--out <dir>]");
    return 2;
  }
  let out: string | undefined;
  const outIdx = rest.indexOf("--out");
  if (outIdx >= 0) out = rest[outIdx + 1];

  const result = renderFigures(dir, out);
  for (const w of result.warnings) console.error(`warning: ${w}`);
  for (const r of result.rendered) console.log(r.path);
  if (result.rendered.length === 0) {
    console.error("warning: no figures rendered (empty or unrecognized artifact directory)");
  }
  return 0;
}

if (process.argv[1] && process.argv[1].endsWith("cli.js")) {
  process.exit(main(process.argv.slice(2)));
}
