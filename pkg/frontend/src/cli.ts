// chargecoord-plots: regenerate figures from simulator telemetry.
//
//   node dist/cli.js --telemetry out/telemetry.csv --out figs/voltage.svg --kind voltage
//
// Optional flags: --robot <id>, --e-lb <V>, --reference <V>, --delta <m>, --r0 <m>.
// --kind all writes <out>/voltage.svg, <out>/emin.svg, <out>/trajectory.svg.

import { mkdirSync, readFileSync, writeFileSync } from "node:fs";
import { dirname, join } from "node:path";

import { DEFAULT_OPTIONS, Kind, render } from "./charts.js";
import { parseTelemetry } from "./csv.js";

export interface CliArgs {
  telemetry: string;
  out: string;
  kind: Kind | "all";
  robot?: number;
  eLb: number;
  reference: number;
  delta: number;
  r0: number;
}

export function parseArgs(argv: string[]): CliArgs {
  const args: Partial<CliArgs> = {
    eLb: DEFAULT_OPTIONS.eLb,
    reference: DEFAULT_OPTIONS.emInReference,
    delta: DEFAULT_OPTIONS.stationRadius,
    r0: DEFAULT_OPTIONS.operationalRadius,
  };
  const take = (i: number, flag: string): string => {
    const v = argv[i + 1];
    if (v === undefined) throw new Error(`flag ${flag} needs a value`);
    return v;
  };
  for (let i = 0; i < argv.length; i++) {
    const flag = argv[i];
    switch (flag) {
      case "--telemetry":
        args.telemetry = take(i++, flag);
        break;
      case "--out":
        args.out = take(i++, flag);
        break;
      case "--kind":
        args.kind = take(i++, flag) as Kind | "all";
        break;
      case "--robot":
        args.robot = Number(take(i++, flag));
        break;
      case "--e-lb":
        args.eLb = Number(take(i++, flag));
        break;
      case "--reference":
        args.reference = Number(take(i++, flag));
        break;
      case "--delta":
        args.delta = Number(take(i++, flag));
        break;
      case "--r0":
        args.r0 = Number(take(i++, flag));
        break;
      default:
        throw new Error(`unknown flag '${flag}'`);
    }
  }
  if (!args.telemetry) throw new Error("--telemetry is required");
  if (!args.out) throw new Error("--out is required");
  if (!args.kind) throw new Error("--kind is required (voltage | emin | trajectory | all)");
  const kinds = ["voltage", "emin", "trajectory", "all"];
  if (!kinds.includes(args.kind)) {
    throw new Error(`unknown figure kind '${args.kind}'`);
  }
  return args as CliArgs;
}

export function main(argv: string[]): number {
  let args: CliArgs;
  try {
    args = parseArgs(argv);
  } catch (err) {
    console.error(String(err instanceof Error ? err.message : err));
    return 2;
  }
  try {
    const rows = parseTelemetry(readFileSync(args.telemetry, "utf-8"));
    const opts = {
      ...DEFAULT_OPTIONS,
      eLb: args.eLb,
      emInReference: args.reference,
      stationRadius: args.delta,
      operationalRadius: args.r0,
      robot: args.robot,
    };
    const targets: Array<[Kind, string]> =
      args.kind === "all"
        ? [
            ["voltage", join(args.out, "voltage.svg")],
            ["emin", join(args.out, "emin.svg")],
            ["trajectory", join(args.out, "trajectory.svg")],
          ]
        : [[args.kind, args.out]];
    for (const [kind, path] of targets) {
      mkdirSync(args.kind === "all" ? args.out : dirname(path), { recursive: true });
      writeFileSync(path, render(kind, rows, opts));
      console.log(`wrote ${path}`);
    }
    return 0;
  } catch (err) {
    console.error(String(err instanceof Error ? err.message : err));
    return 1;
  }
}

const invokedDirectly =
  process.argv[1] !== undefined && import.meta.url.endsWith(process.argv[1].split("/").pop()!);
if (invokedDirectly) {
  process.exit(main(process.argv.slice(2)));
}
