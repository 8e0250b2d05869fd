// Strict parser for the simulator's telemetry CSV.

export interface TelemetryRow {
  t: number;
  robotId: number;
  x: number;
  y: number;
  vx: number;
  vy: number;
  E: number;
  EMin: number;
  hE: number;
  TL: number;
  mode: string;
  activeConstraint: string;
}

const REQUIRED = [
  "t",
  "robot_id",
  "x",
  "y",
  "vx",
  "vy",
  "E",
  "E_min",
  "h_e",
  "T_L",
  "mode",
  "active_constraint",
];

export function parseTelemetry(text: string): TelemetryRow[] {
  const lines = text.split(/\r?\n/).filter((l) => l.trim().length > 0);
  if (lines.length === 0) {
    throw new Error("telemetry is empty");
  }
  const header = lines[0].split(",");
  const col = new Map<string, number>();
  header.forEach((name, i) => col.set(name.trim(), i));
  for (const name of REQUIRED) {
    if (!col.has(name)) {
      throw new Error(`telemetry is missing column '${name}'`);
    }
  }
  if (lines.length === 1) {
    throw new Error("telemetry has a header but no rows");
  }
  const idx = REQUIRED.map((name) => col.get(name)!);
  const rows: TelemetryRow[] = [];
  for (let k = 1; k < lines.length; k++) {
    const parts = lines[k].split(",");
    if (parts.length < header.length) {
      throw new Error(`telemetry row ${k} has ${parts.length} fields, expected ${header.length}`);
    }
    const num = (j: number): number => {
      const v = Number(parts[idx[j]]);
      if (!Number.isFinite(v)) {
        throw new Error(`telemetry row ${k}: field '${REQUIRED[j]}' is not a number`);
      }
      return v;
    };
    rows.push({
      t: num(0),
      robotId: num(1),
      x: num(2),
      y: num(3),
      vx: num(4),
      vy: num(5),
      E: num(6),
      EMin: num(7),
      hE: num(8),
      TL: num(9),
      mode: parts[idx[10]],
      activeConstraint: parts[idx[11]],
    });
  }
  return rows;
}

export function robotIds(rows: TelemetryRow[]): number[] {
  return [...new Set(rows.map((r) => r.robotId))].sort((a, b) => a - b);
}

export function seriesOf(
  rows: TelemetryRow[],
  robotId: number,
  pick: (r: TelemetryRow) => number,
): Array<[number, number]> {
  return rows.filter((r) => r.robotId === robotId).map((r) => [r.t, pick(r)]);
}
