// Figure builders: voltage traces, setpoint traces, overhead trajectories.

import { robotIds, seriesOf, TelemetryRow } from "./csv.js";
import {
  axes,
  Box,
  DEFAULT_BOX,
  document,
  extent,
  LinearScale,
  PALETTE,
  polyline,
  referenceLine,
} from "./svg.js";

export interface ChartOptions {
  // reference voltages; defaults match the stock battery parameters
  eLb: number;
  emInReference: number; // (e_max + e_lb)/2, the overload indicator
  stationRadius: number;
  operationalRadius: number;
  robot?: number; // restrict to a single robot id
  box?: Box;
}

export const DEFAULT_OPTIONS: ChartOptions = {
  eLb: 12.0,
  emInReference: 13.4,
  stationRadius: 0.2,
  operationalRadius: 9.0,
};

function filterIds(rows: TelemetryRow[], robot?: number): number[] {
  const ids = robotIds(rows);
  if (robot === undefined) return ids;
  if (!ids.includes(robot)) {
    throw new Error(`robot ${robot} not present in telemetry (have ${ids.join(",")})`);
  }
  return [robot];
}

function timeChart(
  rows: TelemetryRow[],
  pick: (r: TelemetryRow) => number,
  title: string,
  yLabel: string,
  references: Array<[number, string]>,
  opts: ChartOptions,
): string {
  const box = opts.box ?? DEFAULT_BOX;
  const ids = filterIds(rows, opts.robot);
  const values = rows.filter((r) => opts.robot === undefined || r.robotId === opts.robot).map(pick);
  const [xLo, xHi] = extent(rows.map((r) => r.t), 0.0);
  const [yLo, yHi] = extent(values.concat(references.map(([v]) => v)));
  const sx = new LinearScale(xLo, xHi, box.margin.left, box.width - box.margin.right);
  const sy = new LinearScale(yLo, yHi, box.height - box.margin.bottom, box.margin.top);
  const body: string[] = [axes(sx, sy, "time (s)", yLabel)];
  for (const [value, label] of references) {
    body.push(referenceLine(value, sx, sy, label));
  }
  ids.forEach((id, k) => {
    body.push(
      polyline(seriesOf(rows, id, pick), sx, sy, PALETTE[k % PALETTE.length], `data-robot="${id}"`),
    );
  });
  return document(box, title, body.join("\n"));
}

export function renderVoltage(rows: TelemetryRow[], opts = DEFAULT_OPTIONS): string {
  return timeChart(
    rows,
    (r) => r.E,
    "Battery voltage",
    "E (V)",
    [[opts.eLb, `e_lb = ${opts.eLb}`]],
    opts,
  );
}

export function renderEmin(rows: TelemetryRow[], opts = DEFAULT_OPTIONS): string {
  return timeChart(
    rows,
    (r) => r.EMin,
    "Minimum-voltage setpoints",
    "E_min (V)",
    [[opts.emInReference, `(e_max+e_lb)/2 = ${opts.emInReference}`]],
    opts,
  );
}

export function renderTrajectory(rows: TelemetryRow[], opts = DEFAULT_OPTIONS): string {
  const base = opts.box ?? DEFAULT_BOX;
  const box: Box = { ...base, height: base.width }; // square canvas for geometry
  const ids = filterIds(rows, opts.robot);
  const r = opts.operationalRadius * 1.08;
  const sx = new LinearScale(-r, r, box.margin.left, box.width - box.margin.right);
  const sy = new LinearScale(-r, r, box.height - box.margin.bottom, box.margin.top);
  const cx = sx.at(0);
  const cy = sy.at(0);
  const unit = Math.abs(sx.at(1) - sx.at(0));
  const body: string[] = [axes(sx, sy, "x (m)", "y (m)")];
  body.push(
    `<circle data-role="operational-radius" cx="${cx}" cy="${cy}" r="${unit * opts.operationalRadius}" ` +
      `fill="none" stroke="#999" stroke-dasharray="4 4"/>`,
  );
  body.push(
    `<circle data-role="station" cx="${cx}" cy="${cy}" r="${unit * opts.stationRadius}" ` +
      `fill="#f5c542" stroke="#a87d00"/>`,
  );
  ids.forEach((id, k) => {
    const path = rows
      .filter((row) => row.robotId === id)
      .map((row) => [row.x, row.y] as [number, number]);
    body.push(polyline(path, sx, sy, PALETTE[k % PALETTE.length], `data-robot="${id}"`));
  });
  return document(box, "Trajectories (overhead)", body.join("\n"));
}

export type Kind = "voltage" | "emin" | "trajectory";

export function render(kind: Kind, rows: TelemetryRow[], opts = DEFAULT_OPTIONS): string {
  switch (kind) {
    case "voltage":
      return renderVoltage(rows, opts);
    case "emin":
      return renderEmin(rows, opts);
    case "trajectory":
      return renderTrajectory(rows, opts);
    default:
      throw new Error(`unknown figure kind '${kind as string}'`);
  }
}
