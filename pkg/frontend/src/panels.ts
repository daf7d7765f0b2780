// One dashboard panel per series: latest reading (rendered verbatim) plus a
// hand-rolled SVG sparkline. Scaling points to pixels is the only arithmetic
// here, and it never feeds back into any displayed number.

import type { SeriesBuffer } from "./state.js";

const SVG_NS = "http://www.w3.org/2000/svg";

export interface PanelSpec {
  series: string;
  label: string;
  unit: string;
}

export const PANEL_SPECS: PanelSpec[] = [
  { series: "ph", label: "pH", unit: "" },
  { series: "ec", label: "conductivity", unit: "mS/cm" },
  { series: "turbidity", label: "turbidity", unit: "NTU" },
  { series: "do", label: "dissolved oxygen", unit: "mg/L" },
  { series: "liquid_level", label: "liquid level", unit: "" },
  { series: "temperature", label: "temperature", unit: "°C" },
];

export const CHART_WIDTH = 260;
export const CHART_HEIGHT = 70;
export const CHART_PAD = 4;

/** SVG path through the points, x spanning time and y spanning value range. */
export function buildPath(
  times: number[],
  values: number[],
  width = CHART_WIDTH,
  height = CHART_HEIGHT,
  pad = CHART_PAD,
): string {
  const n = Math.min(times.length, values.length);
  if (n < 2) return "";
  const t0 = times[0]!;
  const t1 = times[n - 1]!;
  let lo = Infinity;
  let hi = -Infinity;
  for (let i = 0; i < n; i++) {
    const v = values[i]!;
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  const spanX = width - 2 * pad;
  const spanY = height - 2 * pad;
  const x = (t: number): number =>
    pad + (t1 === t0 ? spanX / 2 : ((t - t0) / (t1 - t0)) * spanX);
  const y = (v: number): number =>
    hi === lo
      ? height / 2
      : pad + (1 - (v - lo) / (hi - lo)) * spanY;
  const parts: string[] = [];
  for (let i = 0; i < n; i++) {
    const command = i === 0 ? "M" : "L";
    parts.push(`${command}${round2(x(times[i]!))},${round2(y(values[i]!))}`);
  }
  return parts.join(" ");
}

function round2(value: number): number {
  return Math.round(value * 100) / 100;
}

export class DashboardPanel {
  readonly element: HTMLElement;
  private readonly latest: HTMLElement;
  private readonly count: HTMLElement;
  private readonly path: SVGPathElement;

  constructor(readonly spec: PanelSpec) {
    this.element = document.createElement("section");
    this.element.className = "panel";
    this.element.dataset["series"] = spec.series;

    const header = document.createElement("header");
    const name = document.createElement("span");
    name.className = "name";
    name.textContent = spec.label;
    const reading = document.createElement("span");
    this.latest = document.createElement("span");
    this.latest.className = "latest";
    this.latest.textContent = "–";
    reading.append(this.latest);
    if (spec.unit) {
      const unit = document.createElement("span");
      unit.className = "unit";
      unit.textContent = spec.unit;
      reading.append(unit);
    }
    header.append(name, reading);

    const svg = document.createElementNS(SVG_NS, "svg");
    svg.setAttribute("viewBox", `0 0 ${CHART_WIDTH} ${CHART_HEIGHT}`);
    svg.setAttribute("preserveAspectRatio", "none");
    this.path = document.createElementNS(SVG_NS, "path");
    svg.append(this.path);

    this.count = document.createElement("div");
    this.count.className = "count";
    this.count.textContent = "no data";

    this.element.append(header, svg, this.count);
  }

  update(buffer: SeriesBuffer): void {
    const n = buffer.values.length;
    if (n === 0) return;
    // Display fidelity: the readout is the API value's own string form.
    this.latest.textContent = String(buffer.values[n - 1]);
    this.count.textContent = `${n} point${n === 1 ? "" : "s"}`;
    this.path.setAttribute("d", buildPath(buffer.times, buffer.values));
  }
}
