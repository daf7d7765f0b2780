// Fleet map: configured node positions as hollow circles, GPS-reported fixes
// as filled markers. Plain SVG with a linear lat/lon projection.

import type { NodeSummary } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";

export interface Projection {
  x(lon: number): number;
  y(lat: number): number;
}

export function makeProjection(
  lats: number[],
  lons: number[],
  width: number,
  height: number,
  pad: number,
): Projection {
  const latLo = Math.min(...lats);
  const latHi = Math.max(...lats);
  const lonLo = Math.min(...lons);
  const lonHi = Math.max(...lons);
  const spanX = width - 2 * pad;
  const spanY = height - 2 * pad;
  return {
    x: (lon) =>
      lonHi === lonLo
        ? width / 2
        : pad + ((lon - lonLo) / (lonHi - lonLo)) * spanX,
    y: (lat) =>
      latHi === latLo
        ? height / 2
        : pad + (1 - (lat - latLo) / (latHi - latLo)) * spanY,
  };
}

export class FleetMap {
  readonly element: HTMLElement;
  private readonly svg: SVGSVGElement;

  constructor(
    readonly width = 360,
    readonly height = 240,
    readonly pad = 24,
  ) {
    this.element = document.createElement("div");
    this.element.className = "map";
    this.svg = document.createElementNS(SVG_NS, "svg");
    this.svg.setAttribute("viewBox", `0 0 ${width} ${height}`);
    this.element.append(this.svg);
  }

  update(nodes: NodeSummary[], fixes: Map<string, [number, number]>): void {
    const lats = nodes.map((n) => n.lat);
    const lons = nodes.map((n) => n.lon);
    for (const [lat, lon] of fixes.values()) {
      lats.push(lat);
      lons.push(lon);
    }
    if (lats.length === 0) return;
    const project = makeProjection(
      lats,
      lons,
      this.width,
      this.height,
      this.pad,
    );

    this.svg.replaceChildren();
    for (const node of nodes) {
      const marker = document.createElementNS(SVG_NS, "circle");
      marker.setAttribute("class", "node-marker");
      marker.setAttribute("cx", String(project.x(node.lon)));
      marker.setAttribute("cy", String(project.y(node.lat)));
      marker.setAttribute("r", "6");
      marker.dataset["device"] = node.device_id;

      const label = document.createElementNS(SVG_NS, "text");
      label.setAttribute("x", String(project.x(node.lon) + 9));
      label.setAttribute("y", String(project.y(node.lat) + 3));
      label.textContent = node.device_id;

      this.svg.append(marker, label);
    }
    for (const [device, [lat, lon]] of fixes) {
      const marker = document.createElementNS(SVG_NS, "circle");
      marker.setAttribute("class", "fix-marker");
      marker.setAttribute("cx", String(project.x(lon)));
      marker.setAttribute("cy", String(project.y(lat)));
      marker.setAttribute("r", "4");
      marker.dataset["fix"] = device;
      this.svg.append(marker);
    }
  }
}
