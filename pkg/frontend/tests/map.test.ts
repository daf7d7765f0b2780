// @vitest-environment happy-dom
import { describe, expect, test } from "vitest";

import { FleetMap, makeProjection } from "../src/map.js";
import type { NodeSummary } from "../src/types.js";

function node(device_id: string, lat: number, lon: number): NodeSummary {
  return {
    device_id,
    lat,
    lon,
    profile: "regulator",
    sampling_period_s: 600,
    phase: "standby",
    gps_mode: "off",
    cycles: 0,
    charge_mas: 0,
    energy_j: 0,
    gps_energy_j: 0,
    last_seen: null,
    last_values: {},
    battery_remaining: 1,
    fix_position: null,
  };
}

describe("makeProjection", () => {
  test("maps the bounding box onto the padded chart, north up", () => {
    const p = makeProjection([45.0, 46.0], [12.0, 13.0], 100, 100, 0);
    expect(p.x(12.0)).toBe(0);
    expect(p.x(13.0)).toBe(100);
    expect(p.y(45.0)).toBe(100); // south at the bottom
    expect(p.y(46.0)).toBe(0); // north at the top
    expect(p.x(12.5)).toBe(50);
    expect(p.y(45.5)).toBe(50);
  });

  test("honors padding", () => {
    const p = makeProjection([0, 1], [0, 1], 100, 100, 10);
    expect(p.x(0)).toBe(10);
    expect(p.x(1)).toBe(90);
    expect(p.y(1)).toBe(10);
    expect(p.y(0)).toBe(90);
  });

  test("degenerate extents collapse to the center", () => {
    const p = makeProjection([45.44], [12.33], 360, 240, 24);
    expect(p.x(12.33)).toBe(180);
    expect(p.y(45.44)).toBe(120);
  });
});

describe("FleetMap", () => {
  test("renders one hollow marker and label per node", () => {
    const map = new FleetMap(100, 100, 0);
    map.update([node("buoy-01", 45.0, 12.0), node("buoy-02", 46.0, 13.0)], new Map());
    const markers = map.element.querySelectorAll("circle.node-marker");
    expect(markers.length).toBe(2);
    expect(markers[0]?.getAttribute("data-device")).toBe("buoy-01");
    expect(markers[1]?.getAttribute("data-device")).toBe("buoy-02");
    const labels = [...map.element.querySelectorAll("text")].map(
      (t) => t.textContent,
    );
    expect(labels).toEqual(["buoy-01", "buoy-02"]);
    // buoy-01 is the south-west corner of the box.
    expect(markers[0]?.getAttribute("cx")).toBe("0");
    expect(markers[0]?.getAttribute("cy")).toBe("100");
  });

  test("GPS fixes appear as filled markers keyed by device", () => {
    const map = new FleetMap(100, 100, 0);
    const fixes = new Map<string, [number, number]>([
      ["buoy-01", [45.5, 12.5]],
    ]);
    map.update([node("buoy-01", 45.0, 12.0), node("buoy-02", 46.0, 13.0)], fixes);
    const fix = map.element.querySelector('circle[data-fix="buoy-01"]');
    expect(fix).not.toBeNull();
    expect(fix?.getAttribute("class")).toBe("fix-marker");
    expect(fix?.getAttribute("cx")).toBe("50");
    expect(fix?.getAttribute("cy")).toBe("50");
  });

  test("a fix outside the node box widens the projection", () => {
    const map = new FleetMap(100, 100, 0);
    const fixes = new Map<string, [number, number]>([["buoy-01", [47.0, 12.0]]]);
    map.update([node("buoy-01", 45.0, 12.0), node("buoy-02", 46.0, 13.0)], fixes);
    const fix = map.element.querySelector('circle[data-fix="buoy-01"]');
    expect(fix?.getAttribute("cy")).toBe("0"); // new northern extreme
  });

  test("redraw replaces markers instead of stacking them", () => {
    const map = new FleetMap(100, 100, 0);
    const nodes = [node("buoy-01", 45.0, 12.0), node("buoy-02", 46.0, 13.0)];
    map.update(nodes, new Map());
    map.update(nodes, new Map());
    expect(map.element.querySelectorAll("circle").length).toBe(2);
  });

  test("nothing to draw leaves the svg empty", () => {
    const map = new FleetMap();
    map.update([], new Map());
    expect(map.element.querySelectorAll("circle").length).toBe(0);
  });
});
