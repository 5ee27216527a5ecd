// Stats views: descriptive summary table and the hourly mood profile.
//
// The hourly chart draws one polyline per run of consecutive hours.
// Hours with no data produce a visible break in the line instead of a
// dip to zero; a lone hour becomes a dot.

import type { DescriptiveStats, HourlyPoint, HourlyStats } from "../types.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const CHART_W = 480;
const CHART_H = 120;

export interface StatsView {
  root: HTMLElement;
  updateDescriptive(payload: DescriptiveStats): void;
  updateHourly(payload: HourlyStats): void;
}

/** Split points into runs of consecutive hours (the chart's segments). */
export function hourlySegments(points: HourlyPoint[]): HourlyPoint[][] {
  const sorted = [...points].sort((a, b) => a.hour - b.hour);
  const segments: HourlyPoint[][] = [];
  let run: HourlyPoint[] = [];
  for (const point of sorted) {
    const prev = run[run.length - 1];
    if (prev !== undefined && point.hour !== prev.hour + 1) {
      segments.push(run);
      run = [];
    }
    run.push(point);
  }
  if (run.length > 0) {
    segments.push(run);
  }
  return segments;
}

function x(hour: number): number {
  return (hour / 23) * (CHART_W - 20) + 10;
}

function y(mean: number): number {
  // means live on the 0..2 scale; invert so up is more
  return CHART_H - 10 - (mean / 2) * (CHART_H - 20);
}

function drawSeries(
  svg: SVGSVGElement,
  segments: HourlyPoint[][],
  pick: (p: HourlyPoint) => number,
  cssClass: string
): void {
  for (const segment of segments) {
    if (segment.length === 1) {
      const only = segment[0];
      if (only === undefined) continue;
      const dot = document.createElementNS(SVG_NS, "circle");
      dot.setAttribute("cx", String(x(only.hour)));
      dot.setAttribute("cy", String(y(pick(only))));
      dot.setAttribute("r", "2.5");
      dot.setAttribute("class", `${cssClass} dot`);
      svg.appendChild(dot);
      continue;
    }
    const line = document.createElementNS(SVG_NS, "polyline");
    line.setAttribute(
      "points",
      segment.map((p) => `${x(p.hour)},${y(pick(p))}`).join(" ")
    );
    line.setAttribute("fill", "none");
    line.setAttribute("class", cssClass);
    svg.appendChild(line);
  }
}

export function renderStats(container: HTMLElement): StatsView {
  const root = document.createElement("section");
  root.className = "stats-panel";

  const heading = document.createElement("h2");
  heading.textContent = "Your stats";
  root.appendChild(heading);

  const summary = document.createElement("div");
  summary.className = "descriptive";
  root.appendChild(summary);

  const chartTitle = document.createElement("h3");
  chartTitle.textContent = "Mood by hour";
  root.appendChild(chartTitle);

  const svg = document.createElementNS(SVG_NS, "svg");
  svg.setAttribute("viewBox", `0 0 ${CHART_W} ${CHART_H}`);
  svg.setAttribute("class", "hourly-chart");
  root.appendChild(svg);

  container.appendChild(root);

  return {
    root,
    updateDescriptive(payload) {
      summary.textContent = "";
      if (!payload.available) {
        const reason = document.createElement("p");
        reason.className = "empty-state";
        reason.textContent = payload.reason ?? "nothing recorded yet";
        summary.appendChild(reason);
        return;
      }
      const table = document.createElement("table");
      const head = document.createElement("tr");
      for (const title of ["", "n", "mean", "sd", "low", "medium", "high"]) {
        const th = document.createElement("th");
        th.textContent = title;
        head.appendChild(th);
      }
      table.appendChild(head);
      const blocks = [
        ["pleasance", payload.pleasance],
        ["activation", payload.activation],
      ] as const;
      for (const [label, block] of blocks) {
        if (!block) continue;
        const tr = document.createElement("tr");
        tr.dataset.target = label;
        const cells = [
          label,
          String(block.n),
          block.mean.toFixed(4),
          block.sd.toFixed(4),
          String(block.counts["0"] ?? 0),
          String(block.counts["1"] ?? 0),
          String(block.counts["2"] ?? 0),
        ];
        for (const value of cells) {
          const td = document.createElement("td");
          td.textContent = value;
          tr.appendChild(td);
        }
        table.appendChild(tr);
      }
      summary.appendChild(table);
    },
    updateHourly(payload) {
      svg.textContent = "";
      const segments = hourlySegments(payload.hours);
      drawSeries(svg, segments, (p) => p.mean_pleasance, "series-pleasance");
      drawSeries(svg, segments, (p) => p.mean_activation, "series-activation");
    },
  };
}
