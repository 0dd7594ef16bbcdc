/**
 * Minimal deterministic SVG panel builder: linear axes, polyline series,
 * error bands, dashed markers.  Pure string assembly, no DOM.
 */

export interface Point {
  x: number;
  y: number;
}

export interface Series {
  label: string;
  color: string;
  points: Point[];
  /** symmetric half-width of the error band, per point */
  errors?: number[];
  dash?: string;
  width?: number;
  markers?: boolean;
  cssClass?: string;
}

export interface VLine {
  x: number;
  color?: string;
  label?: string;
}

export interface HLine {
  y: number;
  color?: string;
  label?: string;
}

export interface Shade {
  from: number;
  to: number;
  color?: string;
}

export interface Panel {
  title: string;
  xLabel: string;
  yLabel: string;
  series: Series[];
  vLines?: VLine[];
  hLines?: HLine[];
  shade?: Shade;
  yZeroLine?: boolean;
}

const WIDTH = 760;
const PANEL_HEIGHT = 300;
const MARGIN = { left: 72, right: 150, top: 34, bottom: 46 };

function fmt(value: number): string {
  return Number(value.toPrecision(6)).toString();
}

interface Scale {
  (value: number): number;
  min: number;
  max: number;
}

function linearScale(min: number, max: number, out0: number, out1: number): Scale {
  if (!(max > min)) {
    max = min + 1;
    min = min - 1;
  }
  const scale = ((value: number) =>
    out0 + ((value - min) / (max - min)) * (out1 - out0)) as Scale;
  scale.min = min;
  scale.max = max;
  return scale;
}

function ticks(min: number, max: number, count = 6): number[] {
  const span = max - min;
  const step = Math.pow(10, Math.floor(Math.log10(span / count)));
  const candidates = [step, 2 * step, 2.5 * step, 5 * step, 10 * step];
  const chosen = candidates.find((c) => span / c <= count) ?? 10 * step;
  const start = Math.ceil(min / chosen) * chosen;
  const out: number[] = [];
  for (let v = start; v <= max + 1e-12 * span; v += chosen) {
    out.push(Math.abs(v) < 1e-12 * span ? 0 : v);
  }
  return out;
}

function dataRange(panel: Panel): { x: [number, number]; y: [number, number] } {
  let xMin = Infinity, xMax = -Infinity, yMin = Infinity, yMax = -Infinity;
  for (const s of panel.series) {
    s.points.forEach((p, i) => {
      xMin = Math.min(xMin, p.x);
      xMax = Math.max(xMax, p.x);
      const err = s.errors ? s.errors[i] : 0;
      yMin = Math.min(yMin, p.y - err);
      yMax = Math.max(yMax, p.y + err);
    });
  }
  for (const h of panel.hLines ?? []) {
    yMin = Math.min(yMin, h.y);
    yMax = Math.max(yMax, h.y);
  }
  if (panel.yZeroLine) {
    yMin = Math.min(yMin, 0);
    yMax = Math.max(yMax, 0);
  }
  const pad = 0.06 * (yMax - yMin || 1);
  return { x: [xMin, xMax], y: [yMin - pad, yMax + pad] };
}

function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

function renderPanel(panel: Panel, yOffset: number): string {
  const { x: [xMin, xMax], y: [yMin, yMax] } = dataRange(panel);
  const x0 = MARGIN.left;
  const x1 = WIDTH - MARGIN.right;
  const y0 = yOffset + PANEL_HEIGHT - MARGIN.bottom;
  const y1 = yOffset + MARGIN.top;
  const sx = linearScale(xMin, xMax, x0, x1);
  const sy = linearScale(yMin, yMax, y0, y1);
  const parts: string[] = [];

  if (panel.shade) {
    const from = Math.max(panel.shade.from, sx.min);
    const to = Math.min(panel.shade.to, sx.max);
    if (to > from) {
      parts.push(
        `<rect class="shade" x="${fmt(sx(from))}" y="${fmt(y1)}" ` +
        `width="${fmt(sx(to) - sx(from))}" height="${fmt(y0 - y1)}" ` +
        `fill="${panel.shade.color ?? "#000000"}" opacity="0.07"/>`);
    }
  }

  // frame and ticks
  parts.push(
    `<rect x="${x0}" y="${fmt(y1)}" width="${x1 - x0}" height="${fmt(y0 - y1)}" ` +
    `fill="none" stroke="#444" stroke-width="1"/>`);
  for (const t of ticks(sx.min, sx.max)) {
    parts.push(
      `<line x1="${fmt(sx(t))}" y1="${fmt(y0)}" x2="${fmt(sx(t))}" y2="${fmt(y0 + 5)}" stroke="#444"/>`,
      `<text x="${fmt(sx(t))}" y="${fmt(y0 + 18)}" text-anchor="middle" class="tick">${fmt(t)}</text>`);
  }
  for (const t of ticks(sy.min, sy.max, 5)) {
    parts.push(
      `<line x1="${x0 - 5}" y1="${fmt(sy(t))}" x2="${x0}" y2="${fmt(sy(t))}" stroke="#444"/>`,
      `<text x="${x0 - 8}" y="${fmt(sy(t) + 4)}" text-anchor="end" class="tick">${fmt(t)}</text>`);
  }

  if (panel.yZeroLine && sy.min < 0 && sy.max > 0) {
    parts.push(
      `<line x1="${x0}" y1="${fmt(sy(0))}" x2="${x1}" y2="${fmt(sy(0))}" ` +
      `stroke="#999" stroke-width="0.7"/>`);
  }

  for (const v of panel.vLines ?? []) {
    if (v.x < sx.min || v.x > sx.max) continue;
    parts.push(
      `<line class="marker-v" x1="${fmt(sx(v.x))}" y1="${fmt(y1)}" ` +
      `x2="${fmt(sx(v.x))}" y2="${fmt(y0)}" stroke="${v.color ?? "#555"}" ` +
      `stroke-width="1" stroke-dasharray="5,4"/>`);
  }
  for (const h of panel.hLines ?? []) {
    parts.push(
      `<line class="marker-h" x1="${x0}" y1="${fmt(sy(h.y))}" x2="${x1}" ` +
      `y2="${fmt(sy(h.y))}" stroke="${h.color ?? "#555"}" stroke-width="1" ` +
      `stroke-dasharray="7,4"/>`);
  }

  for (const s of panel.series) {
    const cls = s.cssClass ? ` ${s.cssClass}` : "";
    if (s.errors) {
      const upper = s.points.map((p, i) => `${fmt(sx(p.x))},${fmt(sy(p.y + s.errors![i]))}`);
      const lower = s.points
        .map((p, i) => `${fmt(sx(p.x))},${fmt(sy(p.y - s.errors![i]))}`)
        .reverse();
      parts.push(
        `<polygon class="band${cls}" points="${upper.concat(lower).join(" ")}" ` +
        `fill="${s.color}" opacity="0.15"/>`);
    }
    const pts = s.points.map((p) => `${fmt(sx(p.x))},${fmt(sy(p.y))}`).join(" ");
    const dash = s.dash ? ` stroke-dasharray="${s.dash}"` : "";
    parts.push(
      `<polyline class="series${cls}" points="${pts}" fill="none" ` +
      `stroke="${s.color}" stroke-width="${s.width ?? 1.6}"${dash}/>`);
    if (s.markers) {
      for (const p of s.points) {
        parts.push(
          `<circle class="mark${cls}" cx="${fmt(sx(p.x))}" cy="${fmt(sy(p.y))}" ` +
          `r="2.6" fill="none" stroke="${s.color}"/>`);
      }
    }
  }

  // legend in the right margin
  let ly = y1 + 4;
  for (const s of panel.series) {
    const dash = s.dash ? ` stroke-dasharray="${s.dash}"` : "";
    parts.push(
      `<line x1="${x1 + 10}" y1="${fmt(ly)}" x2="${x1 + 34}" y2="${fmt(ly)}" ` +
      `stroke="${s.color}" stroke-width="2"${dash}/>`,
      `<text x="${x1 + 40}" y="${fmt(ly + 4)}" class="legend">${esc(s.label)}</text>`);
    ly += 16;
  }

  parts.push(
    `<text x="${x0}" y="${fmt(y1 - 10)}" class="title">${esc(panel.title)}</text>`,
    `<text x="${fmt((x0 + x1) / 2)}" y="${fmt(y0 + 36)}" text-anchor="middle" class="axis">${esc(panel.xLabel)}</text>`,
    `<text transform="translate(${x0 - 48},${fmt((y0 + y1) / 2)}) rotate(-90)" ` +
    `text-anchor="middle" class="axis">${esc(panel.yLabel)}</text>`);
  return parts.join("\n");
}

export function renderSvg(panels: Panel[]): string {
  const height = panels.length * PANEL_HEIGHT + 10;
  const body = panels.map((panel, i) => renderPanel(panel, i * PANEL_HEIGHT)).join("\n");
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${height}" ` +
    `viewBox="0 0 ${WIDTH} ${height}">`,
    `<style>text{font-family:Helvetica,Arial,sans-serif}` +
    `.tick{font-size:11px;fill:#333}.legend{font-size:11px;fill:#222}` +
    `.title{font-size:13px;font-weight:bold;fill:#111}.axis{font-size:12px;fill:#222}</style>`,
    `<rect width="100%" height="100%" fill="white"/>`,
    body,
    `</svg>`,
    "",
  ].join("\n");
}
