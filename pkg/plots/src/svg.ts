/**
 * Minimal hand-rolled SVG chart primitives: multi-panel line charts,
 * parametric traces, and heatmap panels. Pure string generation, so a
 * given input always renders to identical bytes.
 */

export interface Series {
  x: number[];
  y: number[];
  color: string;
  label: string;
  width?: number;
  dash?: string;
}

export interface PanelOptions {
  title: string;
  xLabel: string;
  yLabel: string;
  series: Series[];
  logY?: boolean;
  yMin?: number;
  yMax?: number;
  equalAspect?: boolean;
}

export interface HeatPanelOptions {
  title: string;
  xLabel: string;
  yLabel: string;
  x: number[]; // cell centers, ascending
  y: number[];
  z: number[][]; // [yIndex][xIndex]
  zLabel: string;
}

export function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export function niceTicks(min: number, max: number, count: number): number[] {
  const range = max - min || 1;
  const rough = range / count;
  const mag = Math.pow(10, Math.floor(Math.log10(rough)));
  const step = [1, 2, 5, 10].map((m) => m * mag).find((n) => n >= rough) ?? rough;
  const start = Math.ceil(min / step) * step;
  const ticks: number[] = [];
  for (let v = start; v <= max + step * 1e-9; v += step) {
    ticks.push(Math.abs(v) < step * 1e-9 ? 0 : v);
  }
  return ticks;
}

function logTicks(min: number, max: number): number[] {
  const ticks: number[] = [];
  const lo = Math.floor(Math.log10(min));
  const hi = Math.ceil(Math.log10(max));
  for (let e = lo; e <= hi; e++) ticks.push(Math.pow(10, e));
  return ticks.filter((t) => t >= min / 1.0001 && t <= max * 1.0001);
}

function fmt(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 0.01 && a < 10000) {
    return Number(v.toPrecision(4)).toString();
  }
  return v.toExponential(1);
}

const PANEL_W = 320;
const PANEL_H = 260;
const ML = 62;
const MR = 14;
const MT = 30;
const MB = 46;

/** One cartesian panel at offset (ox, oy); returns SVG fragment. */
export function linePanel(ox: number, oy: number, opt: PanelOptions, clipId: string): string {
  const pw = PANEL_W - ML - MR;
  const ph = PANEL_H - MT - MB;
  const finite = (v: number) => Number.isFinite(v);

  const xsAll = opt.series.flatMap((s) => s.x.filter(finite));
  let ysAll = opt.series.flatMap((s) => s.y.filter(finite));
  if (opt.logY) ysAll = ysAll.filter((v) => v > 0);
  if (xsAll.length === 0 || ysAll.length === 0) {
    throw new Error(`panel '${opt.title}': no finite data to plot`);
  }
  const xMin = Math.min(...xsAll);
  const xMax = Math.max(...xsAll);
  let yMin = opt.yMin ?? Math.min(...ysAll);
  let yMax = opt.yMax ?? Math.max(...ysAll);
  if (!opt.logY) {
    const pad = 0.06 * (yMax - yMin || 1);
    if (opt.yMin === undefined) yMin -= pad;
    if (opt.yMax === undefined) yMax += pad;
  }

  const xOf = (v: number) => ox + ML + ((v - xMin) / (xMax - xMin || 1)) * pw;
  const yOf = (v: number) =>
    opt.logY
      ? oy + MT + ph - ((Math.log10(v) - Math.log10(yMin)) / (Math.log10(yMax) - Math.log10(yMin) || 1)) * ph
      : oy + MT + ph - ((v - yMin) / (yMax - yMin || 1)) * ph;

  let s = "";
  s += `<defs><clipPath id="${clipId}"><rect x="${ox + ML}" y="${oy + MT}" width="${pw}" height="${ph}"/></clipPath></defs>\n`;
  s += `<rect x="${ox + ML}" y="${oy + MT}" width="${pw}" height="${ph}" fill="none" stroke="#333" stroke-width="0.8"/>\n`;
  s += `<text x="${ox + ML + pw / 2}" y="${oy + MT - 8}" text-anchor="middle" font-size="11" font-weight="600" fill="#222">${esc(opt.title)}</text>\n`;

  const yTicks = opt.logY ? logTicks(yMin, yMax) : niceTicks(yMin, yMax, 5);
  for (const t of yTicks) {
    const y = yOf(t);
    s += `<line x1="${ox + ML}" y1="${y.toFixed(2)}" x2="${ox + ML + pw}" y2="${y.toFixed(2)}" stroke="#eee" stroke-width="0.5"/>\n`;
    s += `<line x1="${ox + ML - 3}" y1="${y.toFixed(2)}" x2="${ox + ML}" y2="${y.toFixed(2)}" stroke="#333" stroke-width="0.6"/>\n`;
    s += `<text x="${ox + ML - 6}" y="${(y + 3).toFixed(2)}" text-anchor="end" font-size="9" fill="#444">${esc(fmt(t))}</text>\n`;
  }
  for (const t of niceTicks(xMin, xMax, 5)) {
    const x = xOf(t);
    s += `<line x1="${x.toFixed(2)}" y1="${oy + MT + ph}" x2="${x.toFixed(2)}" y2="${oy + MT + ph + 3}" stroke="#333" stroke-width="0.6"/>\n`;
    s += `<text x="${x.toFixed(2)}" y="${oy + MT + ph + 14}" text-anchor="middle" font-size="9" fill="#444">${esc(fmt(t))}</text>\n`;
  }
  s += `<text x="${ox + ML + pw / 2}" y="${oy + PANEL_H - 8}" text-anchor="middle" font-size="10" fill="#222">${esc(opt.xLabel)}</text>\n`;
  s += `<text x="${ox + 14}" y="${oy + MT + ph / 2}" text-anchor="middle" font-size="10" fill="#222" transform="rotate(-90,${ox + 14},${oy + MT + ph / 2})">${esc(opt.yLabel)}</text>\n`;

  for (const sr of opt.series) {
    // split at non-finite values so divergences break the line
    let segment: string[] = [];
    const segments: string[][] = [];
    for (let i = 0; i < sr.x.length; i++) {
      const yv = sr.y[i];
      const drawable = finite(sr.x[i]) && finite(yv) && (!opt.logY || yv > 0);
      if (drawable) {
        segment.push(`${xOf(sr.x[i]).toFixed(2)},${yOf(yv).toFixed(2)}`);
      } else if (segment.length > 0) {
        segments.push(segment);
        segment = [];
      }
    }
    if (segment.length > 0) segments.push(segment);
    for (const seg of segments) {
      if (seg.length === 1) {
        const [x, y] = seg[0].split(",");
        s += `<circle cx="${x}" cy="${y}" r="1.6" fill="${sr.color}" clip-path="url(#${clipId})"/>\n`;
      } else {
        s += `<polyline clip-path="url(#${clipId})" fill="none" stroke="${sr.color}" stroke-width="${sr.width ?? 1.3}" ${sr.dash ? `stroke-dasharray="${sr.dash}" ` : ""}points="${seg.join(" ")}"/>\n`;
      }
    }
  }

  // legend, top-right inside the panel
  let ly = oy + MT + 10;
  for (const sr of opt.series) {
    const lx = ox + ML + pw - 96;
    s += `<line x1="${lx}" y1="${ly}" x2="${lx + 16}" y2="${ly}" stroke="${sr.color}" stroke-width="1.5" ${sr.dash ? `stroke-dasharray="${sr.dash}" ` : ""}/>\n`;
    s += `<text x="${lx + 20}" y="${ly + 3}" font-size="8.5" fill="#333">${esc(sr.label)}</text>\n`;
    ly += 11;
  }
  return s;
}

const HEAT_STOPS: Array<[number, [number, number, number]]> = [
  [0.0, [68, 1, 84]],
  [0.25, [59, 82, 139]],
  [0.5, [33, 145, 140]],
  [0.75, [94, 201, 98]],
  [1.0, [253, 231, 37]],
];

export function heatColor(t: number): string {
  const x = Math.min(Math.max(t, 0), 1);
  for (let i = 1; i < HEAT_STOPS.length; i++) {
    const [t1, c1] = HEAT_STOPS[i - 1];
    const [t2, c2] = HEAT_STOPS[i];
    if (x <= t2) {
      const u = (x - t1) / (t2 - t1);
      const rgb = c1.map((a, k) => Math.round(a + u * (c2[k] - a)));
      return `rgb(${rgb[0]},${rgb[1]},${rgb[2]})`;
    }
  }
  return "rgb(253,231,37)";
}

export function heatPanel(ox: number, oy: number, opt: HeatPanelOptions): string {
  const pw = PANEL_W - ML - MR - 18; // leave room for the colorbar
  const ph = PANEL_H - MT - MB;
  const nx = opt.x.length;
  const ny = opt.y.length;
  const flat = opt.z.flat().filter((v) => Number.isFinite(v));
  if (flat.length === 0) throw new Error(`panel '${opt.title}': no finite data`);
  const zMin = Math.min(...flat);
  const zMax = Math.max(...flat);

  let s = "";
  s += `<text x="${ox + ML + pw / 2}" y="${oy + MT - 8}" text-anchor="middle" font-size="11" font-weight="600" fill="#222">${esc(opt.title)}</text>\n`;
  const cw = pw / nx;
  const ch = ph / ny;
  for (let j = 0; j < ny; j++) {
    for (let i = 0; i < nx; i++) {
      const v = opt.z[j][i];
      const t = Number.isFinite(v) ? (v - zMin) / (zMax - zMin || 1) : 0;
      const x = ox + ML + i * cw;
      const y = oy + MT + ph - (j + 1) * ch;
      s += `<rect x="${x.toFixed(2)}" y="${y.toFixed(2)}" width="${(cw + 0.5).toFixed(2)}" height="${(ch + 0.5).toFixed(2)}" fill="${heatColor(t)}"/>\n`;
    }
  }
  s += `<rect x="${ox + ML}" y="${oy + MT}" width="${pw}" height="${ph}" fill="none" stroke="#333" stroke-width="0.8"/>\n`;

  const xOf = (v: number) =>
    ox + ML + ((v - opt.x[0]) / (opt.x[nx - 1] - opt.x[0] || 1)) * pw;
  const yOf = (v: number) =>
    oy + MT + ph - ((v - opt.y[0]) / (opt.y[ny - 1] - opt.y[0] || 1)) * ph;
  for (const t of niceTicks(opt.x[0], opt.x[nx - 1], 4)) {
    s += `<text x="${xOf(t).toFixed(2)}" y="${oy + MT + ph + 14}" text-anchor="middle" font-size="9" fill="#444">${esc(fmt(t))}</text>\n`;
  }
  for (const t of niceTicks(opt.y[0], opt.y[ny - 1], 5)) {
    s += `<text x="${ox + ML - 6}" y="${(yOf(t) + 3).toFixed(2)}" text-anchor="end" font-size="9" fill="#444">${esc(fmt(t))}</text>\n`;
  }
  s += `<text x="${ox + ML + pw / 2}" y="${oy + PANEL_H - 8}" text-anchor="middle" font-size="10" fill="#222">${esc(opt.xLabel)}</text>\n`;
  s += `<text x="${ox + 14}" y="${oy + MT + ph / 2}" text-anchor="middle" font-size="10" fill="#222" transform="rotate(-90,${ox + 14},${oy + MT + ph / 2})">${esc(opt.yLabel)}</text>\n`;

  // colorbar
  const cbx = ox + ML + pw + 4;
  const steps = 24;
  for (let k = 0; k < steps; k++) {
    const y = oy + MT + ph - ((k + 1) * ph) / steps;
    s += `<rect x="${cbx}" y="${y.toFixed(2)}" width="8" height="${(ph / steps + 0.5).toFixed(2)}" fill="${heatColor((k + 0.5) / steps)}"/>\n`;
  }
  s += `<text x="${cbx + 4}" y="${oy + MT + ph + 14}" text-anchor="middle" font-size="8" fill="#444">${esc(fmt(zMin))}</text>\n`;
  s += `<text x="${cbx + 4}" y="${oy + MT - 4}" text-anchor="middle" font-size="8" fill="#444">${esc(fmt(zMax))}</text>\n`;
  s += `<text x="${cbx + 22}" y="${oy + MT + ph / 2}" text-anchor="middle" font-size="8.5" fill="#333" transform="rotate(90,${cbx + 22},${oy + MT + ph / 2})">${esc(opt.zLabel)}</text>\n`;
  return s;
}

export function document(cols: number, rows: number, body: string, title: string): string {
  const w = cols * PANEL_W;
  const h = rows * PANEL_H + 22;
  let s = `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${w} ${h}" font-family="Helvetica, Arial, sans-serif">\n`;
  s += `<rect width="${w}" height="${h}" fill="#fff"/>\n`;
  s += `<text x="${w / 2}" y="16" text-anchor="middle" font-size="12" font-weight="600" fill="#111">${esc(title)}</text>\n`;
  s += `<g transform="translate(0,22)">\n${body}</g>\n</svg>\n`;
  return s;
}

export const PANEL = { W: PANEL_W, H: PANEL_H };
