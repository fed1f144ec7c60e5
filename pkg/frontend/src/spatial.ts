/** Spatial view: concentration fill (contour cells, value circles, or NAPL
 *  bubbles), well markers with red-detect / black-non-detect labels, flow
 *  arrows normalized per frame, and overlay polylines. */

import { rampColor, valueFraction } from './color.js';
import { fmt } from './format.js';
import type { DisplayMode } from './state.js';
import type { FlowField, SliceGrid } from './types.js';

const SVG_NS = 'http://www.w3.org/2000/svg';
const MAX_ARROW_PX = 40;

export interface SpatialOptions {
  display: DisplayMode;
  /** shared color scale (animation); defaults to this slice's own range */
  vmin?: number;
  vmax?: number;
  onWellClick?: (wellId: string) => void;
}

interface Projection {
  sx: (x: number) => number;
  sy: (y: number) => number;
  cellW: number;
  cellH: number;
}

function projection(grid: SliceGrid, width: number, height: number, pad: number): Projection {
  const x0 = grid.xs[0];
  const x1 = grid.xs[grid.xs.length - 1];
  const y0 = grid.ys[0];
  const y1 = grid.ys[grid.ys.length - 1];
  const spanX = Math.max(x1 - x0, 1e-12);
  const spanY = Math.max(y1 - y0, 1e-12);
  // site coordinates have aspect ratio 1
  const scale = Math.min((width - 2 * pad) / spanX, (height - 2 * pad) / spanY);
  return {
    sx: (x) => pad + (x - x0) * scale,
    sy: (y) => height - pad - (y - y0) * scale,
    cellW: (scale * spanX) / Math.max(grid.xs.length - 1, 1),
    cellH: (scale * spanY) / Math.max(grid.ys.length - 1, 1),
  };
}

function el(name: string, attrs: Record<string, string | number>, text?: string) {
  const node = document.createElementNS(SVG_NS, name);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, String(value));
  }
  if (text !== undefined) node.textContent = text;
  return node;
}

function sliceRange(grid: SliceGrid): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const row of grid.values) {
    for (const v of row) {
      if (v === null) continue;
      if (v < lo) lo = v;
      if (v > hi) hi = v;
    }
  }
  if (!Number.isFinite(lo)) return [0, 1];
  return [lo, hi];
}

export function renderSpatial(
  svg: SVGSVGElement,
  grid: SliceGrid,
  flow: FlowField | null,
  options: SpatialOptions,
): void {
  const width = 720;
  const height = 560;
  const pad = 40;
  svg.setAttribute('viewBox', `0 0 ${width} ${height}`);
  svg.replaceChildren();
  const proj = projection(grid, width, height, pad);
  const [autoMin, autoMax] = sliceRange(grid);
  const vmin = options.vmin ?? autoMin;
  const vmax = options.vmax ?? autoMax;

  const title = el('text', {
    class: 'plot-title', x: width / 2, y: 20, 'text-anchor': 'middle',
  }, `${grid.solute} (${grid.units}) — ${grid.label}`);
  svg.appendChild(title);

  if (options.display === 'contour') {
    for (let iy = 0; iy < grid.ys.length; iy++) {
      for (let ix = 0; ix < grid.xs.length; ix++) {
        const v = grid.values[iy][ix];
        if (v === null) continue;
        svg.appendChild(el('rect', {
          class: 'cell',
          x: proj.sx(grid.xs[ix]) - proj.cellW / 2,
          y: proj.sy(grid.ys[iy]) - proj.cellH / 2,
          width: proj.cellW + 0.5,
          height: proj.cellH + 0.5,
          fill: rampColor(valueFraction(v, vmin, vmax)),
        }));
      }
    }
  } else if (options.display === 'circles') {
    const latest = latestSamples(grid);
    for (const s of latest.values()) {
      const r = 4 + 18 * valueFraction(s.value, vmin, vmax);
      svg.appendChild(el('circle', {
        class: 'value-circle',
        cx: proj.sx(s.x), cy: proj.sy(s.y), r,
        fill: rampColor(valueFraction(s.value, vmin, vmax)),
        'fill-opacity': 0.8,
        stroke: '#333',
      }));
    }
  } else {
    // napl-circles: bubble plot of free-product thickness
    const coords = new Map(grid.wells.map((w) => [w.well_id, w]));
    const maxThickness = Math.max(...grid.napl.map((n) => n.thickness), 0);
    for (const n of grid.napl) {
      const w = coords.get(n.well_id);
      if (!w || maxThickness <= 0) continue;
      const r = 5 + 25 * (n.thickness / maxThickness);
      svg.appendChild(el('circle', {
        class: 'napl-circle',
        cx: proj.sx(w.x), cy: proj.sy(w.y), r,
        fill: '#8b5a2b', 'fill-opacity': 0.65, stroke: '#5b3a1b',
      }));
    }
  }

  for (const line of grid.overlays) {
    const points = line.map(([x, y]) => `${proj.sx(x)},${proj.sy(y)}`).join(' ');
    svg.appendChild(el('polyline', {
      class: 'overlay', points, fill: 'none', stroke: '#9ecfe8', 'stroke-width': 2,
    }));
  }

  renderArrows(svg, grid, flow, proj);
  renderWells(svg, grid, proj, options);
  renderColorKey(svg, vmin, vmax, width, height, pad);
}

function latestSamples(grid: SliceGrid) {
  const latest = new Map<string, SliceGrid['samples'][number]>();
  for (const s of grid.samples) {
    const cur = latest.get(s.well_id);
    if (!cur || s.date > cur.date) latest.set(s.well_id, s);
  }
  return latest;
}

function renderArrows(
  svg: SVGSVGElement,
  grid: SliceGrid,
  flow: FlowField | null,
  proj: Projection,
): void {
  if (!flow || !flow.vectors.length) return;
  const coords = new Map(grid.wells.map((w) => [w.well_id, w]));
  const rMax = Math.max(...flow.vectors.map((v) => v.R));
  for (const vec of flow.vectors) {
    const w = coords.get(vec.well_id);
    if (!w) continue;
    const length = rMax > 0 ? (vec.R / rMax) * MAX_ARROW_PX : 0;
    const rad = (vec.theta_degrees * Math.PI) / 180;
    const x1 = proj.sx(w.x);
    const y1 = proj.sy(w.y);
    const x2 = x1 + length * Math.cos(rad);
    const y2 = y1 - length * Math.sin(rad); // screen y is flipped
    svg.appendChild(el('line', {
      class: 'arrow', x1, y1, x2, y2, stroke: '#1f5fbf', 'stroke-width': 2,
    }));
    const tipL = rad + (150 * Math.PI) / 180;
    const tipR = rad - (150 * Math.PI) / 180;
    svg.appendChild(el('polygon', {
      class: 'arrowhead',
      points: `${x2},${y2} ${x2 + 7 * Math.cos(tipL)},${y2 - 7 * Math.sin(tipL)} ` +
        `${x2 + 7 * Math.cos(tipR)},${y2 - 7 * Math.sin(tipR)}`,
      fill: '#1f5fbf',
    }));
  }
}

function renderWells(
  svg: SVGSVGElement,
  grid: SliceGrid,
  proj: Projection,
  options: SpatialOptions,
): void {
  const latest = latestSamples(grid);
  const naplWells = new Set(grid.napl.map((n) => n.well_id));
  for (const w of grid.wells) {
    const cx = proj.sx(w.x);
    const cy = proj.sy(w.y);
    const marker = el('circle', { class: 'well', cx, cy, r: 3.5, fill: '#000' });
    marker.addEventListener('click', () => options.onWellClick?.(w.well_id));
    svg.appendChild(marker);
    svg.appendChild(el('text', {
      class: 'well-id', x: cx, y: cy + 14, 'text-anchor': 'middle',
    }, w.well_id));
    const s = latest.get(w.well_id);
    if (s) {
      // red font for detects/NAPL, black for non-detects
      const detect = !s.censored || naplWells.has(w.well_id);
      const label = naplWells.has(w.well_id) && s.synthetic ? 'NAPL' : fmt(s.value);
      svg.appendChild(el('text', {
        class: 'sample-label', x: cx, y: cy - 7, 'text-anchor': 'middle',
        fill: detect ? '#cc0000' : '#000000',
      }, label));
    }
  }
}

function renderColorKey(
  svg: SVGSVGElement,
  vmin: number,
  vmax: number,
  width: number,
  height: number,
  pad: number,
): void {
  const keyX = width - 26;
  const keyH = height - 2 * pad - 40;
  const steps = 24;
  for (let i = 0; i < steps; i++) {
    svg.appendChild(el('rect', {
      class: 'key-step',
      x: keyX, y: pad + 20 + (i * keyH) / steps,
      width: 14, height: keyH / steps + 0.5,
      fill: rampColor(1 - (i + 0.5) / steps),
    }));
  }
  svg.appendChild(el('text', {
    class: 'key-max', x: keyX - 4, y: pad + 26, 'text-anchor': 'end',
  }, fmt(vmax)));
  svg.appendChild(el('text', {
    class: 'key-min', x: keyX - 4, y: pad + 20 + keyH, 'text-anchor': 'end',
  }, fmt(vmin)));
}
