/** Well trend view: observed samples (solid detect / open non-detect),
 *  the smoother curve with its served 95% band, and optionally the
 *  groundwater elevation on a right-hand axis. */

import { fmt } from './format.js';
import type { GwSeries, TrendFit } from './types.js';

const SVG_NS = 'http://www.w3.org/2000/svg';

function el(name: string, attrs: Record<string, string | number>, text?: string) {
  const node = document.createElementNS(SVG_NS, name);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, String(value));
  }
  if (text !== undefined) node.textContent = text;
  return node;
}

const dayMs = 86_400_000;

function toDays(iso: string): number {
  return Date.parse(iso) / dayMs;
}

export function renderTrend(
  svg: SVGSVGElement,
  trend: TrendFit,
  gw: GwSeries | null = null,
): void {
  const width = 680;
  const height = 420;
  const pad = 52;
  svg.setAttribute('viewBox', `0 0 ${width} ${height}`);
  svg.replaceChildren();

  const ts = trend.eval_times.map(toDays);
  const obsT = trend.samples.times.map(toDays);
  const allT = ts.concat(obsT);
  const t0 = Math.min(...allT);
  const t1 = Math.max(...allT);

  const values = trend.curve
    .concat(trend.band_lower, trend.band_upper, trend.samples.values)
    .filter((v) => Number.isFinite(v));
  const v0 = Math.min(...values);
  const v1 = Math.max(...values);
  const vSpan = v1 > v0 ? v1 - v0 : 1;

  const sx = (t: number) => pad + ((t - t0) / Math.max(t1 - t0, 1e-9)) * (width - 2 * pad);
  const sy = (v: number) => height - pad - ((v - v0) / vSpan) * (height - 2 * pad);

  svg.appendChild(el('text', {
    class: 'plot-title', x: width / 2, y: 20, 'text-anchor': 'middle',
  }, `${trend.well_id} — ${trend.solute} (${trend.units})`));
  svg.appendChild(el('rect', {
    class: 'frame', x: pad, y: pad, width: width - 2 * pad, height: height - 2 * pad,
    fill: 'none', stroke: '#555',
  }));

  const bandPoints = ts.map((t, i) => `${sx(t)},${sy(trend.band_upper[i])}`)
    .concat([...ts].reverse().map((t, i) =>
      `${sx(t)},${sy(trend.band_lower[ts.length - 1 - i])}`))
    .join(' ');
  svg.appendChild(el('polygon', {
    class: 'band', points: bandPoints, fill: '#aac8e8', 'fill-opacity': 0.45,
  }));
  svg.appendChild(el('polyline', {
    class: 'smoother',
    points: ts.map((t, i) => `${sx(t)},${sy(trend.curve[i])}`).join(' '),
    fill: 'none', stroke: '#1f5fbf', 'stroke-width': 2,
  }));

  trend.samples.times.forEach((iso, i) => {
    const cx = sx(toDays(iso));
    const cy = sy(trend.samples.values[i]);
    if (trend.samples.censored[i]) {
      svg.appendChild(el('circle', {
        class: 'obs censored', cx, cy, r: 3.5,
        fill: 'none', stroke: '#e69500', 'stroke-width': 1.5,
      }));
    } else {
      svg.appendChild(el('circle', {
        class: 'obs detect', cx, cy, r: 3.5, fill: '#000',
      }));
    }
  });

  // concentration axis extremes (left)
  svg.appendChild(el('text', {
    class: 'axis-min', x: pad - 6, y: sy(v0), 'text-anchor': 'end',
  }, fmt(v0)));
  svg.appendChild(el('text', {
    class: 'axis-max', x: pad - 6, y: sy(v1) + 9, 'text-anchor': 'end',
  }, fmt(v1)));
  svg.appendChild(el('text', {
    class: 'axis-t0', x: pad, y: height - pad + 16, 'text-anchor': 'start',
  }, trend.eval_times[0]));
  svg.appendChild(el('text', {
    class: 'axis-t1', x: width - pad, y: height - pad + 16, 'text-anchor': 'end',
  }, trend.eval_times[trend.eval_times.length - 1]));

  if (gw && gw.times.length) {
    const g0 = Math.min(...gw.values);
    const g1 = Math.max(...gw.values);
    const gSpan = g1 > g0 ? g1 - g0 : 1;
    const gy = (v: number) => height - pad - ((v - g0) / gSpan) * (height - 2 * pad);
    svg.appendChild(el('polyline', {
      class: 'gw-line',
      points: gw.times.map((iso, i) => `${sx(toDays(iso))},${gy(gw.values[i])}`).join(' '),
      fill: 'none', stroke: '#333', 'stroke-width': 1,
    }));
    gw.times.forEach((iso, i) => {
      svg.appendChild(el('circle', {
        class: 'gw-obs', cx: sx(toDays(iso)), cy: gy(gw.values[i]), r: 2.5,
        fill: '#fff', stroke: '#333',
      }));
    });
    // groundwater elevation reads off the right-hand axis
    svg.appendChild(el('text', {
      class: 'gw-min', x: width - pad + 6, y: gy(g0), 'text-anchor': 'start',
    }, fmt(g0)));
    svg.appendChild(el('text', {
      class: 'gw-max', x: width - pad + 6, y: gy(g1) + 9, 'text-anchor': 'start',
    }, fmt(g1)));
  }

  const mk = trend.mk;
  svg.appendChild(el('text', {
    class: 'mk-summary', x: width / 2, y: height - 8, 'text-anchor': 'middle',
  }, `Mann-Kendall: S=${fmt(mk.S)} tau=${fmt(mk.tau)} p=${fmt(mk.p_value)}` +
     ` | n=${fmt(trend.n)} h=${fmt(trend.h)}`));
}
