/** Color ramps and indicator class colors (presentation only; all
 *  classification comes from the service). */

import type { IndicatorClass } from './types.js';

const RAMP: [number, [number, number, number]][] = [
  [0.0, [13, 8, 135]],
  [0.25, [126, 3, 168]],
  [0.5, [204, 71, 120]],
  [0.75, [248, 149, 64]],
  [1.0, [240, 249, 33]],
];

export function rampColor(frac: number): string {
  const f = Math.min(Math.max(frac, 0), 1);
  for (let i = 1; i < RAMP.length; i++) {
    const [f1, c1] = RAMP[i];
    if (f <= f1) {
      const [f0, c0] = RAMP[i - 1];
      const w = f1 === f0 ? 0 : (f - f0) / (f1 - f0);
      const rgb = c0.map((a, j) => Math.round(a + w * (c1[j] - a)));
      return `rgb(${rgb[0]},${rgb[1]},${rgb[2]})`;
    }
  }
  const last = RAMP[RAMP.length - 1][1];
  return `rgb(${last[0]},${last[1]},${last[2]})`;
}

/** Map a concentration onto [0, 1] of the ramp, log-scaled like the plots. */
export function valueFraction(value: number, vmin: number, vmax: number): number {
  if (value <= 0 || vmax <= 0) return 0;
  const lo = vmin > 0 ? Math.log(vmin) : Math.log(vmax) - 6;
  const hi = Math.log(vmax);
  if (hi <= lo) return 0.5;
  return (Math.log(value) - lo) / (hi - lo);
}

export const CLASS_COLORS: Record<IndicatorClass, string> = {
  'strong-up': '#b2182b',
  up: '#ef8a62',
  stable: '#ffffff',
  down: '#67a9cf',
  'strong-down': '#2166ac',
  'non-detect': '#4477ff',
  insufficient: '#bbbbbb',
  above: '#d62728',
  below: '#2ca02c',
};
