/** URL-serializable view state; reloading a deep link restores the view. */

export type DisplayMode = 'contour' | 'circles' | 'napl-circles';
export type IndicatorMode = 'trend' | 'threshold-absolute' | 'threshold-statistical';

export interface ViewState {
  analysis: string;
  solute: string;
  k: number;
  display: DisplayMode;
  indicatorMode: IndicatorMode;
  thresholds: Record<string, number>;
  cutoffs: [number, number];
  well: string | null;
}

export const DEFAULT_CUTOFFS: [number, number] = [0.1, 0.5];

export function defaultState(): ViewState {
  return {
    analysis: '',
    solute: '',
    k: 0,
    display: 'contour',
    indicatorMode: 'trend',
    thresholds: {},
    cutoffs: DEFAULT_CUTOFFS,
    well: null,
  };
}

export function encodeState(state: ViewState): string {
  const q = new URLSearchParams();
  if (state.analysis) q.set('a', state.analysis);
  if (state.solute) q.set('s', state.solute);
  q.set('k', String(state.k));
  if (state.display !== 'contour') q.set('d', state.display);
  if (state.indicatorMode !== 'trend') q.set('im', state.indicatorMode);
  const names = Object.keys(state.thresholds).sort();
  if (names.length) {
    q.set('th', names.map((n) => `${encodeURIComponent(n)}~${state.thresholds[n]}`).join('_'));
  }
  if (state.cutoffs[0] !== DEFAULT_CUTOFFS[0] || state.cutoffs[1] !== DEFAULT_CUTOFFS[1]) {
    q.set('co', `${state.cutoffs[0]},${state.cutoffs[1]}`);
  }
  if (state.well) q.set('w', state.well);
  return q.toString();
}

export function decodeState(query: string): ViewState {
  const q = new URLSearchParams(query);
  const state = defaultState();
  state.analysis = q.get('a') ?? '';
  state.solute = q.get('s') ?? '';
  const k = Number(q.get('k') ?? '0');
  state.k = Number.isFinite(k) && k >= 0 ? Math.floor(k) : 0;
  const display = q.get('d');
  if (display === 'circles' || display === 'napl-circles') state.display = display;
  const im = q.get('im');
  if (im === 'threshold-absolute' || im === 'threshold-statistical') {
    state.indicatorMode = im;
  }
  const th = q.get('th');
  if (th) {
    for (const part of th.split('_')) {
      const [name, raw] = part.split('~');
      const value = Number(raw);
      if (name && Number.isFinite(value) && value > 0) {
        state.thresholds[decodeURIComponent(name)] = value;
      }
    }
  }
  const co = q.get('co');
  if (co) {
    const [lo, hi] = co.split(',').map(Number);
    if (Number.isFinite(lo) && Number.isFinite(hi) && 0 < lo && lo < hi) {
      state.cutoffs = [lo, hi];
    }
  }
  state.well = q.get('w');
  return state;
}

/** Clamp the interval index into range once the analysis metadata is known. */
export function clampInterval(state: ViewState, intervalCount: number): void {
  if (intervalCount <= 0) {
    state.k = 0;
    return;
  }
  state.k = Math.min(Math.max(state.k, 0), intervalCount - 1);
}
