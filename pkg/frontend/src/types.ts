/** Wire types for the analysis service. The client renders these fields
 *  verbatim and never recomputes model quantities. */

export interface IntervalInfo {
  index: number;
  label: string;
  start: string;
  end: string;
}

export interface AnalysisStatus {
  id: string;
  dataset_id: string;
  status: 'queued' | 'running' | 'done' | 'failed';
  error?: string;
  solutes?: string[];
  wells?: string[];
  intervals?: IntervalInfo[];
  models?: Record<string, boolean>;
  diagnostics?: Diagnostic[];
}

export interface Diagnostic {
  severity: 'error' | 'warning';
  code: string;
  message: string;
  row?: number;
}

export interface SampleLabel {
  well_id: string;
  x: number;
  y: number;
  date: string;
  value: number;
  censored: boolean;
  synthetic: boolean;
}

export interface NaplReading {
  well_id: string;
  date: string;
  thickness: number;
  units: string;
}

export interface FlowVector {
  well_id: string;
  theta_degrees: number;
  R: number;
  a: number;
  b: number;
  c: number;
}

export interface FlowField {
  interval: number;
  vectors: FlowVector[];
  skipped: { well_id: string; reason: string }[];
}

export interface WellMarker {
  well_id: string;
  x: number;
  y: number;
}

export interface SliceGrid {
  interval: number;
  label: string;
  t: string;
  solute: string;
  units: string;
  nx: number;
  ny: number;
  xs: number[];
  ys: number[];
  values: (number | null)[][];
  samples: SampleLabel[];
  napl: NaplReading[];
  flow: FlowField | null;
  wells: WellMarker[];
  overlays: number[][][];
}

export interface MannKendall {
  S: number;
  tau: number;
  var_S: number;
  p_value: number;
}

export interface TrendFit {
  well_id: string;
  solute: string;
  scale: 'log' | 'linear';
  units: string;
  eval_times: string[];
  fitted: number[];
  se: number[];
  derivative: number[];
  curve: number[];
  band_lower: number[];
  band_upper: number[];
  h: number;
  n: number;
  sigma2: number;
  mk: MannKendall;
  samples: { times: string[]; values: number[]; censored: boolean[] };
  notes: string[];
}

export interface GwSeries {
  well_id: string;
  times: string[];
  values: number[];
  units: string;
}

export type IndicatorClass =
  | 'strong-up' | 'up' | 'stable' | 'down' | 'strong-down'
  | 'above' | 'below' | 'non-detect' | 'insufficient';

export interface IndicatorCell {
  well_id: string;
  solute: string;
  mode: string;
  class: IndicatorClass;
  slope?: number;
  value?: number;
  note?: string;
}

export interface IndicatorMatrix {
  interval: number;
  t: string;
  mode: string;
  rows: string[];
  cols: string[];
  cells: IndicatorCell[];
}

export interface FramePage {
  solute: string;
  color_scale: { min: number; max: number };
  total_frames: number;
  page: number;
  page_size: number;
  frames: SliceGrid[];
}

export interface ApiErrorBody {
  error: { code: string; message: string; [key: string]: unknown };
}
