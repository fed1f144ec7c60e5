/** Application controller: owns the view state, issues exactly the
 *  requests each interaction requires, and re-renders from responses. */

import { ApiClient } from './api.js';
import { FramePlayer } from './animation.js';
import { renderMatrix } from './indicators.js';
import { renderSpatial } from './spatial.js';
import { renderTrend } from './trend.js';
import {
  clampInterval,
  decodeState,
  defaultState,
  encodeState,
  type ViewState,
} from './state.js';
import type { AnalysisStatus } from './types.js';

export interface AppElements {
  spatialSvg: SVGSVGElement;
  trendSvg: SVGSVGElement;
  matrixBox: HTMLElement;
  animationSvg: SVGSVGElement;
  intervalLabel: HTMLElement;
  statusLine: HTMLElement;
}

export class App {
  state: ViewState = defaultState();
  status: AnalysisStatus | null = null;
  player: FramePlayer;
  onStateChange: (query: string) => void = () => {};

  constructor(
    public api: ApiClient,
    public els: AppElements,
  ) {
    this.player = new FramePlayer(els.animationSvg);
  }

  restore(query: string): void {
    this.state = decodeState(query);
  }

  private pushState(): void {
    this.onStateChange(encodeState(this.state));
  }

  /** Upload both CSVs, start an analysis, and poll it to completion. */
  async uploadAndAnalyze(
    monitoring: Blob,
    wells: Blob,
    overlays: Blob | undefined,
    options = {},
    pollMs = 500,
  ): Promise<void> {
    const up = await this.api.uploadDataset(monitoring, wells, overlays);
    const start = await this.api.startAnalysis(up.dataset_id, options);
    this.state.analysis = start.analysis_id;
    this.els.statusLine.textContent = `analysis ${start.analysis_id}: queued`;
    for (;;) {
      const status = await this.api.getStatus(this.state.analysis);
      this.els.statusLine.textContent =
        `analysis ${status.id}: ${status.status}`;
      if (status.status === 'done') break;
      if (status.status === 'failed') {
        throw new Error(status.error ?? 'analysis failed');
      }
      await new Promise((resolve) => setTimeout(resolve, pollMs));
    }
    await this.attach(this.state.analysis);
  }

  /** Bind to a finished analysis and render everything once. */
  async attach(analysisId: string): Promise<void> {
    this.state.analysis = analysisId;
    this.status = await this.api.getStatus(analysisId);
    if (this.status.status !== 'done') {
      this.els.statusLine.textContent =
        `analysis ${analysisId}: ${this.status.status}`;
      return;
    }
    const solutes = this.status.solutes ?? [];
    if (!this.state.solute || !solutes.includes(this.state.solute)) {
      this.state.solute = solutes[0] ?? '';
    }
    clampInterval(this.state, this.status.intervals?.length ?? 0);
    this.pushState();
    await Promise.all([this.refreshSpatial(), this.refreshMatrix()]);
    if (this.state.well) await this.selectWell(this.state.well);
  }

  get intervalCount(): number {
    return this.status?.intervals?.length ?? 0;
  }

  /** Fetch exactly one slice and one flow field, then redraw. */
  async refreshSpatial(): Promise<void> {
    if (!this.state.analysis || !this.state.solute) return;
    const [slice, flow] = await Promise.all([
      this.api.getSlice(this.state.analysis, this.state.k, this.state.solute),
      this.api.getFlow(this.state.analysis, this.state.k),
    ]);
    renderSpatial(this.els.spatialSvg, slice, flow, {
      display: this.state.display,
      onWellClick: (wellId) => void this.selectWell(wellId),
    });
    this.els.intervalLabel.textContent = slice.label;
  }

  /** Fetch exactly one indicator matrix, then redraw. */
  async refreshMatrix(): Promise<void> {
    if (!this.state.analysis) return;
    const matrix = await this.api.getIndicators(
      this.state.analysis,
      this.state.k,
      this.state.indicatorMode,
      this.state.thresholds,
      this.state.cutoffs,
    );
    renderMatrix(this.els.matrixBox, matrix);
  }

  /** Time stepping issues exactly one slice and one flow request; the
   *  indicator panel shows its own time stamp and refreshes on demand. */
  async stepTime(delta: number): Promise<void> {
    const next = this.state.k + delta;
    if (next < 0 || next >= this.intervalCount) return;
    this.state.k = next;
    this.pushState();
    await this.refreshSpatial();
  }

  async setDisplay(mode: ViewState['display']): Promise<void> {
    this.state.display = mode;
    this.pushState();
    await this.refreshSpatial();
  }

  async setSolute(solute: string): Promise<void> {
    this.state.solute = solute;
    this.pushState();
    await this.refreshSpatial();
  }

  async setThreshold(solute: string, value: number | null): Promise<void> {
    if (value === null || !Number.isFinite(value) || value <= 0) {
      delete this.state.thresholds[solute];
    } else {
      this.state.thresholds[solute] = value;
    }
    this.pushState();
    await this.refreshMatrix();
  }

  async setIndicatorMode(mode: ViewState['indicatorMode']): Promise<void> {
    this.state.indicatorMode = mode;
    this.pushState();
    await this.refreshMatrix();
  }

  async setCutoffs(lo: number, hi: number): Promise<void> {
    if (!(0 < lo && lo < hi)) return;
    this.state.cutoffs = [lo, hi];
    this.pushState();
    await this.refreshMatrix();
  }

  /** One trend request plus the GW overlay series for the right axis. */
  async selectWell(wellId: string): Promise<void> {
    if (!this.state.analysis || !this.state.solute) return;
    this.state.well = wellId;
    this.pushState();
    const trend = await this.api
      .getTrend(this.state.analysis, wellId, this.state.solute)
      .catch(() => null);
    if (!trend) {
      this.els.trendSvg.replaceChildren();
      return;
    }
    const gw = await this.api.getGw(this.state.analysis, wellId).catch(() => null);
    renderTrend(this.els.trendSvg, trend, gw && gw.times.length ? gw : null);
  }

  async loadAnimation(): Promise<void> {
    if (!this.state.analysis || !this.state.solute) return;
    const page = await this.api.getFrames(
      this.state.analysis, this.state.solute, 0, Math.max(this.intervalCount, 1));
    this.player.load(page);
  }
}
