/** Thin typed client over the analysis service HTTP API. */

import type {
  AnalysisStatus,
  FlowField,
  FramePage,
  GwSeries,
  IndicatorMatrix,
  SliceGrid,
  TrendFit,
} from './types.js';

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
  }
}

export interface AnalysisOptions {
  nd_fraction?: number;
  napl_substitute?: boolean;
  granularity?: 'month' | 'quarter' | 'year';
  aquifer?: string | null;
  lam?: number | null;
  trend_cutoffs?: [number, number];
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private base: string = '',
    private fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchImpl(this.base + path, init);
    const body = await resp.json().catch(() => null);
    if (!resp.ok) {
      const code = body?.error?.code ?? body?.detail?.[0]?.type ?? 'HTTP_ERROR';
      const message = body?.error?.message ?? `request failed (${resp.status})`;
      throw new ApiError(resp.status, code, message);
    }
    return body as T;
  }

  uploadDataset(monitoring: Blob, wells: Blob, overlays?: Blob) {
    const form = new FormData();
    form.append('monitoring', monitoring, 'monitoring.csv');
    form.append('wells', wells, 'wells.csv');
    if (overlays) form.append('overlays', overlays, 'overlays.json');
    return this.request<{ dataset_id: string; solutes: string[] }>(
      '/datasets', { method: 'POST', body: form });
  }

  startAnalysis(datasetId: string, options: AnalysisOptions = {}) {
    return this.request<{ analysis_id: string; status: string }>(
      `/datasets/${encodeURIComponent(datasetId)}/analyses`,
      {
        method: 'POST',
        headers: { 'content-type': 'application/json' },
        body: JSON.stringify(options),
      },
    );
  }

  getStatus(analysisId: string) {
    return this.request<AnalysisStatus>(`/analyses/${encodeURIComponent(analysisId)}`);
  }

  getSlice(analysisId: string, k: number, solute: string, nx = 50, ny = 50) {
    const q = new URLSearchParams({ solute, nx: String(nx), ny: String(ny) });
    return this.request<SliceGrid>(
      `/analyses/${encodeURIComponent(analysisId)}/slices/${k}?${q}`);
  }

  getFlow(analysisId: string, k: number) {
    return this.request<FlowField>(
      `/analyses/${encodeURIComponent(analysisId)}/flow/${k}`);
  }

  getTrend(analysisId: string, wellId: string, solute: string) {
    const q = new URLSearchParams({ solute });
    return this.request<TrendFit>(
      `/analyses/${encodeURIComponent(analysisId)}/wells/` +
      `${encodeURIComponent(wellId)}/trend?${q}`);
  }

  getGw(analysisId: string, wellId: string) {
    return this.request<GwSeries>(
      `/analyses/${encodeURIComponent(analysisId)}/wells/` +
      `${encodeURIComponent(wellId)}/gw`);
  }

  getIndicators(
    analysisId: string,
    k: number,
    mode: string,
    thresholds: Record<string, number>,
    cutoffs?: [number, number],
  ) {
    const q = new URLSearchParams({ k: String(k), mode });
    if (Object.keys(thresholds).length) q.set('thresholds', JSON.stringify(thresholds));
    if (cutoffs) q.set('cutoffs', `${cutoffs[0]},${cutoffs[1]}`);
    return this.request<IndicatorMatrix>(
      `/analyses/${encodeURIComponent(analysisId)}/indicators?${q}`);
  }

  getFrames(analysisId: string, solute: string, page = 0, pageSize = 12,
            nx = 40, ny = 40) {
    const q = new URLSearchParams({
      solute, page: String(page), page_size: String(pageSize),
      nx: String(nx), ny: String(ny),
    });
    return this.request<FramePage>(
      `/analyses/${encodeURIComponent(analysisId)}/frames?${q}`);
  }
}
