import { beforeEach, describe, expect, it } from 'vitest';

import { ApiClient } from '../src/api.js';
import { App, type AppElements } from '../src/app.js';
import type { AnalysisStatus } from '../src/types.js';
import { FakeFetch, fixture, svgElement } from './helpers.js';

const status = fixture<AnalysisStatus>('status.json');

function makeElements(): AppElements {
  return {
    spatialSvg: svgElement(),
    trendSvg: svgElement(),
    matrixBox: document.createElement('div'),
    animationSvg: svgElement(),
    intervalLabel: document.createElement('span'),
    statusLine: document.createElement('div'),
  };
}

function makeApp() {
  const fake = new FakeFetch()
    .on(/\/analyses\/[^/]+\/slices\/6\?/, fixture('slice_next.json'))
    .on(/\/analyses\/[^/]+\/slices\/\d+\?/, fixture('slice.json'))
    .on(/\/analyses\/[^/]+\/flow\/6$/, fixture('flow_next.json'))
    .on(/\/analyses\/[^/]+\/flow\/\d+$/, fixture('flow.json'))
    .on(/\/analyses\/[^/]+\/indicators\?/, fixture('indicators_trend.json'))
    .on(/\/analyses\/[^/]+\/wells\/[^/]+\/trend\?/, fixture('trend.json'))
    .on(/\/analyses\/[^/]+\/wells\/[^/]+\/gw$/, fixture('gw.json'))
    .on(/\/analyses\/[^/]+\/frames\?/, fixture('frames.json'))
    .on(/\/analyses\/[^/]+$/, status);
  const app = new App(new ApiClient('http://svc', fake.fetch), makeElements());
  return { app, fake };
}

describe('interaction request contracts', () => {
  let app: App;
  let fake: FakeFetch;

  beforeEach(async () => {
    ({ app, fake } = makeApp());
    await app.attach(status.id);
    fake.calls = [];
  });

  it('time step issues exactly one slice and one flow request', async () => {
    app.state.k = 5;
    await app.stepTime(1);
    expect(app.state.k).toBe(6);
    expect(fake.count(/\/slices\/6\?/)).toBe(1);
    expect(fake.count(/\/flow\/6$/)).toBe(1);
    expect(fake.calls.length).toBe(2);
  });

  it('time step at the range edge issues no requests', async () => {
    app.state.k = 0;
    await app.stepTime(-1);
    expect(app.state.k).toBe(0);
    expect(fake.calls.length).toBe(0);
  });

  it('threshold edit issues exactly one indicators request', async () => {
    await app.setThreshold('Benzene', 0.5);
    expect(fake.count(/\/indicators\?/)).toBe(1);
    expect(fake.calls.length).toBe(1);
    const last = fake.calls[0];
    expect(decodeURIComponent(last)).toContain('"Benzene":0.5');
  });

  it('cutoff edit issues exactly one indicators request with the cutoffs', async () => {
    await app.setCutoffs(0.2, 0.8);
    expect(fake.count(/\/indicators\?/)).toBe(1);
    expect(fake.calls.length).toBe(1);
    expect(decodeURIComponent(fake.calls[0])).toContain('cutoffs=0.2,0.8');
  });

  it('indicator mode switch issues exactly one indicators request', async () => {
    await app.setIndicatorMode('threshold-statistical');
    expect(fake.count(/\/indicators\?/)).toBe(1);
    expect(fake.calls.length).toBe(1);
  });

  it('selecting a well fetches its trend and GW overlay', async () => {
    await app.selectWell('MW-01');
    expect(fake.count(/\/wells\/MW-01\/trend\?/)).toBe(1);
    expect(fake.count(/\/wells\/MW-01\/gw$/)).toBe(1);
    expect(app.els.trendSvg.querySelectorAll('circle.obs').length).toBeGreaterThan(0);
  });

  it('state changes round-trip through the URL serializer', async () => {
    const seen: string[] = [];
    app.onStateChange = (query) => seen.push(query);
    await app.stepTime(1);
    await app.setThreshold('Benzene', 0.5);
    expect(seen.length).toBe(2);
    expect(decodeURIComponent(seen[1])).toContain('th=Benzene~0.5');
  });
});

describe('attach and rendering', () => {
  it('renders the spatial view and matrix after attach', async () => {
    const { app } = makeApp();
    await app.attach(status.id);
    expect(app.els.spatialSvg.querySelectorAll('circle.well').length).toBe(8);
    expect(app.els.matrixBox.querySelectorAll('td.cell').length).toBe(24);
    expect(app.els.intervalLabel.textContent).not.toBe('');
  });

  it('falls back to the first solute when the state names an unknown one', async () => {
    const { app } = makeApp();
    app.state.solute = 'Unobtanium';
    await app.attach(status.id);
    expect(app.state.solute).toBe(status.solutes![0]);
  });

  it('clamps out-of-range interval indices from deep links', async () => {
    const { app } = makeApp();
    app.restore('k=999');
    await app.attach(status.id);
    expect(app.state.k).toBe(status.intervals!.length - 1);
  });
});

describe('animation player', () => {
  it('loads all frames under one shared color scale and scrubs', async () => {
    const { app } = makeApp();
    await app.attach(status.id);
    await app.loadAnimation();
    expect(app.player.length).toBe(12);
    app.player.show(7);
    expect(app.els.animationSvg.querySelectorAll('circle.well').length).toBe(8);
    const keyMax = app.els.animationSvg.querySelector('text.key-max')!.textContent;
    app.player.show(3);
    expect(app.els.animationSvg.querySelector('text.key-max')!.textContent).toBe(keyMax);
  });

  it('play advances frames and stop halts them', async () => {
    const { app } = makeApp();
    await app.attach(status.id);
    await app.loadAnimation();
    expect(app.player.playing).toBe(false);
    app.player.play();
    expect(app.player.playing).toBe(true);
    app.player.stop();
    expect(app.player.playing).toBe(false);
  });
});
