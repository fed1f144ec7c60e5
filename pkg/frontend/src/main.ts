/** Browser entry point: binds the controller to the page. */

import { ApiClient } from './api.js';
import { App } from './app.js';
import { FramePlayer } from './animation.js';
import type { DisplayMode, IndicatorMode } from './state.js';

function byId<T extends Element>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as unknown as T;
}

export function bootstrap(): App {
  const api = new ApiClient('');
  const app = new App(api, {
    spatialSvg: byId<SVGSVGElement>('spatial'),
    trendSvg: byId<SVGSVGElement>('trend'),
    matrixBox: byId<HTMLElement>('matrix'),
    animationSvg: byId<SVGSVGElement>('animation'),
    intervalLabel: byId<HTMLElement>('interval-label'),
    statusLine: byId<HTMLElement>('status-line'),
  });

  app.onStateChange = (query) => {
    history.replaceState(null, '', `?${query}`);
  };
  app.restore(location.search);

  byId<HTMLButtonElement>('step-back').addEventListener('click', () => {
    void app.stepTime(-1);
  });
  byId<HTMLButtonElement>('step-forward').addEventListener('click', () => {
    void app.stepTime(1);
  });

  const soluteSelect = byId<HTMLSelectElement>('solute');
  soluteSelect.addEventListener('change', () => {
    void app.setSolute(soluteSelect.value);
  });
  const displaySelect = byId<HTMLSelectElement>('display');
  displaySelect.addEventListener('change', () => {
    void app.setDisplay(displaySelect.value as DisplayMode);
  });
  const modeSelect = byId<HTMLSelectElement>('indicator-mode');
  modeSelect.addEventListener('change', () => {
    void app.setIndicatorMode(modeSelect.value as IndicatorMode);
  });

  const thresholdBox = byId<HTMLElement>('thresholds');
  const cutoffLo = byId<HTMLInputElement>('cutoff-lo');
  const cutoffHi = byId<HTMLInputElement>('cutoff-hi');
  const applyCutoffs = () => {
    void app.setCutoffs(Number(cutoffLo.value), Number(cutoffHi.value));
  };
  cutoffLo.addEventListener('change', applyCutoffs);
  cutoffHi.addEventListener('change', applyCutoffs);

  const uploadForm = byId<HTMLFormElement>('upload-form');
  uploadForm.addEventListener('submit', (event) => {
    event.preventDefault();
    const monitoring = byId<HTMLInputElement>('file-monitoring').files?.[0];
    const wells = byId<HTMLInputElement>('file-wells').files?.[0];
    const overlays = byId<HTMLInputElement>('file-overlays').files?.[0];
    if (!monitoring || !wells) return;
    void app
      .uploadAndAnalyze(monitoring, wells, overlays, {
        napl_substitute: byId<HTMLInputElement>('opt-napl').checked,
        nd_fraction:
          Number(byId<HTMLSelectElement>('opt-nd').value) === 1.0 ? 1.0 : 0.5,
      })
      .then(() => populateControls())
      .catch((err) => {
        app.els.statusLine.textContent = `error: ${err.message}`;
      });
  });

  byId<HTMLButtonElement>('play').addEventListener('click', () => {
    if (!app.player.length) {
      void app.loadAnimation().then(() => app.player.play());
    } else {
      app.player.toggle();
    }
  });
  const scrubber = byId<HTMLInputElement>('scrubber');
  scrubber.addEventListener('input', () => {
    app.player.stop();
    app.player.show(Number(scrubber.value));
  });
  app.player = new FramePlayer(app.els.animationSvg, (index, total, label) => {
    scrubber.max = String(total - 1);
    scrubber.value = String(index);
    byId<HTMLElement>('frame-label').textContent = label;
  });

  function populateControls(): void {
    const solutes = app.status?.solutes ?? [];
    soluteSelect.replaceChildren(
      ...solutes.map((s) => new Option(s, s, false, s === app.state.solute)),
    );
    thresholdBox.replaceChildren();
    for (const solute of solutes) {
      const label = document.createElement('label');
      label.textContent = solute;
      const input = document.createElement('input');
      input.type = 'number';
      input.min = '0';
      input.step = 'any';
      input.dataset.solute = solute;
      if (app.state.thresholds[solute] !== undefined) {
        input.value = String(app.state.thresholds[solute]);
      }
      input.addEventListener('change', () => {
        void app.setThreshold(solute, input.value === '' ? null : Number(input.value));
      });
      label.appendChild(input);
      thresholdBox.appendChild(label);
    }
    cutoffLo.value = String(app.state.cutoffs[0]);
    cutoffHi.value = String(app.state.cutoffs[1]);
  }

  if (app.state.analysis) {
    void app.attach(app.state.analysis).then(() => populateControls());
  }
  return app;
}

if (typeof document !== 'undefined' && document.getElementById('spatial')) {
  bootstrap();
}
