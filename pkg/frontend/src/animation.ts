/** Frame-sequence player: steps through slice grids under the shared
 *  color scale with play/pause and a scrub slider. */

import { renderSpatial } from './spatial.js';
import type { FramePage, SliceGrid } from './types.js';

export class FramePlayer {
  private frames: SliceGrid[] = [];
  private vmin = 0;
  private vmax = 1;
  private index = 0;
  private timer: ReturnType<typeof setInterval> | null = null;

  constructor(
    private svg: SVGSVGElement,
    private onFrame: (index: number, total: number, label: string) => void = () => {},
    private intervalMs = 600,
  ) {}

  load(page: FramePage): void {
    this.stop();
    this.frames = page.frames;
    this.vmin = page.color_scale.min;
    this.vmax = page.color_scale.max;
    this.index = 0;
    if (this.frames.length) this.show(0);
  }

  get length(): number {
    return this.frames.length;
  }

  get playing(): boolean {
    return this.timer !== null;
  }

  show(index: number): void {
    if (!this.frames.length) return;
    this.index = Math.min(Math.max(index, 0), this.frames.length - 1);
    const frame = this.frames[this.index];
    renderSpatial(this.svg, frame, frame.flow, {
      display: 'contour',
      vmin: this.vmin,
      vmax: this.vmax,
    });
    this.onFrame(this.index, this.frames.length, frame.label);
  }

  play(): void {
    if (this.timer || this.frames.length < 2) return;
    this.timer = setInterval(() => {
      this.show((this.index + 1) % this.frames.length);
    }, this.intervalMs);
  }

  stop(): void {
    if (this.timer) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }

  toggle(): void {
    this.playing ? this.stop() : this.play();
  }
}
