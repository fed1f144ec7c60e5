/** Trend and threshold indicator matrix. Cell colors come 1:1 from the
 *  service's class field; the client never reclassifies. */

import { CLASS_COLORS } from './color.js';
import { fmt } from './format.js';
import type { IndicatorMatrix } from './types.js';

export function renderMatrix(container: HTMLElement, matrix: IndicatorMatrix): void {
  container.replaceChildren();
  const caption = document.createElement('div');
  caption.className = 'matrix-caption';
  caption.textContent = `${matrix.mode} — ${matrix.t}`;
  container.appendChild(caption);

  const table = document.createElement('table');
  table.className = 'indicator-matrix';
  const thead = document.createElement('thead');
  const head = document.createElement('tr');
  const corner = document.createElement('th');
  corner.textContent = 'well';
  head.appendChild(corner);
  for (const solute of matrix.cols) {
    const th = document.createElement('th');
    th.textContent = solute;
    head.appendChild(th);
  }
  thead.appendChild(head);
  table.appendChild(thead);

  const body = document.createElement('tbody');
  table.appendChild(body);
  matrix.rows.forEach((well, i) => {
    const row = document.createElement('tr');
    body.appendChild(row);
    const label = document.createElement('td');
    row.appendChild(label);
    label.textContent = well;
    label.className = 'well-label';
    matrix.cols.forEach((_, j) => {
      const cell = matrix.cells[i * matrix.cols.length + j];
      const td = document.createElement('td');
      row.appendChild(td);
      td.className = `cell ${cell.class}`;
      td.style.backgroundColor = CLASS_COLORS[cell.class];
      td.dataset.class = cell.class;
      if (cell.slope !== undefined) {
        td.title = `${fmt(cell.slope)} log-units/yr`;
        td.textContent = fmt(cell.slope);
      } else if (cell.value !== undefined) {
        td.title = fmt(cell.value);
        td.textContent = fmt(cell.value);
      } else if (cell.note) {
        td.title = cell.note;
      }
    });
  });
  container.appendChild(table);
}
