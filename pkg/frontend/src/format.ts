/** Single number formatter so every rendered numeral is traceable to the
 *  response field it came from (the tests audit exactly this mapping). */

export function fmt(value: number): string {
  if (!Number.isFinite(value)) return '';
  if (Number.isInteger(value) && Math.abs(value) < 1e15) return String(value);
  return String(Number(value.toPrecision(4)));
}
