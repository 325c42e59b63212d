/** Dependency-free SVG helpers: pure functions from numbers to path data. */

export type Scale = (value: number) => number;

export function scaleLinear(domain: [number, number], range: [number, number]): Scale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const span = d1 - d0;
  if (span === 0) return () => (r0 + r1) / 2;
  return (value) => r0 + ((value - d0) / span) * (r1 - r0);
}

function fmt(value: number): string {
  // fixed notation keeps path data stable and diff-friendly
  return Number(value.toFixed(3)).toString();
}

/** "M x0 y0 L x1 y1 ..." for paired xs/ys already in pixel space. */
export function linePath(xs: number[], ys: number[]): string {
  if (xs.length !== ys.length) throw new Error("xs and ys must pair up");
  if (xs.length === 0) return "";
  const parts: string[] = [];
  for (let i = 0; i < xs.length; i++) {
    parts.push(`${i === 0 ? "M" : "L"} ${fmt(xs[i]!)} ${fmt(ys[i]!)}`);
  }
  return parts.join(" ");
}

export interface SparklineOptions {
  width: number;
  height: number;
  pad?: number;
}

/** Path for a value series, y auto-scaled, zero always in view. */
export function sparklinePath(values: number[], opts: SparklineOptions): string {
  if (values.length === 0) return "";
  const pad = opts.pad ?? 2;
  const max = Math.max(...values, 1e-9);
  const min = Math.min(...values, 0);
  const x = scaleLinear([0, Math.max(values.length - 1, 1)], [pad, opts.width - pad]);
  const y = scaleLinear([min, max], [opts.height - pad, pad]);
  return linePath(
    values.map((_, i) => x(i)),
    values.map((v) => y(v)),
  );
}

/** count+1 evenly spaced tick values across [min, max]. */
export function ticks(min: number, max: number, count: number): number[] {
  if (count < 1) return [min];
  const out: number[] = [];
  for (let i = 0; i <= count; i++) {
    out.push(min + ((max - min) * i) / count);
  }
  return out;
}
