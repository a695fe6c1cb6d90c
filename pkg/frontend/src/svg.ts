/* String-built SVG. No canvas, no DOM: every figure is a pure function
   of its input table, so identical inputs give identical bytes. */

export const WIDTH = 640;
export const HEIGHT = 480;
export const MARGIN = { left: 72, right: 20, top: 34, bottom: 52 };

export type Attrs = Record<string, string | number>;

export function el(tag: string, attrs: Attrs, body = ""): string {
  let out = `<${tag}`;
  for (const [k, v] of Object.entries(attrs)) out += ` ${k}="${v}"`;
  return body === "" ? out + "/>" : out + `>${body}</${tag}>`;
}

export function text(x: number, y: number, s: string, attrs: Attrs = {}): string {
  return el("text", { x: fmt(x), y: fmt(y), "font-size": 13, "font-family": "sans-serif", ...attrs }, esc(s));
}

export function polyline(pts: Array<[number, number]>, attrs: Attrs): string {
  const points = pts.map(([x, y]) => `${fmt(x)},${fmt(y)}`).join(" ");
  return el("polyline", { points, fill: "none", ...attrs });
}

export function circle(x: number, y: number, r: number, attrs: Attrs): string {
  return el("circle", { cx: fmt(x), cy: fmt(y), r, ...attrs });
}

export function line(x1: number, y1: number, x2: number, y2: number, attrs: Attrs): string {
  return el("line", { x1: fmt(x1), y1: fmt(y1), x2: fmt(x2), y2: fmt(y2), ...attrs });
}

export function document(body: string): string {
  return (
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${WIDTH} ${HEIGHT}" ` +
    `width="${WIDTH}" height="${HEIGHT}">\n` +
    el("rect", { x: 0, y: 0, width: WIDTH, height: HEIGHT, fill: "white" }) +
    "\n" + body + "\n</svg>\n"
  );
}

/* two decimals is well under a pixel and keeps the output stable across
   platforms with different printf tails */
export function fmt(v: number): string {
  return v.toFixed(2);
}

function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export interface Scale {
  (v: number): number;
}

export function linear(lo: number, hi: number, a: number, b: number): Scale {
  const span = hi - lo || 1;
  return (v: number) => a + ((v - lo) / span) * (b - a);
}

export function logarithmic(lo: number, hi: number, a: number, b: number): Scale {
  const s = linear(Math.log10(lo), Math.log10(hi), a, b);
  return (v: number) => s(Math.log10(v));
}

/** Pad a data range by 5% each side (degenerate ranges get a unit pad). */
export function padded(values: number[]): [number, number] {
  let lo = Math.min(...values);
  let hi = Math.max(...values);
  if (lo === hi) {
    lo -= 0.5;
    hi += 0.5;
  }
  const pad = 0.05 * (hi - lo);
  return [lo - pad, hi + pad];
}
