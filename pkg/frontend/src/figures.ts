import { Table, column, columns } from "./csv.js";
import * as svg from "./svg.js";

const COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];
const PLOT = {
  x0: svg.MARGIN.left,
  x1: svg.WIDTH - svg.MARGIN.right,
  y0: svg.HEIGHT - svg.MARGIN.bottom,
  y1: svg.MARGIN.top,
};

/** Least-squares power-law fit y = C x^q in log-log coordinates. */
export function fitSlope(x: number[], y: number[]): { q: number; C: number } {
  if (x.length !== y.length || x.length < 2) {
    throw new Error(`need at least 2 points to fit a slope, got ${x.length}`);
  }
  const lx = x.map(Math.log10);
  const ly = y.map(Math.log10);
  const n = lx.length;
  const mx = lx.reduce((a, b) => a + b, 0) / n;
  const my = ly.reduce((a, b) => a + b, 0) / n;
  let sxx = 0;
  let sxy = 0;
  for (let i = 0; i < n; i++) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  const q = sxy / sxx;
  return { q, C: Math.pow(10, my - q * mx) };
}

interface Axes {
  sx: svg.Scale;
  sy: svg.Scale;
  parts: string[];
}

function frame(title: string, xlabel: string, ylabel: string): string[] {
  return [
    svg.line(PLOT.x0, PLOT.y0, PLOT.x1, PLOT.y0, { stroke: "black" }),
    svg.line(PLOT.x0, PLOT.y0, PLOT.x0, PLOT.y1, { stroke: "black" }),
    svg.text((PLOT.x0 + PLOT.x1) / 2, 20, title, { "text-anchor": "middle", "font-size": 15 }),
    svg.text((PLOT.x0 + PLOT.x1) / 2, svg.HEIGHT - 12, xlabel, { "text-anchor": "middle" }),
    svg.text(16, (PLOT.y0 + PLOT.y1) / 2, ylabel, {
      "text-anchor": "middle",
      transform: `rotate(-90 16 ${(PLOT.y0 + PLOT.y1) / 2})`,
    }),
  ];
}

function linearAxes(
  xs: number[], ys: number[], title: string, xlabel: string, ylabel: string
): Axes {
  const [xlo, xhi] = svg.padded(xs);
  const [ylo, yhi] = svg.padded(ys);
  const sx = svg.linear(xlo, xhi, PLOT.x0, PLOT.x1);
  const sy = svg.linear(ylo, yhi, PLOT.y0, PLOT.y1);
  const parts = frame(title, xlabel, ylabel);
  for (let i = 0; i <= 4; i++) {
    const xv = xlo + (i / 4) * (xhi - xlo);
    const yv = ylo + (i / 4) * (yhi - ylo);
    parts.push(svg.line(sx(xv), PLOT.y0, sx(xv), PLOT.y0 + 5, { stroke: "black" }));
    parts.push(svg.text(sx(xv), PLOT.y0 + 20, prettyTick(xv), { "text-anchor": "middle" }));
    parts.push(svg.line(PLOT.x0 - 5, sy(yv), PLOT.x0, sy(yv), { stroke: "black" }));
    parts.push(svg.text(PLOT.x0 - 8, sy(yv) + 4, prettyTick(yv), { "text-anchor": "end" }));
  }
  return { sx, sy, parts };
}

function prettyTick(v: number): string {
  if (v !== 0 && (Math.abs(v) >= 1e4 || Math.abs(v) < 1e-3)) return v.toExponential(1);
  return String(parseFloat(v.toPrecision(3)));
}

function legendEntry(i: number, label: string, color: string): string {
  const y = PLOT.y1 + 16 + 18 * i;
  return (
    svg.line(PLOT.x1 - 150, y - 4, PLOT.x1 - 120, y - 4, { stroke: color, "stroke-width": 2 }) +
    svg.text(PLOT.x1 - 112, y, label)
  );
}

/* Error columns a sweep report may carry, in display order. */
const ERROR_SERIES = ["E_ii_u", "E_ii_v", "dH_max", "eta_sup"];

/**
 * Log-log scatter of sweep errors against eps, one fitted power law per
 * series, the fitted slope annotated in the legend.
 */
export function plotConvergence(t: Table, label: string): string {
  const eps = column(t, "eps", label);
  if (eps.length < 2) {
    throw new Error(`${label}: need at least 2 eps rows for a convergence fit, got ${eps.length}`);
  }
  const present = ERROR_SERIES.filter((name) => t.header.includes(name));
  if (present.length === 0) {
    throw new Error(
      `${label}: schema mismatch, no error column among [${ERROR_SERIES.join(", ")}]`
    );
  }
  const series = present.map((name) => ({ name, values: column(t, name, label) }));

  const allE = series.flatMap((s) => s.values);
  const xlo = Math.min(...eps) / 1.3;
  const xhi = Math.max(...eps) * 1.3;
  const ylo = Math.min(...allE) / 2;
  const yhi = Math.max(...allE) * 2;
  const sx = svg.logarithmic(xlo, xhi, PLOT.x0, PLOT.x1);
  const sy = svg.logarithmic(ylo, yhi, PLOT.y0, PLOT.y1);

  const parts = frame("error vs eps", "eps", "error");
  for (const v of eps) {
    parts.push(svg.line(sx(v), PLOT.y0, sx(v), PLOT.y0 + 5, { stroke: "black" }));
    parts.push(svg.text(sx(v), PLOT.y0 + 20, String(v), { "text-anchor": "middle" }));
  }
  for (let d = Math.ceil(Math.log10(ylo)); d <= Math.floor(Math.log10(yhi)); d++) {
    const v = Math.pow(10, d);
    parts.push(svg.line(PLOT.x0 - 5, sy(v), PLOT.x0, sy(v), { stroke: "black" }));
    parts.push(svg.text(PLOT.x0 - 8, sy(v) + 4, `1e${d}`, { "text-anchor": "end" }));
  }

  series.forEach((s, i) => {
    const color = COLORS[i % COLORS.length];
    const { q, C } = fitSlope(eps, s.values);
    const fit: Array<[number, number]> = eps.map((e) => [sx(e), sy(C * Math.pow(e, q))]);
    parts.push(svg.polyline(fit, { stroke: color, "stroke-dasharray": "4 3" }));
    for (let j = 0; j < eps.length; j++) {
      parts.push(svg.circle(sx(eps[j]), sy(s.values[j]), 4, { fill: color }));
    }
    parts.push(legendEntry(i, `${s.name}: slope q = ${q.toFixed(2)}`, color));
  });
  return svg.document(parts.join("\n"));
}

/** Both wave components against the traveling coordinate. */
export function plotWave(t: Table, label: string): string {
  const [zi, pi, si] = columns(t, ["z", "phi", "psi"], label);
  const z = t.rows.map((r) => r[zi]);
  const phi = t.rows.map((r) => r[pi]);
  const psi = t.rows.map((r) => r[si]);
  const { sx, sy, parts } = linearAxes(z, [...phi, ...psi], "standing wave profile", "z", "value");
  parts.push(svg.polyline(z.map((v, j) => [sx(v), sy(phi[j])]), { stroke: COLORS[0], "stroke-width": 2 }));
  parts.push(svg.polyline(z.map((v, j) => [sx(v), sy(psi[j])]), { stroke: COLORS[1], "stroke-width": 2 }));
  parts.push(legendEntry(0, "phi", COLORS[0]));
  parts.push(legendEntry(1, "psi", COLORS[1]));
  return svg.document(parts.join("\n"));
}

/**
 * The separatrix in the (u, v) plane with optional trajectories laid on
 * top.  Each trajectory gets a marker where it ends, which is where the
 * flow parked it, so the attractors show up without being computed here.
 */
export function plotPhasePortrait(sep: Table, trajs: Table[], label: string): string {
  const [ui, zi] = columns(sep, ["u", "zeta"], label);
  const su = sep.rows.map((r) => r[ui]);
  const sv = sep.rows.map((r) => r[zi]);
  const allU = [0, ...su];
  const allV = [0, ...sv];
  const trajPts = trajs.map((t, k) => {
    const [ti, vi] = columns(t, ["u", "v"], `${label} trajectory ${k}`);
    const pu = t.rows.map((r) => r[ti]);
    const pv = t.rows.map((r) => r[vi]);
    allU.push(...pu);
    allV.push(...pv);
    return { pu, pv };
  });

  const { sx, sy, parts } = linearAxes(allU, allV, "phase plane", "u", "v");
  parts.push(
    svg.polyline(su.map((v, j) => [sx(v), sy(sv[j])]), {
      stroke: "black",
      "stroke-width": 2,
      "stroke-dasharray": "6 4",
      class: "separatrix",
    })
  );
  parts.push(svg.circle(sx(0), sy(0), 4, { fill: "black" }));
  trajPts.forEach(({ pu, pv }, k) => {
    const color = COLORS[k % COLORS.length];
    parts.push(svg.polyline(pu.map((v, j) => [sx(v), sy(pv[j])]), { stroke: color, class: "trajectory" }));
    const last = pu.length - 1;
    parts.push(
      svg.circle(sx(pu[last]), sy(pv[last]), 5, {
        fill: color,
        class: "endpoint",
        "data-end": `${pu[last]},${pv[last]}`,
      })
    );
  });
  return svg.document(parts.join("\n"));
}

/**
 * Interface history.  A radius column plots as R(t); the polyline schema
 * overlays the first, middle, and last recorded fronts.
 */
export function plotFronts(t: Table, label: string): string {
  if (t.header.includes("R")) {
    const [ti, ri] = columns(t, ["t", "R"], label);
    const ts = t.rows.map((r) => r[ti]);
    const rs = t.rows.map((r) => r[ri]);
    const { sx, sy, parts } = linearAxes(ts, rs, "front radius", "t", "R");
    parts.push(svg.polyline(ts.map((v, j) => [sx(v), sy(rs[j])]), { stroke: COLORS[0], "stroke-width": 2 }));
    return svg.document(parts.join("\n"));
  }
  const [ti, xi, yi] = columns(t, ["t", "x", "y"], label);
  const times: number[] = [];
  for (const r of t.rows) {
    if (times.length === 0 || r[ti] !== times[times.length - 1]) times.push(r[ti]);
  }
  const picks = [times[0], times[Math.floor((times.length - 1) / 2)], times[times.length - 1]];
  const xs = t.rows.map((r) => r[xi]);
  const ys = t.rows.map((r) => r[yi]);
  const { sx, sy, parts } = linearAxes(xs, ys, "front positions", "x", "y");
  picks.forEach((tv, k) => {
    const ring = t.rows.filter((r) => r[ti] === tv).map(
      (r): [number, number] => [sx(r[xi]), sy(r[yi])]
    );
    ring.push(ring[0]);
    parts.push(svg.polyline(ring, { stroke: COLORS[k % COLORS.length], class: "front-frame" }));
    parts.push(legendEntry(k, `t = ${prettyTick(tv)}`, COLORS[k % COLORS.length]));
  });
  return svg.document(parts.join("\n"));
}
