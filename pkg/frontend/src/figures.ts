/**
 * The six batch figures rendered from sweep CSVs.
 *
 * Every plotted quantity comes from a CSV field; the renderer adds only
 * styling and the dashed markers encoded in the annotation column.  The
 * mode-to-color mapping is fixed across all figures (cyan for k=0 up to
 * dark blue for the band edge, matching the per-mode palette used
 * throughout).
 */

import {
  annotationLines,
  modeIndices,
  modeSeries,
  parseSweepCsv,
  SweepRow,
} from "./csv.js";
import { Panel, renderSvg, Series, VLine } from "./svg.js";

export const FIGURE_IDS = [
  "flatflat", "quadraman", "quadcavity", "thermal", "squeezing", "ramanshift",
] as const;

export type FigureId = (typeof FIGURE_IDS)[number];

export interface FigureSpec {
  figure: FigureId;
  /** raw CSV contents, in the order given on the command line */
  inputs: string[];
  /** override of the per-mode palette (cycled if shorter than the modes) */
  colors?: string[];
  /** draw the dashed resonance/threshold reference lines (default true) */
  referenceLines?: boolean;
}

export class FigureError extends Error {}

/** Fixed k -> color map shared by every figure. */
export const MODE_COLORS = [
  "#00acc1", // k = 0, cyan
  "#7cb342", // k = 1
  "#fbc02d", // k = 2
  "#fb8c00", // k = 3
  "#e53935", // k = 4
  "#283593", // k = 5, dark blue
];

export function modeColor(k: number): string {
  return MODE_COLORS[k % MODE_COLORS.length];
}

type Field = keyof SweepRow;

interface SeriesStyle {
  dash?: string;
  width?: number;
  labelPrefix?: string;
  cssSuffix?: string;
}

function fieldSeries(rows: SweepRow[], field: Field, errField: Field | null,
                     style: SeriesStyle = {}): Series[] {
  const out: Series[] = [];
  for (const k of modeIndices(rows)) {
    const mode = modeSeries(rows, k).filter((r) => r[field] !== null);
    if (mode.length === 0) continue;
    out.push({
      label: style.labelPrefix ? `${style.labelPrefix} k=${k}` : `k=${k}`,
      color: modeColor(k),
      points: mode.map((r) => ({ x: r.omega0c, y: r[field] as number })),
      errors: errField ? mode.map((r) => (r[errField] as number | null) ?? 0) : undefined,
      cssClass: style.cssSuffix ? `k${k} ${style.cssSuffix}` : `k${k}`,
      dash: style.dash,
      width: style.width,
    });
  }
  if (out.length === 0) {
    throw new FigureError(`no usable values in column '${String(field)}'`);
  }
  return out;
}

function resonanceVLines(rows: SweepRow[]): VLine[] {
  const lines = annotationLines(rows);
  const out: VLine[] = [];
  const seen = new Set<number>();
  for (const res of lines.resonances) {
    if (!seen.has(res.omega0c)) {
      seen.add(res.omega0c);
      out.push({ x: res.omega0c, color: modeColor(res.k) });
    }
  }
  if (lines.threshold !== null) {
    out.push({ x: lines.threshold, color: "#333" });
  }
  return out;
}

const X_LABEL = "photonic bandgap (units of the Raman frequency)";

function deltaPanels(rows: SweepRow[], titlePrefix: string): Panel[] {
  const vLines = resonanceVLines(rows);
  return [
    {
      title: `${titlePrefix}: Raman fluctuation modification`,
      xLabel: X_LABEL,
      yLabel: "dV(Q_k)",
      series: fieldSeries(rows, "dV_Q", "dV_Q_err"),
      vLines,
      yZeroLine: true,
    },
    {
      title: `${titlePrefix}: cavity fluctuation modification`,
      xLabel: X_LABEL,
      yLabel: "dV(E_k)",
      series: fieldSeries(rows, "dV_E", "dV_E_err"),
      vLines,
      yZeroLine: true,
    },
  ];
}

function figureFlatFlat(rows: SweepRow[]): Panel[] {
  return deltaPanels(rows, "flat bands");
}

function figureQuadRaman(rows: SweepRow[]): Panel[] {
  return deltaPanels(rows, "quadratic Raman band");
}

function figureQuadCavity(rows: SweepRow[]): Panel[] {
  const panels = deltaPanels(rows, "quadratic photon band");
  const threshold = annotationLines(rows).threshold;
  if (threshold !== null) {
    const xMax = Math.max(...rows.map((r) => r.omega0c));
    for (const panel of panels) {
      panel.shade = { from: threshold, to: xMax };
    }
  }
  // collective flat-band maximum for comparison
  panels[1].hLines = [{ y: 0.4, color: "#333" }];
  return panels;
}

function figureThermal(rows: SweepRow[]): Panel[] {
  const vLines = resonanceVLines(rows);
  return [
    {
      title: "thermal cavity variances (solid: coupled, dotted: free)",
      xLabel: X_LABEL,
      yLabel: "V(E_k)",
      series: [
        ...fieldSeries(rows, "V_E_g", null, { width: 1.8, cssSuffix: "coupled" }),
        ...fieldSeries(rows, "V_E_0", null,
                       { dash: "2,4", width: 1.2, labelPrefix: "free", cssSuffix: "free" }),
      ],
      vLines,
    },
    {
      title: "thermal cavity fluctuation modification",
      xLabel: X_LABEL,
      yLabel: "dV(E_k)_th",
      series: fieldSeries(rows, "dV_E_th", "dV_E_err"),
      vLines,
      yZeroLine: true,
    },
    {
      title: "Raman deviation from the coupled cavity variance",
      xLabel: X_LABEL,
      yLabel: "dV'(Q_k)_th",
      series: fieldSeries(rows, "dVp_Q_th", null),
      vLines,
      yZeroLine: true,
    },
  ];
}

function squeezingPanel(rows: SweepRow[], title: string): Panel {
  const k0 = modeSeries(rows, 0).filter((r) => r.V_min !== null);
  if (k0.length === 0) {
    throw new FigureError("no squeezing data on the k=0 rows");
  }
  return {
    title,
    xLabel: X_LABEL,
    yLabel: "extremal V_theta (k=0)",
    series: [
      {
        label: "V_min",
        color: "#2e7d32",
        points: k0.map((r) => ({ x: r.omega0c, y: r.V_min as number })),
        cssClass: "vmin",
      },
      {
        label: "V_max",
        color: "#c62828",
        points: k0.map((r) => ({ x: r.omega0c, y: r.V_max as number })),
        cssClass: "vmax",
      },
      {
        label: "theta_min (rad)",
        color: "#2e7d32",
        points: k0.map((r) => ({ x: r.omega0c, y: r.theta_min as number })),
        cssClass: "thetamin",
        markers: true,
        width: 0,
      },
    ],
    vLines: resonanceVLines(rows),
  };
}

function figureSqueezing(inputs: SweepRow[][]): Panel[] {
  return inputs.map((rows) =>
    squeezingPanel(rows, `cavity squeezing, scenario '${rows[0].scenario}'`));
}

function figureRamanShift(inputs: SweepRow[][]): Panel[] {
  const rows = inputs[0];
  const panel: Panel = {
    title: "static Raman coordinate per mode",
    xLabel: X_LABEL,
    yLabel: "Re <Q_k>",
    series: fieldSeries(rows, "mean_Q_re", "mean_Q_err"),
    vLines: resonanceVLines(rows),
    yZeroLine: true,
  };
  if (inputs.length > 1) {
    // overlay a single-mode sweep as a dashed reference
    const ref = modeSeries(inputs[1], 0).filter((r) => r.mean_Q_re !== null);
    panel.series.push({
      label: `${inputs[1][0].scenario} reference`,
      color: "#333",
      dash: "6,4",
      width: 1.2,
      points: ref.map((r) => ({ x: r.omega0c, y: r.mean_Q_re as number })),
      cssClass: "reference",
    });
  }
  return [panel];
}

function applyStyle(panels: Panel[], spec: FigureSpec): Panel[] {
  if (spec.referenceLines === false) {
    for (const panel of panels) {
      panel.vLines = [];
      panel.hLines = [];
    }
  }
  if (spec.colors && spec.colors.length > 0) {
    const palette = spec.colors;
    for (const panel of panels) {
      for (const series of panel.series) {
        const match = /^k(\d+)/.exec(series.cssClass ?? "");
        if (match) {
          series.color = palette[Number(match[1]) % palette.length];
        }
      }
    }
  }
  return panels;
}

export function buildPanels(spec: FigureSpec): Panel[] {
  if (!FIGURE_IDS.includes(spec.figure)) {
    throw new FigureError(
      `unknown figure '${spec.figure}'; expected one of ${FIGURE_IDS.join(", ")}`);
  }
  if (spec.inputs.length === 0) {
    throw new FigureError("at least one input CSV is required");
  }
  const parsed = spec.inputs.map(parseSweepCsv);
  const panels = (() => {
    switch (spec.figure) {
      case "flatflat":
        return figureFlatFlat(parsed[0]);
      case "quadraman":
        return figureQuadRaman(parsed[0]);
      case "quadcavity":
        return figureQuadCavity(parsed[0]);
      case "thermal":
        return figureThermal(parsed[0]);
      case "squeezing":
        return figureSqueezing(parsed);
      case "ramanshift":
        return figureRamanShift(parsed);
    }
  })();
  return applyStyle(panels, spec);
}

export function renderFigure(spec: FigureSpec): string {
  return renderSvg(buildPanels(spec));
}
