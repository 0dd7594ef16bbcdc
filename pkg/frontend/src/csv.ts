/**
 * Reader for the simulator's sweep CSV contract.
 *
 * The schema is fixed and versioned on the producer side: 20 columns, one
 * row per (scenario, bandgap, nonnegative mode index), empty fields for
 * quantities a run does not produce (thermal columns at T=0, squeezing
 * columns off the k=0 row).  The renderer never computes physics; every
 * plotted number comes straight out of these rows.
 */

export const CSV_COLUMNS = [
  "scenario", "omega0c", "k",
  "dV_E", "dV_E_err", "dV_Q", "dV_Q_err",
  "V_E_g", "V_E_0", "V_Q_g", "V_Q_0",
  "dV_E_th", "dV_Q_th", "dVp_Q_th",
  "mean_Q_re", "mean_Q_err",
  "theta_min", "V_min", "V_max",
  "annotation",
] as const;

export type ColumnName = (typeof CSV_COLUMNS)[number];

export interface SweepRow {
  scenario: string;
  omega0c: number;
  k: number;
  dV_E: number | null;
  dV_E_err: number | null;
  dV_Q: number | null;
  dV_Q_err: number | null;
  V_E_g: number | null;
  V_E_0: number | null;
  V_Q_g: number | null;
  V_Q_0: number | null;
  dV_E_th: number | null;
  dV_Q_th: number | null;
  dVp_Q_th: number | null;
  mean_Q_re: number | null;
  mean_Q_err: number | null;
  theta_min: number | null;
  V_min: number | null;
  V_max: number | null;
  annotation: string;
}

export class CsvError extends Error {}

export function parseSweepCsv(text: string): SweepRow[] {
  const lines = text.split(/\r?\n/).filter((line) => line.length > 0);
  if (lines.length === 0) {
    throw new CsvError("empty CSV: no header");
  }
  const header = lines[0].split(",");
  for (const column of CSV_COLUMNS) {
    if (!header.includes(column)) {
      throw new CsvError(`CSV is missing required column '${column}'`);
    }
  }
  if (lines.length === 1) {
    throw new CsvError("no data rows");
  }
  const index = new Map(header.map((name, i) => [name, i]));
  const rows: SweepRow[] = [];
  for (const line of lines.slice(1)) {
    const parts = line.split(",");
    if (parts.length !== header.length) {
      throw new CsvError(
        `CSV row has ${parts.length} fields, expected ${header.length}`);
    }
    const str = (name: ColumnName) => parts[index.get(name)!];
    const num = (name: ColumnName): number | null => {
      const raw = str(name);
      if (raw === "") return null;
      const value = Number(raw);
      if (!Number.isFinite(value)) {
        throw new CsvError(`non-numeric value '${raw}' in column '${name}'`);
      }
      return value;
    };
    rows.push({
      scenario: str("scenario"),
      omega0c: num("omega0c")!,
      k: num("k")!,
      dV_E: num("dV_E"),
      dV_E_err: num("dV_E_err"),
      dV_Q: num("dV_Q"),
      dV_Q_err: num("dV_Q_err"),
      V_E_g: num("V_E_g"),
      V_E_0: num("V_E_0"),
      V_Q_g: num("V_Q_g"),
      V_Q_0: num("V_Q_0"),
      dV_E_th: num("dV_E_th"),
      dV_Q_th: num("dV_Q_th"),
      dVp_Q_th: num("dVp_Q_th"),
      mean_Q_re: num("mean_Q_re"),
      mean_Q_err: num("mean_Q_err"),
      theta_min: num("theta_min"),
      V_min: num("V_min"),
      V_max: num("V_max"),
      annotation: str("annotation"),
    });
  }
  return rows;
}

export function modeIndices(rows: SweepRow[]): number[] {
  return [...new Set(rows.map((r) => r.k))].sort((a, b) => a - b);
}

/** Rows of one mode ordered by bandgap. */
export function modeSeries(rows: SweepRow[], k: number): SweepRow[] {
  return rows.filter((r) => r.k === k).sort((a, b) => a.omega0c - b.omega0c);
}

export interface AnnotationLines {
  /** vertical dashed lines: label -> bandgap values (deduplicated) */
  resonances: { k: number; omega0c: number }[];
  threshold: number | null;
}

/** Collect resonance/threshold markers embedded in the annotation column. */
export function annotationLines(rows: SweepRow[]): AnnotationLines {
  const resonances = new Map<string, { k: number; omega0c: number }>();
  let threshold: number | null = null;
  for (const row of rows) {
    for (const tag of row.annotation.split(";")) {
      if (tag.startsWith("resonance=")) {
        const value = Number(tag.slice("resonance=".length));
        resonances.set(`${row.k}@${value}`, { k: row.k, omega0c: value });
      } else if (tag.startsWith("threshold=")) {
        threshold = Number(tag.slice("threshold=".length));
      }
    }
  }
  return {
    resonances: [...resonances.values()].sort(
      (a, b) => a.omega0c - b.omega0c || a.k - b.k),
    threshold,
  };
}
