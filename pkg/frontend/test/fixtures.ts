/** Synthetic schema-conformant sweep CSVs for renderer tests. */

import { CSV_COLUMNS } from "../src/csv.js";

export interface FixtureOptions {
  scenario?: string;
  bandgaps?: number[];
  modes?: number[];
  thermal?: boolean;
  annotation?: (omega0c: number, k: number) => string;
}

export function makeCsv(opts: FixtureOptions = {}): string {
  const scenario = opts.scenario ?? "flatflat";
  const bandgaps = opts.bandgaps ?? [0.3, 0.4, 0.5, 0.6, 0.7];
  const modes = opts.modes ?? [0, 1, 2, 3, 4, 5];
  const annotation = opts.annotation ?? (() => "resonance=0.5");
  const lines = [CSV_COLUMNS.join(",")];
  for (const w of bandgaps) {
    for (const k of modes) {
      const peak = Math.exp(-(((w - 0.5) / 0.08) ** 2));
      const row: Record<string, string> = {
        scenario,
        omega0c: String(w),
        k: String(k),
        dV_E: String(0.4 * peak + 0.01 * k),
        dV_E_err: "0.01",
        dV_Q: String(-0.2 * peak),
        dV_Q_err: "0.008",
        V_E_g: String(1 + 0.4 * peak),
        V_E_0: "1.0",
        V_Q_g: String(1 - 0.2 * peak),
        V_Q_0: "1.0",
        dV_E_th: opts.thermal ? String(0.3 * peak) : "",
        dV_Q_th: opts.thermal ? String(0.5 * peak) : "",
        dVp_Q_th: opts.thermal ? String(-0.4 * peak) : "",
        mean_Q_re: String(-0.3 * (k === 0 ? 1 : 0.01)),
        mean_Q_err: "0.005",
        theta_min: k === 0 ? "0.05" : "",
        V_min: k === 0 ? String(1 + 0.1 * peak) : "",
        V_max: k === 0 ? String(1 + 0.5 * peak) : "",
        annotation: annotation(w, k),
      };
      lines.push(CSV_COLUMNS.map((c) => row[c]).join(","));
    }
  }
  return lines.join("\n") + "\n";
}

export function headerOnlyCsv(): string {
  return CSV_COLUMNS.join(",") + "\n";
}

export const quadRamanAnnotation = (_: number, k: number) =>
  `resonance=${0.5 * (1 + (k / 5) ** 2)}`;

export const quadCavityAnnotation = (w: number) =>
  w > 0.5 ? "threshold=0.5;nonresonant" : "threshold=0.5";
