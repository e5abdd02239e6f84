/**
 * Figure assembly: map each figure id to its CSV inputs and panel layout.
 *
 * This component only plots what the simulation CLI wrote; it never
 * recomputes physics. Inputs are the per-figure CSV files plus the JSON
 * manifest, all produced by `nvvm figure <id>`.
 */

import path from "path";

import { col, loadTable, SchemaError, Table } from "./csv.js";
import {
  document as svgDocument,
  heatPanel,
  linePanel,
  PANEL,
  PanelOptions,
  Series,
} from "./svg.js";

export const FIGURE_IDS = ["fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8"] as const;
export type FigureId = (typeof FIGURE_IDS)[number];

const PANEL_THETAS = [10, 40, 70, 85, 87, 89];
const MAP_THETAS = [10, 40, 80];

// method palette: numerical blue, two-level orange, perturbative green
const METHOD_COLORS: Record<string, string> = {
  exact: "#1f77b4",
  qubit: "#ff7f0e",
  perturbative: "#2ca02c",
};

// theta line styles for the uncertainty curves: solid, dashed, dotted
const THETA_DASH = ["", "6,3", "2,3"];

function grid(panels: string[], cols: number): string {
  return panels
    .map((body, i) => {
      const ox = (i % cols) * PANEL.W;
      const oy = Math.floor(i / cols) * PANEL.H;
      return `<g transform="translate(${ox},${oy})">${body}</g>`;
    })
    .join("\n");
}

function panelAt(opt: PanelOptions, index: number): string {
  return linePanel(0, 0, opt, `clip${index}`);
}

function renderFig2(dir: string): string {
  const panels = PANEL_THETAS.map((theta, i) => {
    const table = loadTable(path.join(dir, `fig2_theta${theta}.csv`), [
      "phi_deg",
      "lambda_exact",
      "lambda_qubit",
      "lambda_pert",
    ]);
    const phi = col(table, "phi_deg");
    const exact = col(table, "lambda_exact");
    const series: Series[] = [
      { x: phi, y: exact, color: METHOD_COLORS.exact, label: "numerical" },
      { x: phi, y: col(table, "lambda_qubit"), color: METHOD_COLORS.qubit, label: "two-level" },
      { x: phi, y: col(table, "lambda_pert"), color: METHOD_COLORS.perturbative, label: "perturbative" },
    ];
    return panelAt(
      {
        title: `theta = ${theta} deg`,
        xLabel: "phi (deg)",
        yLabel: "Rabi frequency (MHz)",
        series,
        yMin: 0,
        yMax: 1.25 * Math.max(...exact),
      },
      i
    );
  });
  return svgDocument(3, 2, grid(panels, 3), "Rabi frequency vs drive-azimuth mismatch");
}

function renderFig3(dir: string): string {
  const methods = ["exact", "qubit", "perturbative"] as const;
  const thetaColors = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"];
  const panels = methods.map((method, i) => {
    const required = ["phi_deg"];
    for (const theta of PANEL_THETAS) required.push(`re_theta${theta}`, `im_theta${theta}`);
    const table = loadTable(path.join(dir, `fig3_${method}.csv`), required);
    const series: Series[] = PANEL_THETAS.map((theta, k) => ({
      x: col(table, `re_theta${theta}`),
      y: col(table, `im_theta${theta}`),
      color: thetaColors[k],
      label: `theta=${theta}`,
      width: 1.1,
    }));
    return panelAt(
      {
        title: method,
        xLabel: "Re element (MHz)",
        yLabel: "Im element (MHz)",
        series,
      },
      i
    );
  });
  return svgDocument(3, 1, grid(panels, 3), "Drive matrix element on the complex plane");
}

interface LongMap {
  x: number[];
  y: number[];
  z: number[][];
}

/** Pivot a long-format (y, x, value) table into a dense grid. */
function pivot(table: Table, yName: string, xName: string, zName: string): LongMap {
  const xsRaw = col(table, xName);
  const ysRaw = col(table, yName);
  const zsRaw = col(table, zName);
  const xs = [...new Set(xsRaw)].sort((a, b) => a - b);
  const ys = [...new Set(ysRaw)].sort((a, b) => a - b);
  const xIndex = new Map(xs.map((v, i) => [v, i]));
  const yIndex = new Map(ys.map((v, i) => [v, i]));
  const z: number[][] = ys.map(() => xs.map(() => NaN));
  for (let r = 0; r < zsRaw.length; r++) {
    z[yIndex.get(ysRaw[r])!][xIndex.get(xsRaw[r])!] = zsRaw[r];
  }
  return { x: xs, y: ys, z };
}

function renderFig4(dir: string): string {
  const panels: string[] = [];
  for (const theta of MAP_THETAS) {
    const table = loadTable(path.join(dir, `fig4_dlambda_theta${theta}.csv`), [
      "b_mw_mt",
      "phi_deg",
      "d_lambda_d_phi_mhz",
    ]);
    const m = pivot(table, "b_mw_mt", "phi_deg", "d_lambda_d_phi_mhz");
    panels.push(
      heatPanel(0, 0, {
        title: `|dL/dphi|, theta = ${theta} deg`,
        xLabel: "phi (deg)",
        yLabel: "B_mw (mT)",
        x: m.x,
        y: m.y,
        z: m.z,
        zLabel: "MHz/rad",
      })
    );
  }
  for (const theta of MAP_THETAS) {
    const table = loadTable(path.join(dir, `fig4_domega_theta${theta}.csv`), [
      "b_r_mt",
      "phi_deg",
      "d_domega_d_phi_mhz",
    ]);
    const m = pivot(table, "b_r_mt", "phi_deg", "d_domega_d_phi_mhz");
    panels.push(
      heatPanel(0, 0, {
        title: `|dW/dphi|, theta = ${theta} deg`,
        xLabel: "phi (deg)",
        yLabel: "B_r (mT)",
        x: m.x,
        y: m.y,
        z: m.z,
        zLabel: "MHz/rad",
      })
    );
  }
  return svgDocument(3, 2, grid(panels, 3), "Angular sensitivity vs reference amplitude and azimuth");
}

function renderFig5(dir: string): string {
  const panels: string[] = [];
  for (const amp of ["0p5", "1p0", "2p0"]) {
    const table = loadTable(path.join(dir, `fig5_dlambda_bmw${amp}.csv`), [
      "b_mt",
      "theta_deg",
      "d_lambda_d_phi_mhz",
    ]);
    const m = pivot(table, "b_mt", "theta_deg", "d_lambda_d_phi_mhz");
    panels.push(
      heatPanel(0, 0, {
        title: `|dL/dphi|, B_mw = ${amp.replace("p", ".")} mT`,
        xLabel: "theta (deg)",
        yLabel: "B (mT)",
        x: m.x,
        y: m.y,
        z: m.z,
        zLabel: "MHz/rad",
      })
    );
  }
  for (const amp of ["0p5", "1p0", "2p0"]) {
    const table = loadTable(path.join(dir, `fig5_domega_br${amp}.csv`), [
      "b_mt",
      "theta_deg",
      "d_domega_d_phi_mhz",
    ]);
    const m = pivot(table, "b_mt", "theta_deg", "d_domega_d_phi_mhz");
    panels.push(
      heatPanel(0, 0, {
        title: `|dW/dphi|, B_r = ${amp.replace("p", ".")} mT`,
        xLabel: "theta (deg)",
        yLabel: "B (mT)",
        x: m.x,
        y: m.y,
        z: m.z,
        zLabel: "MHz/rad",
      })
    );
  }
  return svgDocument(3, 2, grid(panels, 3), "Angular sensitivity vs target amplitude and polar angle");
}

function uncertaintyPanel(table: Table, xName: string, xLabel: string, index: number): string {
  const x = col(table, xName);
  const series: Series[] = [];
  MAP_THETAS.forEach((theta, k) => {
    series.push({
      x,
      y: col(table, `conv_theta${theta}`),
      color: "#1f77b4",
      label: `DC ref, theta=${theta}`,
      dash: THETA_DASH[k],
    });
  });
  MAP_THETAS.forEach((theta, k) => {
    series.push({
      x,
      y: col(table, `mw_theta${theta}`),
      color: "#d62728",
      label: `MW ref, theta=${theta}`,
      dash: THETA_DASH[k],
    });
  });
  return panelAt(
    {
      title: "conventional (blue) vs microwave reference (red)",
      xLabel,
      yLabel: "uncertainty (rad)",
      series,
      logY: true,
    },
    index
  );
}

function renderFig6(dir: string): string {
  const required = ["phi_deg"];
  for (const t of MAP_THETAS) required.push(`conv_theta${t}`, `mw_theta${t}`);
  const table = loadTable(path.join(dir, "fig6.csv"), required);
  return svgDocument(1, 1, uncertaintyPanel(table, "phi_deg", "phi (deg)", 0), "Azimuth uncertainty vs azimuth mismatch");
}

function renderFig7(dir: string): string {
  const required = ["b_mt"];
  for (const t of MAP_THETAS) required.push(`conv_theta${t}`, `mw_theta${t}`);
  const table = loadTable(path.join(dir, "fig7.csv"), required);
  return svgDocument(1, 1, uncertaintyPanel(table, "b_mt", "B (mT)", 0), "Azimuth uncertainty vs target amplitude");
}

function renderFig8(dir: string): string {
  const table = loadTable(path.join(dir, "fig8.csv"), ["theta_deg", "L", "ratio"]);
  const thetas = [...new Set(col(table, "theta_deg"))].sort((a, b) => a - b);
  const colors = ["#444444", "#1f77b4", "#2ca02c", "#d62728"];
  const series: Series[] = thetas.map((theta, k) => {
    const xs: number[] = [];
    const ys: number[] = [];
    const tcol = col(table, "theta_deg");
    const lcol = col(table, "L");
    const rcol = col(table, "ratio");
    for (let i = 0; i < table.rows; i++) {
      if (tcol[i] === theta) {
        xs.push(lcol[i]);
        ys.push(rcol[i]);
      }
    }
    return {
      x: xs,
      y: ys,
      color: colors[k % colors.length],
      label: `theta=${theta} deg`,
      width: 1.5,
    };
  });
  return svgDocument(
    1,
    1,
    panelAt(
      {
        title: "separable / entangled uncertainty",
        xLabel: "register size L",
        yLabel: "uncertainty ratio",
        series,
      },
      0
    ),
    "Entangled-sensor advantage vs register size"
  );
}

const RENDERERS: Record<FigureId, (dir: string) => string> = {
  fig2: renderFig2,
  fig3: renderFig3,
  fig4: renderFig4,
  fig5: renderFig5,
  fig6: renderFig6,
  fig7: renderFig7,
  fig8: renderFig8,
};

export function render(figureId: string, inputDir: string): string {
  const renderer = RENDERERS[figureId as FigureId];
  if (renderer === undefined) {
    throw new SchemaError(`unknown figure id '${figureId}' (know: ${FIGURE_IDS.join(", ")})`);
  }
  return renderer(inputDir);
}
