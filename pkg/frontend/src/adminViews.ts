/** View models for the admin screens: choice-set cards, results table,
 * coefficient/CI chart geometry, and the WTP target picker. All numbers
 * are taken verbatim from service responses.
 */

import {
  ChoiceSet,
  Coefficient,
  Estimation,
  LabeledDesignDoc,
} from "./types.js";

export interface CardRow {
  name: string;
  level: string;
}

export interface CardAlternative {
  label: string;
  isOptOut: boolean;
  rows: CardRow[];
}

export interface ChoiceSetCard {
  setIndex: number;
  totalSets: number;
  progressLabel: string; // "Set i of S"
  alternatives: CardAlternative[];
}

/** Card model for one choice set. Non-opt-out alternatives always carry
 * exactly one row per attribute; the opt-out renders as a bare button. */
export function choiceSetCard(set: ChoiceSet): ChoiceSetCard {
  if (set.set_index > set.total_sets) {
    throw new Error(
      `set index ${set.set_index} exceeds total ${set.total_sets}`,
    );
  }
  return {
    setIndex: set.set_index,
    totalSets: set.total_sets,
    progressLabel: `Set ${set.set_index} of ${set.total_sets}`,
    alternatives: set.alternatives.map((alt) => ({
      label: alt.label,
      isOptOut: alt.attributes.length === 0,
      rows: alt.attributes.map((a) => ({ name: a.name, level: a.level })),
    })),
  };
}

export interface IntervalBar {
  name: string;
  estimate: number;
  ciLow: number;
  ciHigh: number;
  /** pixel geometry */
  y: number;
  xEstimate: number;
  xLow: number;
  xHigh: number;
}

export interface CoefficientChart {
  width: number;
  height: number;
  xZero: number;
  bars: IntervalBar[];
}

/** Horizontal point-and-interval chart: one bar per coefficient, a
 * vertical zero line, intervals straight from the service CIs. */
export function coefficientChart(
  estimation: Estimation,
  width = 480,
  rowHeight = 28,
): CoefficientChart {
  const coefs = estimation.coefficients;
  const los = coefs.map((c) => c.ci_low);
  const his = coefs.map((c) => c.ci_high);
  const min = Math.min(0, ...los);
  const max = Math.max(0, ...his);
  const span = max - min || 1;
  const toX = (v: number) => ((v - min) / span) * width;
  return {
    width,
    height: rowHeight * coefs.length,
    xZero: toX(0),
    bars: coefs.map((c, i) => ({
      name: c.name,
      estimate: c.estimate,
      ciLow: c.ci_low,
      ciHigh: c.ci_high,
      y: rowHeight * i + rowHeight / 2,
      xEstimate: toX(c.estimate),
      xLow: toX(c.ci_low),
      xHigh: toX(c.ci_high),
    })),
  };
}

export interface ResultsRow {
  name: string;
  estimate: string;
  stdError: string;
  z: string;
  p: string;
  ci: string;
}

export function resultsTable(estimation: Estimation): ResultsRow[] {
  const f = (v: number) => v.toFixed(4);
  return estimation.coefficients.map((c: Coefficient) => ({
    name: c.name,
    estimate: f(c.estimate),
    stdError: f(c.std_error),
    z: f(c.z_value),
    p: f(c.p_value),
    ci: `[${f(c.ci_low)}, ${f(c.ci_high)}]`,
  }));
}

/** Coefficient names offered as WTP targets: every non-base level except
 * the price attribute's own columns. Base levels have no coefficient and
 * therefore never appear as options. */
export function wtpTargetOptions(
  design: LabeledDesignDoc,
  priceAttribute: string,
): string[] {
  const columns = design.design.column_names;
  return columns.filter((name) => !name.startsWith(priceAttribute + "."));
}

/** Dummy columns belonging to one attribute (for the price-recode form). */
export function attributeColumns(
  design: LabeledDesignDoc,
  attribute: string,
): string[] {
  return design.design.column_names.filter((name) =>
    name.startsWith(attribute + "."),
  );
}
