import { describe, expect, it } from "vitest";

import {
  attributeColumns,
  choiceSetCard,
  coefficientChart,
  resultsTable,
  wtpTargetOptions,
} from "../src/adminViews.js";
import { Estimation, LabeledDesignDoc } from "../src/types.js";

const SET = {
  set_index: 2,
  total_sets: 16,
  alternatives: [
    {
      label: "Option 1",
      attributes: [
        { name: "Effectiveness", level: "80%" },
        { name: "Required dosage", level: "1 dose" },
      ],
    },
    {
      label: "Option 2",
      attributes: [
        { name: "Effectiveness", level: "70%" },
        { name: "Required dosage", level: "2 doses" },
      ],
    },
    { label: "Opt-out", attributes: [] },
  ],
};

const ESTIMATION: Estimation = {
  coefficients: [
    {
      name: "a.1",
      estimate: 0.5,
      std_error: 0.1,
      z_value: 5,
      p_value: 0.0001,
      ci_low: 0.304,
      ci_high: 0.696,
    },
    {
      name: "b.1",
      estimate: -0.25,
      std_error: 0.1,
      z_value: -2.5,
      p_value: 0.012,
      ci_low: -0.446,
      ci_high: -0.054,
    },
  ],
  log_likelihood: -100.5,
  iterations: 4,
  converged: true,
};

const DESIGN_DOC: LabeledDesignDoc = {
  schema_version: 1,
  attribute_names: ["Effectiveness", "Out-of-pocket cost"],
  level_names: [
    ["70%", "80%", "90%"],
    ["100", "150", "200"],
  ],
  design: {
    n_sets: 2,
    alts_per_set: 2,
    opt_out: false,
    levels_per_attribute: [3, 3],
    column_names: [
      "Effectiveness.80%",
      "Effectiveness.90%",
      "Out-of-pocket cost.150",
      "Out-of-pocket cost.200",
    ],
    rows: [
      { set: 1, alt: 1, x: [1, 0, 0, 0] },
      { set: 1, alt: 2, x: [0, 1, 1, 0] },
      { set: 2, alt: 1, x: [0, 0, 0, 1] },
      { set: 2, alt: 2, x: [1, 0, 1, 0] },
    ],
  },
};

describe("choiceSetCard", () => {
  it("builds one row per attribute for coded alternatives", () => {
    const card = choiceSetCard(SET);
    expect(card.progressLabel).toBe("Set 2 of 16");
    expect(card.alternatives).toHaveLength(3);
    for (const alt of card.alternatives.slice(0, 2)) {
      expect(alt.isOptOut).toBe(false);
      expect(alt.rows).toHaveLength(2);
    }
    expect(card.alternatives[2]!.isOptOut).toBe(true);
    expect(card.alternatives[2]!.rows).toHaveLength(0);
  });

  it("rejects progress beyond the total", () => {
    expect(() => choiceSetCard({ ...SET, set_index: 17 })).toThrow();
  });
});

describe("coefficientChart", () => {
  it("draws one interval bar per coefficient", () => {
    const chart = coefficientChart(ESTIMATION);
    expect(chart.bars).toHaveLength(2);
    for (const bar of chart.bars) {
      expect(bar.xLow).toBeLessThan(bar.xEstimate);
      expect(bar.xEstimate).toBeLessThan(bar.xHigh);
      expect(bar.xLow).toBeGreaterThanOrEqual(0);
      expect(bar.xHigh).toBeLessThanOrEqual(chart.width);
    }
  });

  it("places the zero line between negative and positive estimates", () => {
    const chart = coefficientChart(ESTIMATION);
    const [positive, negative] = chart.bars;
    expect(negative!.xEstimate).toBeLessThan(chart.xZero);
    expect(positive!.xEstimate).toBeGreaterThan(chart.xZero);
  });

  it("uses the service CIs verbatim", () => {
    const chart = coefficientChart(ESTIMATION);
    expect(chart.bars[0]!.ciLow).toBe(0.304);
    expect(chart.bars[0]!.ciHigh).toBe(0.696);
  });
});

describe("resultsTable", () => {
  it("formats every coefficient with its interval", () => {
    const rows = resultsTable(ESTIMATION);
    expect(rows).toHaveLength(2);
    expect(rows[0]).toEqual({
      name: "a.1",
      estimate: "0.5000",
      stdError: "0.1000",
      z: "5.0000",
      p: "0.0001",
      ci: "[0.3040, 0.6960]",
    });
  });
});

describe("WTP target picker", () => {
  it("offers only non-price coefficient columns (base levels have none)", () => {
    const options = wtpTargetOptions(DESIGN_DOC, "Out-of-pocket cost");
    expect(options).toEqual(["Effectiveness.80%", "Effectiveness.90%"]);
    // base levels never appear: no "70%" or "100" option exists
    expect(options.join()).not.toContain("70%");
  });

  it("finds the dummy columns of the price attribute", () => {
    expect(attributeColumns(DESIGN_DOC, "Out-of-pocket cost")).toEqual([
      "Out-of-pocket cost.150",
      "Out-of-pocket cost.200",
    ]);
  });
});
