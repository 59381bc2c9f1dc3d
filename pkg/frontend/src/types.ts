/** Wire types for the choice-experiment service, validated with zod. */

import { z } from "zod";

export const AttributeLevelSchema = z.object({
  name: z.string(),
  level: z.string(),
});

export const AlternativeSchema = z.object({
  label: z.string(),
  attributes: z.array(AttributeLevelSchema),
});

export const ChoiceSetSchema = z.object({
  set_index: z.number().int().positive(),
  total_sets: z.number().int().positive(),
  alternatives: z.array(AlternativeSchema).min(2),
});

export const SessionStartSchema = z.object({
  session_id: z.string(),
  respondent_id: z.number().int().positive(),
  design_version: z.number().int().nonnegative(),
  intro_text: z.string(),
  choice_set: ChoiceSetSchema,
});

export const SessionStateSchema = z.object({
  session_id: z.string(),
  respondent_id: z.number().int().positive(),
  design_version: z.number().int().nonnegative(),
  completed: z.boolean(),
  total_sets: z.number().int().positive(),
  intro_text: z.string(),
  final_text: z.string().nullable().optional(),
  choice_set: ChoiceSetSchema.nullable().optional(),
});

export const AnswerResultSchema = z.object({
  completed: z.boolean(),
  choice_set: ChoiceSetSchema.nullable().optional(),
  final_text: z.string().nullable().optional(),
  design_regenerated: z.boolean(),
});

export const DesignSummarySchema = z.object({
  design_id: z.string(),
  job_id: z.string(),
  criterion_value: z.number(),
  criterion_kind: z.enum(["d", "db"]),
  n_params: z.number().int().positive(),
  n_sets: z.number().int().positive(),
  n_alts: z.number().int().positive(),
  opt_out: z.boolean(),
  passes_used: z.number().int(),
  start_index: z.number().int(),
});

export const SurveySummarySchema = z.object({
  survey_id: z.string(),
  design_id: z.string(),
  closed: z.boolean(),
  completed_respondents: z.number().int().nonnegative(),
  design_version: z.number().int().nonnegative(),
  serial_mode: z.object({
    kind: z.enum(["none", "per_respondent", "per_batch"]),
    batch_size: z.number().int().positive(),
  }),
  n_sets: z.number().int().positive(),
  regeneration_log: z.array(z.string()),
});

export const CoefficientSchema = z.object({
  name: z.string(),
  estimate: z.number(),
  std_error: z.number(),
  z_value: z.number(),
  p_value: z.number(),
  ci_low: z.number(),
  ci_high: z.number(),
});

export const EstimationSchema = z.object({
  coefficients: z.array(CoefficientSchema),
  log_likelihood: z.number(),
  iterations: z.number().int(),
  converged: z.boolean(),
});

export const WtpEntrySchema = z.object({
  name: z.string(),
  estimate: z.number(),
  std_error: z.number(),
  ci_low: z.number(),
  ci_high: z.number(),
});

export const WtpSchema = z.object({
  price: z.string(),
  entries: z.array(WtpEntrySchema),
  estimation: EstimationSchema,
});

export const LabeledDesignDocSchema = z.object({
  schema_version: z.number().int(),
  attribute_names: z.array(z.string()),
  level_names: z.array(z.array(z.string())),
  design: z.object({
    n_sets: z.number().int().positive(),
    alts_per_set: z.number().int().positive(),
    opt_out: z.boolean(),
    levels_per_attribute: z.array(z.number().int()),
    column_names: z.array(z.string()),
    rows: z.array(
      z.object({
        set: z.number().int(),
        alt: z.number().int(),
        x: z.array(z.number()),
      }),
    ),
  }),
});

export type AttributeLevel = z.infer<typeof AttributeLevelSchema>;
export type Alternative = z.infer<typeof AlternativeSchema>;
export type ChoiceSet = z.infer<typeof ChoiceSetSchema>;
export type SessionStart = z.infer<typeof SessionStartSchema>;
export type SessionState = z.infer<typeof SessionStateSchema>;
export type AnswerResult = z.infer<typeof AnswerResultSchema>;
export type DesignSummary = z.infer<typeof DesignSummarySchema>;
export type SurveySummary = z.infer<typeof SurveySummarySchema>;
export type Coefficient = z.infer<typeof CoefficientSchema>;
export type Estimation = z.infer<typeof EstimationSchema>;
export type WtpEntry = z.infer<typeof WtpEntrySchema>;
export type Wtp = z.infer<typeof WtpSchema>;
export type LabeledDesignDoc = z.infer<typeof LabeledDesignDocSchema>;

/** Request bodies -------------------------------------------------------- */

export interface AttributeInput {
  name: string;
  levels: string[];
}

export interface PriorInput {
  mean: number[];
  covariance?: number[][];
  n_draws?: number;
}

export interface DesignSettingsInput {
  attributes: AttributeInput[];
  n_alts: number;
  n_sets: number;
  opt_out: boolean;
  bayesian: boolean;
  priors?: PriorInput;
  seed: number;
}

export interface SerialModeInput {
  kind: "none" | "per_respondent" | "per_batch";
  batch_size?: number;
}

export interface SurveyCreateInput {
  design_id: string;
  intro_text?: string;
  final_text?: string;
  alternative_labels?: string[];
  serial_mode?: SerialModeInput;
  regen_draws?: number;
}

export interface EstimationInput {
  survey_id?: string;
  responses_csv?: string;
  covariates?: string[];
  price_recode?: {
    columns: string[];
    values: Record<string, number>;
    base_value: number;
  };
}

export interface WtpInput extends EstimationInput {
  price: string;
  targets: string[];
}
