/** Client-side mirror of the service's design-settings validation.
 *
 * The service remains the source of truth (its 422 messages are shown
 * inline), but the form runs the same rules locally so the researcher
 * sees "No errors found." or the offending field before submitting.
 */

import { AttributeInput, DesignSettingsInput } from "./types.js";

export const NO_ERRORS = "No errors found.";

export interface FieldError {
  field: string;
  message: string;
}

export function parameterCount(attributes: AttributeInput[]): number {
  return attributes.reduce((k, a) => k + Math.max(a.levels.length - 1, 0), 0);
}

export function fullFactorial(attributes: AttributeInput[]): number {
  return attributes.reduce((n, a) => n * Math.max(a.levels.length, 1), 1);
}

export function validateSettings(settings: DesignSettingsInput): FieldError[] {
  const errors: FieldError[] = [];
  const { attributes } = settings;

  if (attributes.length < 1) {
    return [{ field: "attributes", message: "at least one attribute is required" }];
  }
  attributes.forEach((attr, i) => {
    const field = `attributes[${i}]`;
    if (!attr.name) {
      errors.push({ field, message: "attribute name must be non-empty" });
    }
    if (attr.levels.length < 2) {
      errors.push({
        field,
        message: `attribute '${attr.name}' needs at least 2 levels`,
      });
    }
    if (attr.levels.some((lv) => !lv)) {
      errors.push({
        field,
        message: `attribute '${attr.name}' has an empty level label`,
      });
    }
    if (new Set(attr.levels).size !== attr.levels.length) {
      errors.push({
        field,
        message: `attribute '${attr.name}' has duplicate level labels`,
      });
    }
  });
  const names = attributes.map((a) => a.name);
  if (new Set(names).size !== names.length) {
    errors.push({ field: "attributes", message: "attribute names must be distinct" });
  }
  if (settings.n_alts < 2) {
    errors.push({
      field: "n_alts",
      message: "need at least 2 alternatives per choice set",
    });
  }
  if (settings.n_sets < 1) {
    errors.push({ field: "n_sets", message: "need at least 1 choice set" });
  }
  if (errors.length) return errors;

  const k = parameterCount(attributes);
  const full = fullFactorial(attributes);
  if (settings.n_alts > full) {
    errors.push({
      field: "n_alts",
      message:
        `${settings.n_alts} alternatives per set exceeds the full ` +
        `factorial of ${full} distinct profiles`,
    });
  }
  if (settings.n_sets * (settings.n_alts - 1) < k) {
    errors.push({
      field: "n_sets",
      message:
        `too few sets: ${settings.n_sets} sets with ${settings.n_alts} ` +
        `alternatives identify at most ` +
        `${settings.n_sets * (settings.n_alts - 1)} parameters but the ` +
        `design has ${k}`,
    });
  }
  if (settings.priors && settings.priors.mean.length !== k) {
    errors.push({
      field: "priors",
      message:
        `prior mean has length ${settings.priors.mean.length} but the ` +
        `design has ${k} parameters`,
    });
  }
  if (settings.seed < 0 || !Number.isInteger(settings.seed)) {
    errors.push({ field: "seed", message: "seed must be a non-negative integer" });
  }
  return errors;
}

/** The status line under the form: either the all-clear or a count. */
export function statusLine(errors: FieldError[]): string {
  return errors.length === 0
    ? NO_ERRORS
    : `${errors.length} problem${errors.length === 1 ? "" : "s"} found.`;
}

/** Map the service's 422 detail strings back onto form fields by prefix
 * matching, so server-side messages render inline like local ones. */
export function attachServerErrors(messages: string[]): FieldError[] {
  return messages.map((message) => {
    if (message.includes("attribute")) return { field: "attributes", message };
    if (message.includes("sets")) return { field: "n_sets", message };
    if (message.includes("alternatives")) return { field: "n_alts", message };
    if (message.includes("prior")) return { field: "priors", message };
    if (message.includes("seed")) return { field: "seed", message };
    return { field: "form", message };
  });
}
