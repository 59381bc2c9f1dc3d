export { ApiError, DceClient } from "./api.js";
export type { FetchLike } from "./api.js";
export { SurveyFlow } from "./surveyFlow.js";
export type { FlowPhase, FlowState } from "./surveyFlow.js";
export { renderMarkdown } from "./markdown.js";
export {
  NO_ERRORS,
  attachServerErrors,
  fullFactorial,
  parameterCount,
  statusLine,
  validateSettings,
} from "./settingsForm.js";
export type { FieldError } from "./settingsForm.js";
export {
  attributeColumns,
  choiceSetCard,
  coefficientChart,
  resultsTable,
  wtpTargetOptions,
} from "./adminViews.js";
export type {
  CardAlternative,
  CardRow,
  ChoiceSetCard,
  CoefficientChart,
  IntervalBar,
  ResultsRow,
} from "./adminViews.js";
export * from "./types.js";
