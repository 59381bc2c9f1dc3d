/** Typed HTTP client for the choice-experiment service.
 *
 * Every number shown in the UI comes from these calls; nothing is
 * recomputed client-side.
 */

import { z } from "zod";
import {
  AnswerResult,
  AnswerResultSchema,
  ChoiceSet,
  DesignSettingsInput,
  DesignSummary,
  DesignSummarySchema,
  Estimation,
  EstimationInput,
  EstimationSchema,
  LabeledDesignDoc,
  LabeledDesignDocSchema,
  SessionStart,
  SessionStartSchema,
  SessionState,
  SessionStateSchema,
  SurveyCreateInput,
  SurveySummary,
  SurveySummarySchema,
  Wtp,
  WtpInput,
  WtpSchema,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
    this.name = "ApiError";
  }
}

function extractDetail(body: unknown): string {
  if (body && typeof body === "object" && "detail" in body) {
    const detail = (body as { detail: unknown }).detail;
    if (typeof detail === "string") return detail;
    if (Array.isArray(detail)) {
      return detail
        .map((d) => (typeof d === "string" ? d : JSON.stringify(d)))
        .join("; ");
    }
    return JSON.stringify(detail);
  }
  return JSON.stringify(body);
}

export class DceClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(
    schema: { parse(data: unknown): T },
    method: string,
    path: string,
    body?: unknown,
  ): Promise<T> {
    const response = await this.fetchFn(this.baseUrl + path, {
      method,
      headers: body !== undefined ? { "Content-Type": "application/json" } : {},
      body: body !== undefined ? JSON.stringify(body) : undefined,
    });
    const text = await response.text();
    let parsed: unknown;
    try {
      parsed = text.length ? JSON.parse(text) : null;
    } catch {
      parsed = { detail: text };
    }
    if (!response.ok) {
      throw new ApiError(response.status, extractDetail(parsed));
    }
    return schema.parse(parsed);
  }

  private async requestText(method: string, path: string): Promise<string> {
    const response = await this.fetchFn(this.baseUrl + path, { method });
    const text = await response.text();
    if (!response.ok) {
      let detail = text;
      try {
        detail = extractDetail(JSON.parse(text));
      } catch {
        /* plain-text error body */
      }
      throw new ApiError(response.status, detail);
    }
    return text;
  }

  // -- designs -------------------------------------------------------------

  createDesign(settings: DesignSettingsInput): Promise<DesignSummary> {
    return this.request(DesignSummarySchema, "POST", "/designs", { settings });
  }

  listDesigns(): Promise<string[]> {
    return this.request(
      z.object({ designs: z.array(z.string()) }).transform((d) => d.designs),
      "GET",
      "/designs",
    );
  }

  getDesignDoc(designId: string): Promise<LabeledDesignDoc> {
    return this.request(
      z.object({ design: LabeledDesignDocSchema }).transform((d) => d.design),
      "GET",
      `/designs/${designId}`,
    );
  }

  getDecodedDesign(designId: string): Promise<ChoiceSet[]> {
    return this.request(
      z
        .object({
          sets: z.array(
            z.object({
              set_index: z.number().int(),
              total_sets: z.number().int(),
              alternatives: z.array(
                z.object({
                  label: z.string(),
                  attributes: z.array(
                    z.object({ name: z.string(), level: z.string() }),
                  ),
                }),
              ),
            }),
          ),
        })
        .transform((d) => d.sets),
      "GET",
      `/designs/${designId}?view=decoded`,
    );
  }

  // -- surveys ---------------------------------------------------------------

  createSurvey(input: SurveyCreateInput): Promise<SurveySummary> {
    return this.request(SurveySummarySchema, "POST", "/surveys", input);
  }

  getSurvey(surveyId: string): Promise<SurveySummary> {
    return this.request(SurveySummarySchema, "GET", `/surveys/${surveyId}`);
  }

  startSession(surveyId: string): Promise<SessionStart> {
    return this.request(
      SessionStartSchema,
      "POST",
      `/surveys/${surveyId}/sessions`,
    );
  }

  getSessionState(sessionToken: string): Promise<SessionState> {
    return this.request(SessionStateSchema, "GET", `/sessions/${sessionToken}`);
  }

  submitAnswer(sessionToken: string, choice: number): Promise<AnswerResult> {
    return this.request(
      AnswerResultSchema,
      "POST",
      `/sessions/${sessionToken}/answers`,
      { choice },
    );
  }

  closeSurvey(surveyId: string): Promise<SurveySummary> {
    return this.request(
      SurveySummarySchema,
      "POST",
      `/surveys/${surveyId}/close`,
    );
  }

  getResponsesCsv(surveyId: string): Promise<string> {
    return this.requestText("GET", `/surveys/${surveyId}/responses`);
  }

  // -- analysis --------------------------------------------------------------

  estimate(input: EstimationInput): Promise<Estimation> {
    return this.request(EstimationSchema, "POST", "/estimations", input);
  }

  wtp(input: WtpInput): Promise<Wtp> {
    return this.request(WtpSchema, "POST", "/wtp", input);
  }
}
