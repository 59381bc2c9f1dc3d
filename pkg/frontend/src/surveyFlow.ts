/** State machine driving a respondent through intro -> choice sets -> final.
 *
 * The UI is stateless with respect to survey data: the session token is
 * the only thing worth persisting (e.g. in the URL), and `resume` rebuilds
 * the view from service state. Every answer waits for the service
 * acknowledgment before advancing, and a per-set idempotency guard makes
 * double-clicks harmless. Service errors surface as a non-blocking banner
 * on the unchanged current state.
 */

import { ApiError, DceClient } from "./api.js";
import { ChoiceSet } from "./types.js";

export type FlowPhase = "idle" | "intro" | "answering" | "final";

export interface FlowState {
  phase: FlowPhase;
  sessionToken: string | null;
  designVersion: number | null;
  introText: string;
  finalText: string;
  choiceSet: ChoiceSet | null;
  /** 1-based index of the set on screen; never exceeds totalSets. */
  progress: number;
  totalSets: number;
  designRegenerated: boolean;
  submitting: boolean;
  /** Non-blocking banner; null when the last call succeeded. */
  error: string | null;
}

function initialState(): FlowState {
  return {
    phase: "idle",
    sessionToken: null,
    designVersion: null,
    introText: "",
    finalText: "",
    choiceSet: null,
    progress: 0,
    totalSets: 0,
    designRegenerated: false,
    submitting: false,
    error: null,
  };
}

export class SurveyFlow {
  private state: FlowState = initialState();
  /** Set indices already acknowledged by the service. */
  private answered = new Set<number>();

  constructor(
    private readonly client: DceClient,
    private readonly surveyId: string,
  ) {}

  getState(): Readonly<FlowState> {
    return this.state;
  }

  /** Open a session for a new respondent and show the intro page. */
  async start(): Promise<FlowState> {
    try {
      const session = await this.client.startSession(this.surveyId);
      this.answered = new Set();
      this.state = {
        ...initialState(),
        phase: "intro",
        sessionToken: session.session_id,
        designVersion: session.design_version,
        introText: session.intro_text,
        choiceSet: session.choice_set,
        progress: session.choice_set.set_index,
        totalSets: session.choice_set.total_sets,
      };
    } catch (err) {
      this.state = { ...this.state, error: describe(err) };
    }
    return this.state;
  }

  /** Rebuild the view for an existing session token (page reload). */
  async resume(sessionToken: string): Promise<FlowState> {
    try {
      const remote = await this.client.getSessionState(sessionToken);
      this.answered = new Set();
      for (let s = 1; s < (remote.choice_set?.set_index ?? remote.total_sets + 1); s++) {
        this.answered.add(s);
      }
      this.state = {
        ...initialState(),
        phase: remote.completed ? "final" : "answering",
        sessionToken,
        designVersion: remote.design_version,
        introText: remote.intro_text,
        finalText: remote.final_text ?? "",
        choiceSet: remote.choice_set ?? null,
        progress: remote.completed
          ? remote.total_sets
          : remote.choice_set?.set_index ?? 1,
        totalSets: remote.total_sets,
      };
    } catch (err) {
      this.state = { ...this.state, error: describe(err) };
    }
    return this.state;
  }

  /** Leave the intro page and show the first choice set. */
  begin(): FlowState {
    if (this.state.phase === "intro") {
      this.state = { ...this.state, phase: "answering" };
    }
    return this.state;
  }

  /** Submit the selected alternative (1-based) for the set on screen. */
  async choose(alternative: number): Promise<FlowState> {
    const { phase, sessionToken, choiceSet, submitting } = this.state;
    if (phase !== "answering" || !sessionToken || !choiceSet) {
      return this.state;
    }
    // idempotency: one acknowledged answer per set, and never a second
    // request while one is in flight
    if (submitting || this.answered.has(choiceSet.set_index)) {
      return this.state;
    }
    this.state = { ...this.state, submitting: true, error: null };
    try {
      const result = await this.client.submitAnswer(sessionToken, alternative);
      this.answered.add(choiceSet.set_index);
      if (result.completed) {
        this.state = {
          ...this.state,
          phase: "final",
          choiceSet: null,
          progress: this.state.totalSets,
          finalText: result.final_text ?? "",
          designRegenerated: result.design_regenerated,
          submitting: false,
        };
      } else {
        const next = result.choice_set!;
        this.state = {
          ...this.state,
          choiceSet: next,
          progress: Math.min(next.set_index, this.state.totalSets),
          submitting: false,
        };
      }
    } catch (err) {
      // non-blocking banner; current set stays on screen for a retry
      this.state = { ...this.state, submitting: false, error: describe(err) };
    }
    return this.state;
  }

  /** "Next respondent >": a fresh session on the (possibly regenerated) design. */
  async nextRespondent(): Promise<FlowState> {
    return this.start();
  }

  /** "Close": stop the survey; the caller then navigates to results. */
  async closeSurvey(): Promise<FlowState> {
    try {
      await this.client.closeSurvey(this.surveyId);
      this.state = { ...this.state, error: null };
    } catch (err) {
      this.state = { ...this.state, error: describe(err) };
    }
    return this.state;
  }
}

function describe(err: unknown): string {
  if (err instanceof ApiError) return err.detail;
  return err instanceof Error ? err.message : String(err);
}
