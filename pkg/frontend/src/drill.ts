// Drill and exam screen logic. Controllers hold plain state objects and talk
// to the API; render functions turn a state into HTML. The outcome (and with
// it the explanation) exists in state only after a submission round-trips,
// so nothing correctness-shaped can render before the server answers.

import { ApiError, Client } from "./api.js";
import type { AnswerOutcome, DrillItem, GradeState } from "./api.js";
import { escapeHtml, formatGrade, formatSmly } from "./format.js";

export type DrillPhase = "idle" | "loading" | "answering" | "submitting" | "revealed" | "failed";

export interface DrillState {
  phase: DrillPhase;
  item: DrillItem | null;
  selected: number | null;
  outcome: AnswerOutcome | null;
  grade: GradeState | null;
  balance: number | null;
  error: string | null;
}

function errorText(err: unknown): string {
  if (err instanceof ApiError) return err.message;
  return "network error, try again";
}

export class DrillController {
  state: DrillState = {
    phase: "idle",
    item: null,
    selected: null,
    outcome: null,
    grade: null,
    balance: null,
    error: null,
  };

  constructor(
    private client: Client,
    readonly drillsetId: string,
  ) {}

  async start(): Promise<void> {
    try {
      this.state.grade = await this.client.grade(this.drillsetId);
      this.state.balance = (await this.client.balance()).balance;
    } catch (err) {
      this.state.error = errorText(err);
    }
    await this.loadNext();
  }

  async loadNext(): Promise<void> {
    this.state.phase = "loading";
    this.state.outcome = null;
    this.state.selected = null;
    this.state.error = null;
    try {
      this.state.item = await this.client.nextItem(this.drillsetId);
      this.state.phase = "answering";
    } catch (err) {
      this.state.phase = "failed";
      this.state.error = errorText(err);
    }
  }

  select(index: number): void {
    // selection is locked from the moment an answer is submitted
    if (this.state.phase !== "answering") return;
    if (!this.state.item || index < 0 || index >= this.state.item.options.length) return;
    this.state.selected = index;
  }

  canSubmit(): boolean {
    return (
      (this.state.phase === "answering" || this.state.phase === "failed") &&
      this.state.item !== null &&
      this.state.selected !== null
    );
  }

  async submit(): Promise<void> {
    if (!this.canSubmit()) return;
    const item = this.state.item as DrillItem;
    const selected = this.state.selected as number;
    this.state.phase = "submitting";
    this.state.error = null;
    try {
      const outcome = await this.client.submitAnswer(this.drillsetId, item.id, selected);
      this.state.outcome = outcome;
      this.state.grade = outcome.grade_state;
      this.state.phase = "revealed";
      if (outcome.rewards.length > 0) {
        // only rewards move the balance from this screen
        this.state.balance = (await this.client.balance()).balance;
      }
    } catch (err) {
      // keep the served item and the selection so the same answer can be retried
      this.state.phase = "failed";
      this.state.error = errorText(err);
    }
  }

  async retry(): Promise<void> {
    if (this.state.phase !== "failed") return;
    if (this.state.item && this.state.selected !== null) {
      await this.submit();
    } else {
      await this.loadNext();
    }
  }

  async next(): Promise<void> {
    if (this.state.phase !== "revealed") return;
    await this.loadNext();
  }
}

export type ExamPhase = "idle" | "starting" | "answering" | "submitting" | "finished" | "failed";

export interface ExamState {
  phase: ExamPhase;
  examId: string | null;
  n: number;
  answered: number;
  item: DrillItem | null;
  selected: number | null;
  lastOutcome: AnswerOutcome | null;
  score: number | null;
  error: string | null;
}

export class ExamController {
  state: ExamState = {
    phase: "idle",
    examId: null,
    n: 0,
    answered: 0,
    item: null,
    selected: null,
    lastOutcome: null,
    score: null,
    error: null,
  };

  constructor(private client: Client) {}

  async start(drillsetId: string, n: number): Promise<void> {
    this.state.phase = "starting";
    this.state.error = null;
    try {
      const started = await this.client.beginExam(drillsetId, n);
      this.state.examId = started.exam_id;
      this.state.n = started.n;
      this.state.answered = 0;
      this.state.item = started.first_item;
      this.state.selected = null;
      this.state.lastOutcome = null;
      this.state.score = null;
      this.state.phase = "answering";
    } catch (err) {
      this.state.phase = "failed";
      this.state.error = errorText(err);
    }
  }

  select(index: number): void {
    if (this.state.phase !== "answering") return;
    if (!this.state.item || index < 0 || index >= this.state.item.options.length) return;
    this.state.selected = index;
  }

  canSubmit(): boolean {
    return (
      (this.state.phase === "answering" || this.state.phase === "failed") &&
      this.state.examId !== null &&
      this.state.item !== null &&
      this.state.selected !== null
    );
  }

  async submit(): Promise<void> {
    if (!this.canSubmit()) return;
    const item = this.state.item as DrillItem;
    const selected = this.state.selected as number;
    this.state.phase = "submitting";
    this.state.error = null;
    try {
      const answer = await this.client.submitExamAnswer(
        this.state.examId as string,
        item.id,
        selected,
      );
      this.state.lastOutcome = answer;
      this.state.answered += 1;
      if (answer.next_item) {
        // exam mode auto-advances; the next item is already in hand
        this.state.item = answer.next_item;
        this.state.selected = null;
        this.state.phase = "answering";
      } else {
        this.state.item = null;
        this.state.selected = null;
        this.state.score = answer.score;
        this.state.phase = "finished";
      }
    } catch (err) {
      this.state.phase = "failed";
      this.state.error = errorText(err);
    }
  }
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

function renderGradeMeter(grade: GradeState | null): string {
  if (!grade) return "";
  const percent = Math.max(0, Math.min(100, grade.grade * 100));
  const badge = grade.aced
    ? '<span class="badge badge-aced">aced</span>'
    : grade.complete
      ? ""
      : '<span class="badge badge-incomplete">incomplete</span>';
  return `
    <div class="grade-meter">
      <div class="meter"><span style="width: ${percent}%"></span></div>
      <span class="grade-value">${formatGrade(grade.grade)}</span>
      ${badge}
    </div>`;
}

function renderOptions(item: DrillItem, selected: number | null, locked: boolean): string {
  return item.options
    .map((option, i) => {
      const classes = ["option"];
      if (i === selected) classes.push("selected");
      if (option.kind !== "plain") classes.push("special");
      return `
        <button class="${classes.join(" ")}" data-action="select-option" data-index="${i}"
                ${locked ? "disabled" : ""}>${escapeHtml(option.text)}</button>`;
    })
    .join("");
}

function renderOutcome(outcome: AnswerOutcome): string {
  const verdict = outcome.correct
    ? '<div class="verdict verdict-right">Right</div>'
    : '<div class="verdict verdict-wrong">Wrong</div>';
  const rewards = outcome.rewards
    .map((r) => `<div class="reward">+${formatSmly(r.amount)} (${escapeHtml(r.rule)})</div>`)
    .join("");
  return `
    <div class="outcome">
      ${verdict}
      <div class="explanation">${escapeHtml(outcome.explanation)}</div>
      ${rewards}
    </div>`;
}

export function renderDrill(state: DrillState): string {
  const header = `
    <div class="session-header">
      ${renderGradeMeter(state.grade)}
      ${state.balance === null ? "" : `<span class="balance">${formatSmly(state.balance)}</span>`}
    </div>`;
  const error = state.error
    ? `<div class="error-banner">${escapeHtml(state.error)}
         <button data-action="retry-drill">Retry</button></div>`
    : "";

  if (!state.item) {
    return `${header}${error}<div class="empty">${state.phase === "loading" ? "Loading item..." : "No item."}</div>`;
  }

  const locked = state.phase !== "answering";
  const controls =
    state.phase === "revealed"
      ? '<button class="primary" data-action="next-item">Next item</button>'
      : `<button class="primary" data-action="submit-answer"
                 ${state.selected === null || state.phase === "submitting" ? "disabled" : ""}>Submit</button>`;
  return `
    ${header}
    ${error}
    <div class="item-card">
      <p class="stem">${escapeHtml(state.item.stem)}</p>
      <div class="options">${renderOptions(state.item, state.selected, locked)}</div>
      ${state.outcome ? renderOutcome(state.outcome) : ""}
      <div class="controls">
        ${controls}
        <button data-action="stop-drill">Stop</button>
      </div>
    </div>`;
}

export function renderExam(state: ExamState): string {
  const error = state.error
    ? `<div class="error-banner">${escapeHtml(state.error)}
         <button data-action="retry-exam">Retry</button></div>`
    : "";
  if (state.phase === "finished") {
    const score = state.score === null ? "" : `<div class="exam-score">Score: ${formatGrade(state.score)}</div>`;
    return `${error}
      <div class="item-card">
        <p class="stem">Exam finished: ${state.answered} of ${state.n} answered.</p>
        ${score}
        ${state.lastOutcome ? renderOutcome(state.lastOutcome) : ""}
      </div>`;
  }
  if (!state.item) {
    return `${error}<div class="empty">${state.phase === "starting" ? "Starting exam..." : "No exam running."}</div>`;
  }
  const locked = state.phase !== "answering";
  return `
    ${error}
    <div class="exam-progress">Item ${state.answered + 1} of ${state.n}</div>
    ${state.lastOutcome ? renderOutcome(state.lastOutcome) : ""}
    <div class="item-card">
      <p class="stem">${escapeHtml(state.item.stem)}</p>
      <div class="options">${renderOptions(state.item, state.selected, locked)}</div>
      <div class="controls">
        <button class="primary" data-action="submit-exam-answer"
                ${state.selected === null || state.phase === "submitting" ? "disabled" : ""}>Submit</button>
      </div>
    </div>`;
}
