// Browser entry point: wires the controllers to the static page shell.
// All updates flow through paint(); clicks are handled by data-action
// delegation so rendered HTML stays free of inline handlers.

import { ApiError, Client } from "./api.js";
import type { DrillSetInfo } from "./api.js";
import { DrillController, ExamController, renderDrill, renderExam } from "./drill.js";
import { PurchaseController, renderPurchase } from "./purchase.js";
import { DashboardController, renderDashboard } from "./dashboard.js";
import { escapeHtml } from "./format.js";

const DEFAULT_STATS_POLL_SECONDS = 600;

type Tab = "practice" | "exam" | "wallet" | "stats";

const apiBase = (document.getElementById("api-base") as HTMLInputElement | null)?.value ?? "";
const client = new Client(apiBase);

let tab: Tab = "practice";
let drillsets: DrillSetInfo[] = [];
let drill: DrillController | null = null;
const exam = new ExamController(client);
const purchase = new PurchaseController(client);
const dashboard = new DashboardController(client);
let statsTimer: ReturnType<typeof setInterval> | null = null;
let signedIn = false;
let signInError: string | null = null;

function el(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node;
}

function renderSetPicker(): string {
  if (drillsets.length === 0) return '<div class="empty">No drill sets published.</div>';
  const options = drillsets
    .map((s) => `<option value="${escapeHtml(s.id)}">${escapeHtml(s.title)} (${s.n_items})</option>`)
    .join("");
  return `
    <div class="set-picker">
      <select id="set-select">${options}</select>
      <button class="primary" data-action="start-drill">Practice</button>
      <button data-action="start-exam">Exam</button>
      <input id="exam-n" type="number" value="10" min="1" />
    </div>`;
}

function paint(): void {
  document.querySelectorAll("[data-tab]").forEach((node) => {
    node.classList.toggle("active", (node as HTMLElement).dataset["tab"] === tab);
  });
  const main = el("view");
  if (!signedIn) {
    main.innerHTML = `
      <div class="signin-card">
        <p>Paste your account token, or register a new self-serve account.</p>
        <input id="token-input" placeholder="token" />
        <button class="primary" data-action="sign-in">Sign in</button>
        <input id="name-input" placeholder="display name" />
        <button data-action="register">Register</button>
        ${signInError ? `<div class="error-banner">${escapeHtml(signInError)}</div>` : ""}
      </div>`;
    return;
  }
  switch (tab) {
    case "practice":
      main.innerHTML = drill ? renderDrill(drill.state) : renderSetPicker();
      break;
    case "exam":
      main.innerHTML = exam.state.phase === "idle" ? renderSetPicker() : renderExam(exam.state);
      break;
    case "wallet":
      main.innerHTML = renderPurchase(purchase.state);
      break;
    case "stats":
      main.innerHTML = renderDashboard(dashboard.state);
      break;
  }
}

async function loadSets(): Promise<void> {
  try {
    drillsets = await client.listDrillSets();
  } catch {
    drillsets = [];
  }
}

function startStatsPolling(): void {
  if (statsTimer !== null) return;
  const field = document.getElementById("stats-poll") as HTMLInputElement | null;
  const seconds = field ? Number(field.value) || DEFAULT_STATS_POLL_SECONDS : DEFAULT_STATS_POLL_SECONDS;
  statsTimer = setInterval(async () => {
    await dashboard.refresh();
    if (tab === "stats") paint();
  }, seconds * 1000);
}

function selectedSetId(): string | null {
  const select = document.getElementById("set-select") as HTMLSelectElement | null;
  return select ? select.value : null;
}

async function handleAction(action: string, target: HTMLElement): Promise<void> {
  switch (action) {
    case "sign-in": {
      const token = (el("token-input") as HTMLInputElement).value.trim();
      if (!token) return;
      client.setToken(token);
      try {
        await client.balance();
        signedIn = true;
        signInError = null;
        await loadSets();
      } catch (err) {
        signInError = err instanceof ApiError ? err.message : "network error, try again";
      }
      break;
    }
    case "register": {
      const name = (el("name-input") as HTMLInputElement).value.trim() || "anonymous learner";
      try {
        const account = await client.createAccount("self_registered", null, name);
        client.setToken(account.token);
        signedIn = true;
        signInError = null;
        await loadSets();
      } catch (err) {
        signInError = err instanceof ApiError ? err.message : "network error, try again";
      }
      break;
    }
    case "start-drill": {
      const setId = selectedSetId();
      if (!setId) return;
      drill = new DrillController(client, setId);
      await drill.start();
      break;
    }
    case "start-exam": {
      const setId = selectedSetId();
      if (!setId) return;
      const nField = document.getElementById("exam-n") as HTMLInputElement | null;
      const n = nField ? Math.max(1, Number(nField.value) || 10) : 10;
      await exam.start(setId, n);
      break;
    }
    case "select-option": {
      const index = Number(target.dataset["index"]);
      if (tab === "practice" && drill) drill.select(index);
      if (tab === "exam") exam.select(index);
      break;
    }
    case "submit-answer":
      if (drill) await drill.submit();
      break;
    case "retry-drill":
      if (drill) await drill.retry();
      break;
    case "next-item":
      if (drill) await drill.next();
      break;
    case "stop-drill":
      drill = null;
      break;
    case "submit-exam-answer":
      await exam.submit();
      break;
    case "retry-exam":
      if (exam.canSubmit()) await exam.submit();
      break;
    case "confirm-purchase":
      await purchase.confirm();
      break;
  }
  paint();
}

document.addEventListener("click", (event) => {
  const target = (event.target as HTMLElement).closest<HTMLElement>("[data-action]");
  if (!target) return;
  const action = target.dataset["action"];
  if (!action || action === "payload-input") return;
  if (target.closest("[data-tab]")) return;
  void handleAction(action, target);
});

document.querySelectorAll("[data-tab]").forEach((node) => {
  node.addEventListener("click", async () => {
    tab = (node as HTMLElement).dataset["tab"] as Tab;
    if (tab === "wallet") await purchase.refreshBalance();
    if (tab === "stats") {
      await dashboard.refresh();
      startStatsPolling();
    }
    paint();
  });
});

document.addEventListener("input", (event) => {
  const target = event.target as HTMLElement;
  if (target.dataset["action"] === "payload-input") {
    purchase.setPayload((target as HTMLInputElement).value);
    paint();
    // re-focus after repaint so typing continues uninterrupted
    const field = document.getElementById("payload") as HTMLInputElement | null;
    if (field) {
      field.focus();
      field.setSelectionRange(field.value.length, field.value.length);
    }
  }
});

paint();
