// Tablet purchase flow. The payment payload is pasted as text, validated
// locally, and nothing leaves the browser until the user confirms a payload
// that actually parses.

import { ApiError, Client } from "./api.js";
import type { PurchaseReceipt } from "./api.js";
import { escapeHtml, formatSmly } from "./format.js";

const PAYLOAD_RE = /^smly:([A-Za-z0-9._-]+)\?amount=(\d+)&tablet=([A-Za-z0-9._-]+)$/;

export interface PaymentRequest {
  address: string;
  amount: number;
  tabletId: string;
}

export function parsePayload(text: string): PaymentRequest | null {
  const m = PAYLOAD_RE.exec(text);
  if (!m) return null;
  return { address: m[1], amount: Number(m[2]), tabletId: m[3] };
}

export function shortfall(balance: number, price: number): number {
  return Math.max(0, price - balance);
}

export type PurchasePhase = "input" | "confirm" | "submitting" | "receipt" | "failed";

export interface PurchaseState {
  phase: PurchasePhase;
  payloadText: string;
  request: PaymentRequest | null;
  validationError: string | null;
  balance: number | null;
  receipt: PurchaseReceipt | null;
  error: string | null;
}

export class PurchaseController {
  state: PurchaseState = {
    phase: "input",
    payloadText: "",
    request: null,
    validationError: null,
    balance: null,
    receipt: null,
    error: null,
  };

  constructor(private client: Client) {}

  async refreshBalance(): Promise<void> {
    try {
      this.state.balance = (await this.client.balance()).balance;
    } catch {
      this.state.balance = null;
    }
  }

  setPayload(text: string): void {
    this.state.payloadText = text;
    this.state.receipt = null;
    this.state.error = null;
    if (text.trim() === "") {
      this.state.request = null;
      this.state.validationError = null;
      this.state.phase = "input";
      return;
    }
    const request = parsePayload(text.trim());
    if (!request) {
      // invalid payloads never produce a request
      this.state.request = null;
      this.state.validationError = "not a valid payment code";
      this.state.phase = "input";
      return;
    }
    this.state.request = request;
    this.state.validationError = null;
    this.state.phase = "confirm";
  }

  canConfirm(): boolean {
    return (
      this.state.phase === "confirm" &&
      this.state.request !== null &&
      this.state.balance !== null &&
      this.state.balance >= this.state.request.amount
    );
  }

  async confirm(): Promise<void> {
    if (!this.canConfirm()) return;
    const payload = this.state.payloadText.trim();
    this.state.phase = "submitting";
    this.state.error = null;
    try {
      this.state.receipt = await this.client.purchase(payload);
      this.state.phase = "receipt";
      await this.refreshBalance();
    } catch (err) {
      this.state.phase = "failed";
      this.state.error = err instanceof ApiError ? err.message : "network error, try again";
    }
  }
}

export function renderPurchase(state: PurchaseState): string {
  const balance =
    state.balance === null
      ? ""
      : `<div class="balance">Balance: ${formatSmly(state.balance)}</div>`;
  const input = `
    <div class="payload-input">
      <label for="payload">Payment code</label>
      <input id="payload" data-action="payload-input" value="${escapeHtml(state.payloadText)}"
             placeholder="smly:ADDR?amount=...&tablet=..." />
      ${state.validationError ? `<div class="validation-error">${escapeHtml(state.validationError)}</div>` : ""}
    </div>`;

  let body = "";
  if (state.request && (state.phase === "confirm" || state.phase === "submitting")) {
    const short =
      state.balance === null ? state.request.amount : shortfall(state.balance, state.request.amount);
    const disabled = short > 0 || state.phase === "submitting";
    const shortNote = short > 0 ? `<div class="shortfall">${formatSmly(short)} needed</div>` : "";
    body = `
      <div class="confirm-card">
        <div class="line">Tablet: ${escapeHtml(state.request.tabletId)}</div>
        <div class="line">Price: ${formatSmly(state.request.amount)}</div>
        ${shortNote}
        <button class="primary" data-action="confirm-purchase" ${disabled ? "disabled" : ""}>
          Confirm purchase</button>
      </div>`;
  } else if (state.phase === "receipt" && state.receipt) {
    body = `
      <div class="receipt-card">
        <div class="line">Purchased ${escapeHtml(state.receipt.tablet_id)} for ${formatSmly(state.receipt.price)}.</div>
        <div class="line">Library ${escapeHtml(state.receipt.library_id)} now holds ${state.receipt.stock_after} tablets.</div>
        <div class="line">Transaction #${state.receipt.transaction_seq}</div>
      </div>`;
  } else if (state.phase === "failed" && state.error) {
    body = `<div class="error-banner">${escapeHtml(state.error)}</div>`;
  }

  return `${balance}${input}${body}`;
}
