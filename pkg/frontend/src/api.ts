// Typed client for the drillforge JSON API. Field names mirror the server's
// payloads exactly; items arriving here never carry correctness or
// explanations, those exist only in answer outcomes.

export interface ItemOption {
  text: string;
  kind: string; // "plain" | "nota" | "aota"
}

export interface DrillItem {
  id: string;
  stem: string;
  options: ItemOption[]; // rendered in server order
}

export interface GradeState {
  grade: number; // fraction in [0, 1]; display converts to the 0-10 scale
  taper_len: number;
  complete: boolean;
  aced: boolean;
}

export interface RewardGrant {
  rule: string;
  amount: number;
}

export interface AnswerOutcome {
  correct: boolean;
  explanation: string;
  grade_state: GradeState;
  rewards: RewardGrant[];
}

export interface ExamStart {
  exam_id: string;
  n: number;
  first_item: DrillItem;
}

export interface ExamAnswer extends AnswerOutcome {
  next_item: DrillItem | null;
  score: number | null; // set once the last item is answered
}

export interface DrillSetInfo {
  id: string;
  title: string;
  n_items: number;
}

export interface BalanceInfo {
  account_id: string;
  balance: number;
}

export interface PurchaseReceipt {
  tablet_id: string;
  library_id: string;
  buyer: string;
  price: number;
  transaction_seq: number;
  stock_after: number;
  timestamp: number;
}

export interface LibraryStats {
  library_id: string;
  n_students: number;
  total_attempts: number;
  sets_aced_total: number;
  collections_aced: number;
  as_of: number;
}

export interface NewAccount {
  account_id: string;
  kind: string;
  library_id: string | null;
  token: string;
}

// Narrow view of fetch so tests can substitute a recording fake.
export interface HttpResponse {
  ok: boolean;
  status: number;
  json(): Promise<unknown>;
}

export type FetchLike = (
  url: string,
  init?: { method?: string; headers?: Record<string, string>; body?: string },
) => Promise<HttpResponse>;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

export class Client {
  constructor(
    private baseUrl: string,
    private token: string | null = null,
    private fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  setToken(token: string | null): void {
    this.token = token;
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const headers: Record<string, string> = {};
    if (this.token) headers["authorization"] = `Bearer ${this.token}`;
    let encoded: string | undefined;
    if (body !== undefined) {
      headers["content-type"] = "application/json";
      encoded = JSON.stringify(body);
    }
    const resp = await this.fetchFn(this.baseUrl + path, { method, headers, body: encoded });
    let data: unknown = null;
    try {
      data = await resp.json();
    } catch {
      data = null;
    }
    if (!resp.ok) {
      const err = (data ?? {}) as { code?: string; message?: string };
      throw new ApiError(resp.status, err.code ?? "error", err.message ?? `HTTP ${resp.status}`);
    }
    return data as T;
  }

  listDrillSets(): Promise<DrillSetInfo[]> {
    return this.request("GET", "/api/drillsets");
  }

  nextItem(drillsetId: string): Promise<DrillItem> {
    return this.request("GET", `/api/drillsets/${encodeURIComponent(drillsetId)}/next`);
  }

  submitAnswer(drillsetId: string, itemId: string, selectedIndex: number): Promise<AnswerOutcome> {
    return this.request("POST", "/api/answers", {
      drillset_id: drillsetId,
      item_id: itemId,
      selected_index: selectedIndex,
    });
  }

  beginExam(drillsetId: string, n: number): Promise<ExamStart> {
    return this.request("POST", "/api/exams", { drillset_id: drillsetId, n });
  }

  submitExamAnswer(examId: string, itemId: string, selectedIndex: number): Promise<ExamAnswer> {
    return this.request("POST", `/api/exams/${encodeURIComponent(examId)}/answers`, {
      item_id: itemId,
      selected_index: selectedIndex,
    });
  }

  grade(drillsetId: string): Promise<GradeState> {
    return this.request("GET", `/api/grades/${encodeURIComponent(drillsetId)}`);
  }

  balance(): Promise<BalanceInfo> {
    return this.request("GET", "/api/balance");
  }

  purchase(payload: string): Promise<PurchaseReceipt> {
    return this.request("POST", "/api/purchase", { payload });
  }

  createAccount(kind: string, libraryId: string | null, displayName: string): Promise<NewAccount> {
    return this.request("POST", "/api/accounts", {
      kind,
      library_id: libraryId,
      display_name: displayName,
    });
  }

  libraryStats(): Promise<LibraryStats[]> {
    return this.request("GET", "/api/stats/libraries");
  }
}
