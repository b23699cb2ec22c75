// Librarian dashboard: anonymized per-library stats, polled on the server's
// cache interval. A failed refresh keeps the last good rows and flags them.

import { Client } from "./api.js";
import type { LibraryStats } from "./api.js";
import { escapeHtml, formatTimestamp } from "./format.js";

export function sortLibraries(rows: LibraryStats[]): LibraryStats[] {
  return [...rows].sort((a, b) => {
    if (a.collections_aced !== b.collections_aced) return b.collections_aced - a.collections_aced;
    if (a.sets_aced_total !== b.sets_aced_total) return b.sets_aced_total - a.sets_aced_total;
    return a.library_id < b.library_id ? -1 : a.library_id > b.library_id ? 1 : 0;
  });
}

export interface DashboardState {
  rows: LibraryStats[];
  lastAsOf: number | null;
  stale: boolean;
  loading: boolean;
}

export class DashboardController {
  state: DashboardState = { rows: [], lastAsOf: null, stale: false, loading: false };

  constructor(private client: Client) {}

  async refresh(): Promise<void> {
    this.state.loading = true;
    try {
      const rows = await this.client.libraryStats();
      this.state.rows = sortLibraries(rows);
      this.state.lastAsOf = rows.length ? Math.max(...rows.map((r) => r.as_of)) : this.state.lastAsOf;
      this.state.stale = false;
    } catch {
      // keep showing the last snapshot, marked stale
      this.state.stale = true;
    } finally {
      this.state.loading = false;
    }
  }
}

export function renderDashboard(state: DashboardState): string {
  const staleBanner = state.stale
    ? `<div class="stale-banner">Stats service unreachable; showing data as of
         ${state.lastAsOf === null ? "never" : escapeHtml(formatTimestamp(state.lastAsOf))}.</div>`
    : "";
  if (state.rows.length === 0) {
    const empty = state.loading ? "Loading stats..." : "No library activity yet.";
    return `${staleBanner}<div class="empty">${empty}</div>`;
  }
  const rows = state.rows
    .map(
      (r) => `
      <tr>
        <td>${escapeHtml(r.library_id)}</td>
        <td class="num">${r.n_students}</td>
        <td class="num">${r.total_attempts}</td>
        <td class="num">${r.sets_aced_total}</td>
        <td class="num">${r.collections_aced}</td>
      </tr>`,
    )
    .join("");
  const asOf =
    state.lastAsOf === null ? "" : `<div class="as-of">As of ${escapeHtml(formatTimestamp(state.lastAsOf))}</div>`;
  return `
    ${staleBanner}
    <table class="stats-table">
      <thead>
        <tr><th>Library</th><th>Students</th><th>Attempts</th><th>Sets aced</th><th>Collections aced</th></tr>
      </thead>
      <tbody>${rows}</tbody>
    </table>
    ${asOf}`;
}
