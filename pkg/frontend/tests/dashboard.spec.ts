import { describe, expect, it } from "vitest";

import { Client } from "../src/api.js";
import type { LibraryStats } from "../src/api.js";
import { DashboardController, renderDashboard, sortLibraries } from "../src/dashboard.js";
import { formatTimestamp } from "../src/format.js";
import { FakeApi } from "./fakes.js";

function row(overrides: Partial<LibraryStats>): LibraryStats {
  return {
    library_id: "lib-1",
    n_students: 0,
    total_attempts: 0,
    sets_aced_total: 0,
    collections_aced: 0,
    as_of: 1_723_900_000,
    ...overrides,
  };
}

function setup(rows: LibraryStats[]): { fake: FakeApi; dashboard: DashboardController } {
  const fake = new FakeApi();
  fake.statsRows = rows;
  const client = new Client("", null, fake.fetch);
  return { fake, dashboard: new DashboardController(client) };
}

describe("sortLibraries", () => {
  it("ranks by collections aced, then total sets aced, then id", () => {
    const rows = [
      row({ library_id: "lib-b", collections_aced: 1, sets_aced_total: 9 }),
      row({ library_id: "lib-c", collections_aced: 2, sets_aced_total: 3 }),
      row({ library_id: "lib-a", collections_aced: 2, sets_aced_total: 3 }),
      row({ library_id: "lib-d", collections_aced: 2, sets_aced_total: 8 }),
    ];
    expect(sortLibraries(rows).map((r) => r.library_id)).toEqual([
      "lib-d",
      "lib-a",
      "lib-c",
      "lib-b",
    ]);
  });
});

describe("librarian dashboard", () => {
  it("renders exactly the numbers the stats endpoint returned", async () => {
    const { dashboard } = setup([
      row({
        library_id: "lib-7",
        n_students: 7,
        total_attempts: 91,
        sets_aced_total: 13,
        collections_aced: 2,
        as_of: 1_723_900_000,
      }),
    ]);
    await dashboard.refresh();
    const html = renderDashboard(dashboard.state);
    expect(html).toContain("lib-7");
    expect(html).toContain('<td class="num">7</td>');
    expect(html).toContain('<td class="num">91</td>');
    expect(html).toContain('<td class="num">13</td>');
    expect(html).toContain('<td class="num">2</td>');
    expect(html).toContain(formatTimestamp(1_723_900_000));
    expect(html).not.toContain("stale-banner");
  });

  it("renders an identical snapshot when the server serves the same as_of again", async () => {
    const { dashboard } = setup([row({ library_id: "lib-1", n_students: 4 })]);
    await dashboard.refresh();
    const first = renderDashboard(dashboard.state);
    await dashboard.refresh();
    expect(dashboard.state.lastAsOf).toBe(1_723_900_000);
    expect(renderDashboard(dashboard.state)).toBe(first);
  });

  it("keeps the last snapshot and flags it when the endpoint goes down", async () => {
    const { fake, dashboard } = setup([row({ library_id: "lib-1", n_students: 4 })]);
    await dashboard.refresh();
    fake.statsFailing = true;
    await dashboard.refresh();
    expect(dashboard.state.stale).toBe(true);
    const html = renderDashboard(dashboard.state);
    expect(html).toContain("stale-banner");
    expect(html).toContain(formatTimestamp(1_723_900_000));
    expect(html).toContain("lib-1");
  });

  it("says so when the endpoint is down and nothing was ever loaded", async () => {
    const { fake, dashboard } = setup([]);
    fake.statsFailing = true;
    await dashboard.refresh();
    const html = renderDashboard(dashboard.state);
    expect(html).toContain("stale-banner");
    expect(html).toContain("never");
  });

  it("shows an empty state when no library has activity", async () => {
    const { dashboard } = setup([]);
    await dashboard.refresh();
    expect(renderDashboard(dashboard.state)).toContain("No library activity yet.");
  });
});
