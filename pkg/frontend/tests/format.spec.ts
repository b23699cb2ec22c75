import { describe, expect, it } from "vitest";

import { escapeHtml, formatGrade, formatSmly } from "../src/format.js";

describe("formatGrade", () => {
  it("shows one decimal on the ten-point scale", () => {
    expect(formatGrade(0.8444)).toBe("8.4");
    expect(formatGrade(0)).toBe("0.0");
    expect(formatGrade(1)).toBe("10.0");
    expect(formatGrade(0.85)).toBe("8.5");
    expect(formatGrade(0.0449)).toBe("0.4");
  });

  it("never drifts more than half a tick from the raw grade", () => {
    for (let i = 0; i <= 1000; i++) {
      const grade = i / 1000;
      const shown = Number(formatGrade(grade));
      expect(Math.abs(shown - grade * 10)).toBeLessThanOrEqual(0.05 + 1e-9);
    }
  });
});

describe("formatSmly", () => {
  it("groups thousands and names the currency", () => {
    expect(formatSmly(600_000)).toBe("600,000 SMLY");
    expect(formatSmly(1_000_000)).toBe("1,000,000 SMLY");
    expect(formatSmly(0)).toBe("0 SMLY");
    expect(formatSmly(42)).toBe("42 SMLY");
  });
});

describe("escapeHtml", () => {
  it("neutralizes markup", () => {
    expect(escapeHtml('<b onmouseover="x()">&</b>')).toBe(
      "&lt;b onmouseover=&quot;x()&quot;&gt;&amp;&lt;/b&gt;",
    );
  });

  it("passes plain text through", () => {
    expect(escapeHtml("2 plus 2")).toBe("2 plus 2");
  });
});
