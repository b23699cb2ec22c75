// Grades travel over the API as fractions in [0, 1]; everything the user
// sees is the 0-10 scale with one decimal.
export function formatGrade(grade: number): string {
  return (grade * 10).toFixed(1);
}

export function formatSmly(amount: number): string {
  return `${amount.toLocaleString("en-US")} SMLY`;
}

export function formatTimestamp(epochSeconds: number): string {
  return new Date(epochSeconds * 1000).toLocaleString();
}

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}
