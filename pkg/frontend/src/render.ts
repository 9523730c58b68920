// Pure DOM builders. Values pass through verbatim: numbers and strings are
// rendered exactly as the protocol delivered them, missing cells as "?".

import type { Question, RowRender, SessionView } from "./api.js";
import { parseRule } from "./grammar.js";

export function cellText(value: number | string | null): string {
  if (value === null) return "?";
  return String(value);
}

export function renderRowCard(
  row: RowRender,
  label: string,
  emphasized: Set<string>,
): HTMLElement {
  const card = document.createElement("section");
  card.className = "row-card";
  card.dataset.rowId = String(row.id);

  const heading = document.createElement("h3");
  heading.textContent = `${label} (row ${row.id})`;
  card.appendChild(heading);

  const table = document.createElement("table");
  for (let i = 0; i < row.columns.length; i++) {
    const tr = document.createElement("tr");
    if (emphasized.has(row.columns[i])) tr.className = "emphasized";
    const name = document.createElement("td");
    name.textContent = row.columns[i];
    const value = document.createElement("td");
    value.textContent = cellText(row.values[i]);
    tr.appendChild(name);
    tr.appendChild(value);
    table.appendChild(tr);
  }
  card.appendChild(table);
  return card;
}

export function renderProgress(question: Question): HTMLElement {
  const p = document.createElement("p");
  p.className = "progress";
  p.textContent = `question ${question.asked + 1} of ≤ ${question.budget}`;
  return p;
}

export function renderQuestion(
  question: Question,
  emphasized: Set<string>,
  onChoice: (choice: "A" | "B") => void,
): HTMLElement {
  const wrap = document.createElement("div");
  wrap.className = "question";
  wrap.appendChild(renderProgress(question));

  const pair = document.createElement("div");
  pair.className = "pair";
  pair.appendChild(renderRowCard(question.a, "A", emphasized));
  pair.appendChild(renderRowCard(question.b, "B", emphasized));
  wrap.appendChild(pair);

  const buttons = document.createElement("div");
  buttons.className = "choices";
  for (const choice of ["A", "B"] as const) {
    const button = document.createElement("button");
    button.textContent = `prefer ${choice}`;
    button.dataset.choice = choice;
    button.addEventListener("click", () => {
      // double-submit guard: everything disabled until the reply arrives
      buttons.querySelectorAll("button").forEach((b) => (b.disabled = true));
      onChoice(choice);
    });
    buttons.appendChild(button);
  }
  wrap.appendChild(buttons);
  return wrap;
}

export function renderVerdict(view: SessionView, emphasized: Set<string>): HTMLElement {
  const wrap = document.createElement("div");
  wrap.className = "verdict";

  const heading = document.createElement("h2");
  heading.textContent = `finished after ${view.asked} questions`;
  wrap.appendChild(heading);

  if (view.best) {
    wrap.appendChild(renderRowCard(view.best, "chosen", emphasized));
  }

  const rule = document.createElement("p");
  rule.className = "rule";
  if (view.rule) {
    parseRule(view.rule); // refuse to show text that breaks the grammar
    rule.textContent = view.rule;
  } else {
    rule.textContent = "(no rule)";
  }
  wrap.appendChild(rule);

  if (view.prototypes && view.prototypes.length) {
    const title = document.createElement("h3");
    title.textContent = `prototypes (${view.prototypes.length})`;
    wrap.appendChild(title);
    const list = document.createElement("div");
    list.className = "prototypes";
    view.prototypes.forEach((row, i) => {
      list.appendChild(renderRowCard(row, `prototype ${i + 1}`, emphasized));
    });
    wrap.appendChild(list);
  }

  if (view.trace.length) {
    const trace = document.createElement("p");
    trace.className = "trace";
    trace.textContent = `trace: ${view.trace.join(" ")}`;
    wrap.appendChild(trace);
  }
  return wrap;
}

export function renderError(message: string, onRetry: () => void): HTMLElement {
  const banner = document.createElement("div");
  banner.className = "error-banner";
  const text = document.createElement("span");
  text.textContent = message;
  banner.appendChild(text);
  const retry = document.createElement("button");
  retry.textContent = "retry";
  retry.addEventListener("click", onRetry);
  banner.appendChild(retry);
  return banner;
}
