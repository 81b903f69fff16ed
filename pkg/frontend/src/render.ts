/** HTML renderers: pure functions from state to markup strings.
 *
 * Keeping rendering stringly and side-effect free means the whole UI is
 * testable in plain Node; app.ts mounts the strings and wires events.
 */

import {
  canSubmit,
  isLocked,
  memesByStyle,
  selectedMessage,
  ViewState,
  walkPosition,
  walkTerminal,
} from "./state.js";
import {
  EngagementStats,
  Meme,
  QueueMessage,
  Suggestion,
  TimeseriesStats,
} from "./types.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** Message text with matched spans wrapped in <mark>, by token offsets. */
export function highlightSpans(message: QueueMessage): string {
  const tokens = message.text.split(/\s+/).filter((t) => t !== "");
  const marked = new Set<number>();
  for (const span of message.spans) {
    for (let i = span.start; i < span.end && i < tokens.length; i++) {
      marked.add(i);
    }
  }
  return tokens
    .map((tok, i) =>
      marked.has(i) ? `<mark>${escapeHtml(tok)}</mark>` : escapeHtml(tok),
    )
    .join(" ");
}

export function renderQueue(state: ViewState): string {
  if (state.queue.length === 0) {
    return `<div class="queue-empty">No toxic messages in the ${escapeHtml(
      state.lang,
    )} pool right now.</div>`;
  }
  const rows = state.queue.map((m) => {
    const chips = m.labels
      .map((l) => `<span class="chip chip-${l.toLowerCase()}">${l}</span>`)
      .join("");
    const classes = ["queue-row"];
    if (m.id === state.selectedId) classes.push("selected");
    if (state.acted.has(m.id)) classes.push("locked");
    return (
      `<li class="${classes.join(" ")}" data-id="${escapeHtml(m.id)}">` +
      `<span class="score">${m.score.toFixed(1)}</span>` +
      `<span class="labels">${chips}</span>` +
      `<span class="text">${highlightSpans(m)}</span>` +
      `</li>`
    );
  });
  return `<ol class="queue">${rows.join("")}</ol>`;
}

export function renderComposer(
  state: ViewState,
  memes: Meme[],
  suggestions: Suggestion[],
): string {
  const message = selectedMessage(state);
  if (!message) return `<div class="composer-empty">Select a message.</div>`;
  if (state.conflict) {
    return `<div class="composer-locked">Already handled: ${escapeHtml(
      state.conflict,
    )}</div>`;
  }
  if (isLocked(state)) {
    return `<div class="composer-locked">Already handled.</div>`;
  }
  const pickerGroups: string[] = [];
  for (const [style, group] of memesByStyle(memes)) {
    const cells = group
      .map((m) => {
        const selected = m.id === state.draft.memeId ? " selected" : "";
        const caption = m.captions[state.lang] ?? m.captions["en"] ?? m.id;
        return `<button class="meme${selected}" data-meme="${escapeHtml(
          m.id,
        )}">${escapeHtml(caption)}</button>`;
      })
      .join("");
    pickerGroups.push(
      `<fieldset class="meme-group"><legend>${style}</legend>${cells}</fieldset>`,
    );
  }
  const suggestionItems = suggestions
    .map(
      (s) =>
        `<li class="suggestion" data-grammar="${escapeHtml(s.grammar_id)}" ` +
        `data-text="${escapeHtml(s.text)}">${escapeHtml(s.text)}</li>`,
    )
    .join("");
  const submitAttr = canSubmit(state) ? "" : " disabled";
  return (
    `<form class="composer">` +
    pickerGroups.join("") +
    `<textarea class="draft-text" data-source="${state.draft.textSource}">` +
    `${escapeHtml(state.draft.text)}</textarea>` +
    `<ul class="suggestions">${suggestionItems}</ul>` +
    `<button class="submit" type="submit"${submitAttr}>Respond</button>` +
    `</form>`
  );
}

export function renderTreeWalk(state: ViewState): string {
  if (!state.walk) return "";
  const terminal = walkTerminal(state.walk);
  const back =
    state.walk.answers.length > 0
      ? `<button class="walk-back">Back</button>`
      : "";
  if (terminal) {
    const label =
      terminal === "RESPOND"
        ? "This one deserves a counternarrative — switch to the composer."
        : terminal === "IGNORE"
          ? "Not worth acting on — confirm ignore."
          : `Submit report (${terminal.replace("REPORT_", "").toLowerCase()})`;
    return (
      `<div class="walk-terminal" data-terminal="${terminal}">` +
      `${escapeHtml(label)}${back}</div>`
    );
  }
  const node = state.walk.tree.nodes[walkPosition(state.walk)];
  const options = Object.keys(node.options)
    .sort()
    .map(
      (o) =>
        `<button class="walk-option" data-option="${escapeHtml(o)}">` +
        `${escapeHtml(o)}</button>`,
    )
    .join("");
  return (
    `<div class="walk-question">${escapeHtml(node.q)}</div>` +
    `<div class="walk-options">${options}${back}</div>`
  );
}

const PERCENT = (rate: number | null): string =>
  rate === null ? "–" : `${(rate * 100).toFixed(1)}%`;

export function renderEngagementBars(stats: EngagementStats): string {
  const keys = Object.keys(stats.rates).sort();
  if (keys.length === 0) {
    return `<div class="chart-empty">No engagement data yet.</div>`;
  }
  const bars = keys
    .map((key) => {
      const cell = stats.rates[key];
      const width = cell.rate === null ? 0 : Math.round(cell.rate * 1000);
      return (
        `<div class="bar-row" data-key="${escapeHtml(key)}">` +
        `<span class="bar-label">${escapeHtml(key)}</span>` +
        `<span class="bar" style="width:${width}px"></span>` +
        `<span class="bar-value">${PERCENT(cell.rate)}</span>` +
        `</div>`
      );
    })
    .join("");
  return `<div class="bars" data-group="${stats.group}">${bars}</div>`;
}

export function renderTimeseries(stats: TimeseriesStats): string {
  const days = Object.keys(stats.days).sort();
  if (days.length === 0) {
    return `<div class="chart-empty">No data for ${escapeHtml(stats.lang)}.</div>`;
  }
  const max = Math.max(...days.map((d) => stats.days[d]), 1);
  const peakDays = new Set(stats.peaks.map((p) => p.day));
  // Label-filtered series render dotted, matching the reference charts.
  const seriesClass = stats.label ? "series dotted" : "series";
  const points = days
    .map((day, i) => {
      const y = 100 - Math.round((stats.days[day] / max) * 100);
      return `${i},${y}`;
    })
    .join(" ");
  const markers = days
    .filter((d) => peakDays.has(d))
    .map((day) => {
      const i = days.indexOf(day);
      const y = 100 - Math.round((stats.days[day] / max) * 100);
      return `<circle class="peak" data-day="${day}" cx="${i}" cy="${y}" r="3"/>`;
    })
    .join("");
  return (
    `<svg viewBox="0 0 ${days.length - 1 || 1} 100" class="timeseries" ` +
    `data-lang="${escapeHtml(stats.lang)}">` +
    `<polyline class="${seriesClass}" points="${points}"/>` +
    markers +
    `</svg>`
  );
}
