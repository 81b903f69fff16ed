/** Pure view-state machine for the dashboard.
 *
 * All transitions are synchronous and side-effect free; the controller in
 * app.ts applies them around API calls. Mirrors the server's invariants
 * client-side: a draft submits only with a meme or a text, text provenance
 * follows how the text got into the box, and an acted-on message locks.
 */

import { Meme, QueueMessage, TextSource, Tree } from "./types.js";

export interface ComposerDraft {
  memeId: string | null;
  text: string;
  textSource: TextSource;
  /** Set when the text was inserted from an AI suggestion. */
  grammarId: string | null;
}

export interface TreeWalk {
  tree: Tree;
  answers: string[];
}

export interface StatsFilters {
  lang: string;
  label: string | null;
}

export interface ViewState {
  lang: string;
  queue: QueueMessage[];
  selectedId: string | null;
  draft: ComposerDraft;
  walk: TreeWalk | null;
  statsFilters: StatsFilters;
  /** Message ids acted on this session (locked in the UI). */
  acted: Set<string>;
  /** Conflict explanation for the selected message, if the server refused. */
  conflict: string | null;
  error: string | null;
}

export const EMPTY_DRAFT: ComposerDraft = {
  memeId: null,
  text: "",
  textSource: "NONE",
  grammarId: null,
};

export function initialState(lang: string): ViewState {
  return {
    lang,
    queue: [],
    selectedId: null,
    draft: { ...EMPTY_DRAFT },
    walk: null,
    statsFilters: { lang, label: null },
    acted: new Set(),
    conflict: null,
    error: null,
  };
}

export function setQueue(state: ViewState, queue: QueueMessage[]): ViewState {
  // Keep the selection if the message is still pooled; a vanished message
  // was acted on elsewhere or expired.
  const selectedId =
    state.selectedId && queue.some((m) => m.id === state.selectedId)
      ? state.selectedId
      : null;
  return { ...state, queue, selectedId, error: null };
}

export function selectMessage(state: ViewState, id: string | null): ViewState {
  return {
    ...state,
    selectedId: id,
    draft: { ...EMPTY_DRAFT },
    walk: null,
    conflict: null,
  };
}

export function selectedMessage(state: ViewState): QueueMessage | null {
  return state.queue.find((m) => m.id === state.selectedId) ?? null;
}

export function isLocked(state: ViewState): boolean {
  return (
    state.conflict !== null ||
    (state.selectedId !== null && state.acted.has(state.selectedId))
  );
}

// -- composer ---------------------------------------------------------------

export function pickMeme(state: ViewState, memeId: string | null): ViewState {
  return { ...state, draft: { ...state.draft, memeId } };
}

export function insertSuggestion(
  state: ViewState,
  text: string,
  grammarId: string,
): ViewState {
  return {
    ...state,
    draft: { ...state.draft, text, textSource: "GENERATED", grammarId },
  };
}

export function editText(state: ViewState, text: string): ViewState {
  let textSource: TextSource;
  if (text === "") {
    textSource = "NONE";
  } else if (
    state.draft.textSource === "GENERATED" ||
    state.draft.textSource === "EDITED"
  ) {
    // Touching an inserted suggestion makes it co-written.
    textSource = text === state.draft.text ? state.draft.textSource : "EDITED";
  } else {
    textSource = "HUMAN";
  }
  return { ...state, draft: { ...state.draft, text, textSource } };
}

export function canSubmit(state: ViewState): boolean {
  if (state.selectedId === null || isLocked(state)) return false;
  return state.draft.memeId !== null || state.draft.text.trim() !== "";
}

/** Marks an act as accepted by the server: lock and drop from the queue. */
export function actAccepted(state: ViewState, messageId: string): ViewState {
  const acted = new Set(state.acted);
  acted.add(messageId);
  return {
    ...state,
    acted,
    queue: state.queue.filter((m) => m.id !== messageId),
    selectedId: null,
    draft: { ...EMPTY_DRAFT },
    walk: null,
  };
}

/** The server refused with 409: lock the panel with an explanation. */
export function actConflicted(state: ViewState, detail: string): ViewState {
  const acted = new Set(state.acted);
  if (state.selectedId) acted.add(state.selectedId);
  return { ...state, acted, conflict: detail };
}

// -- decision-tree walk -------------------------------------------------------

const TERMINALS = new Set([
  "REPORT_PLATFORM",
  "REPORT_POLICE",
  "RESPOND",
  "IGNORE",
]);

export function startWalk(state: ViewState, tree: Tree): ViewState {
  return { ...state, walk: { tree, answers: [] } };
}

/** Node id (or terminal name) the walk currently sits on. */
export function walkPosition(walk: TreeWalk): string {
  let node = walk.tree.root;
  for (const answer of walk.answers) {
    node = walk.tree.nodes[node].options[answer];
  }
  return node;
}

export function walkTerminal(walk: TreeWalk): string | null {
  const position = walkPosition(walk);
  return TERMINALS.has(position) ? position : null;
}

export function answerQuestion(state: ViewState, option: string): ViewState {
  if (!state.walk || walkTerminal(state.walk)) return state;
  const node = state.walk.tree.nodes[walkPosition(state.walk)];
  if (!(option in node.options)) {
    return { ...state, error: `"${option}" is not an option here` };
  }
  return {
    ...state,
    error: null,
    walk: { ...state.walk, answers: [...state.walk.answers, option] },
  };
}

/** Back button: drop the last answer, truncating the transcript. */
export function walkBack(state: ViewState): ViewState {
  if (!state.walk || state.walk.answers.length === 0) return state;
  return {
    ...state,
    walk: { ...state.walk, answers: state.walk.answers.slice(0, -1) },
  };
}

// -- stats ---------------------------------------------------------------------

export function setStatsFilters(
  state: ViewState,
  filters: Partial<StatsFilters>,
): ViewState {
  return { ...state, statsFilters: { ...state.statsFilters, ...filters } };
}

// -- helpers shared with rendering ----------------------------------------------

export function memesByStyle(memes: Meme[]): Map<string, Meme[]> {
  const grouped = new Map<string, Meme[]>();
  for (const style of ["REPROACHING", "RIDICULING", "RECONCILING"]) {
    grouped.set(style, memes.filter((m) => m.style === style));
  }
  return grouped;
}
