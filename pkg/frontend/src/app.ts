/** Dashboard controller: wires the API client to the view-state machine.
 *
 * DOM-free by design — callers (the browser bootstrap below, or tests)
 * subscribe to re-renders and feed user intents in. The queue refreshes on
 * the server's maintenance cadence; conflicts from /act lock the panel.
 */

import { ApiClient } from "./api.js";
import {
  renderComposer,
  renderEngagementBars,
  renderQueue,
  renderTimeseries,
  renderTreeWalk,
} from "./render.js";
import {
  actAccepted,
  actConflicted,
  answerQuestion,
  canSubmit,
  editText,
  initialState,
  insertSuggestion,
  pickMeme,
  selectMessage,
  setQueue,
  startWalk,
  ViewState,
  walkBack,
  walkTerminal,
} from "./state.js";
import {
  ActionRecord,
  ApiConflictError,
  Meme,
  Suggestion,
} from "./types.js";

export const REFRESH_MINUTES = 2;

export interface ControllerOptions {
  api: ApiClient;
  lang: string;
  actor: string;
  onRender?: (controller: DashboardController) => void;
}

export class DashboardController {
  state: ViewState;
  memes: Meme[] = [];
  suggestions: Suggestion[] = [];
  private readonly api: ApiClient;
  private readonly actor: string;
  private readonly onRender?: (controller: DashboardController) => void;

  constructor(options: ControllerOptions) {
    this.api = options.api;
    this.actor = options.actor;
    this.onRender = options.onRender;
    this.state = initialState(options.lang);
  }

  private update(next: ViewState): void {
    this.state = next;
    this.onRender?.(this);
  }

  async start(): Promise<void> {
    this.memes = await this.api.listMemes();
    await this.refreshQueue();
  }

  async refreshQueue(): Promise<void> {
    try {
      const { messages } = await this.api.listMessages(this.state.lang);
      this.update(setQueue(this.state, messages));
    } catch (err) {
      // Keep the stale queue visible; surface a retry banner.
      this.update({ ...this.state, error: String(err) });
    }
  }

  async select(messageId: string | null): Promise<void> {
    this.update(selectMessage(this.state, messageId));
    this.suggestions = [];
    if (messageId !== null) {
      this.suggestions = await this.api.suggestions(messageId);
      this.onRender?.(this);
    }
  }

  pickMeme(memeId: string | null): void {
    this.update(pickMeme(this.state, memeId));
  }

  insertSuggestion(suggestion: Suggestion): void {
    this.update(
      insertSuggestion(this.state, suggestion.text, suggestion.grammar_id),
    );
  }

  editText(text: string): void {
    this.update(editText(this.state, text));
  }

  /** Submit the composer draft as a RESPOND act. */
  async submitResponse(): Promise<ActionRecord | null> {
    if (!canSubmit(this.state) || this.state.selectedId === null) return null;
    const { draft, selectedId } = this.state;
    return this.performAct(selectedId, {
      action: "RESPOND" as const,
      actor: this.actor,
      ...(draft.memeId !== null && { meme_id: draft.memeId }),
      ...(draft.text.trim() !== "" && {
        text: draft.text,
        text_source: draft.textSource,
      }),
      ...(draft.grammarId !== null && { grammar_id: draft.grammarId }),
    });
  }

  async startReportFlow(): Promise<void> {
    const message = this.state.queue.find(
      (m) => m.id === this.state.selectedId,
    );
    if (!message) return;
    const tree = await this.api.tree(message.lang);
    this.update(startWalk(this.state, tree));
  }

  answer(option: string): void {
    this.update(answerQuestion(this.state, option));
  }

  back(): void {
    this.update(walkBack(this.state));
  }

  /** Submit the finished walk: a report, or the redirected RESPOND/IGNORE. */
  async submitWalk(): Promise<ActionRecord | null> {
    const { walk, selectedId } = this.state;
    if (!walk || selectedId === null) return null;
    const terminal = walkTerminal(walk);
    if (terminal === null) return null;
    if (terminal === "IGNORE") {
      return this.performAct(selectedId, {
        action: "IGNORE" as const,
        actor: this.actor,
      });
    }
    if (terminal === "RESPOND") {
      // Redirect to the composer; nothing is submitted yet.
      this.update({ ...this.state, walk: null });
      return null;
    }
    return this.performAct(selectedId, {
      action: "REPORT" as const,
      actor: this.actor,
      transcript: walk.answers,
    });
  }

  private async performAct(
    messageId: string,
    body: Parameters<ApiClient["act"]>[1],
  ): Promise<ActionRecord | null> {
    try {
      const record = await this.api.act(messageId, body);
      this.update(actAccepted(this.state, messageId));
      return record;
    } catch (err) {
      if (err instanceof ApiConflictError) {
        this.update(actConflicted(this.state, err.message));
        return null;
      }
      throw err;
    }
  }

  // -- view ------------------------------------------------------------------

  queueHtml(): string {
    return renderQueue(this.state);
  }

  composerHtml(): string {
    return renderComposer(this.state, this.memes, this.suggestions);
  }

  treeHtml(): string {
    return renderTreeWalk(this.state);
  }

  async statsHtml(): Promise<string> {
    const [styles, composition, series] = await Promise.all([
      this.api.engagement("style"),
      this.api.engagement("composition"),
      this.api.timeseries(
        this.state.statsFilters.lang,
        this.state.statsFilters.label ?? undefined,
      ),
    ]);
    return (
      renderEngagementBars(styles) +
      renderEngagementBars(composition) +
      renderTimeseries(series)
    );
  }
}

/** Browser bootstrap: mount into a page and poll on the refresh cadence. */
export function mount(
  root: { innerHTML: string },
  options: ControllerOptions,
): DashboardController {
  const controller = new DashboardController({
    ...options,
    onRender: (c) => {
      root.innerHTML =
        `<section id="queue">${c.queueHtml()}</section>` +
        `<section id="composer">${c.composerHtml()}</section>` +
        `<section id="report">${c.treeHtml()}</section>`;
      options.onRender?.(c);
    },
  });
  void controller.start();
  setInterval(() => void controller.refreshQueue(), REFRESH_MINUTES * 60_000);
  return controller;
}
