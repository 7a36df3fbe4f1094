/** Review session controller: binds the API to the DOM.
 *
 * All truth lives server-side; the only client state is the user id and
 * the currently displayed item.  Keyboard (y/n/a) and the three buttons
 * funnel into the same submit path, so both produce identical requests.
 * Inputs are disabled while a label request is in flight.
 */

import { AgreementPayload, Label, NextItem, ReviewApi } from "./api.js";

export const KEY_TO_LABEL: Record<string, Label> = {
  y: "yes",
  n: "no",
  a: "ambiguous",
};

export interface AppElements {
  loginForm: HTMLElement;
  userInput: HTMLInputElement;
  startButton: HTMLButtonElement;
  session: HTMLElement;
  image: HTMLImageElement;
  question: HTMLElement;
  expectedAnswer: HTMLElement;
  progress: HTMLElement;
  buttons: Record<Label, HTMLButtonElement>;
  doneScreen: HTMLElement;
  errorBanner: HTMLElement;
  retryButton: HTMLButtonElement;
  agreementPanel: HTMLElement;
}

export class ReviewApp {
  private user = "";
  private current: NextItem | null = null;
  private inFlight = false;

  constructor(
    private api: ReviewApi,
    private el: AppElements,
  ) {}

  bind(doc: { addEventListener(type: string, fn: (ev: unknown) => void): void }) {
    this.el.startButton.addEventListener("click", () => {
      void this.start(this.el.userInput.value.trim());
    });
    for (const label of Object.values(KEY_TO_LABEL)) {
      this.el.buttons[label].addEventListener("click", () => {
        void this.submit(label);
      });
    }
    doc.addEventListener("keydown", (ev) => {
      const key = (ev as KeyboardEvent).key.toLowerCase();
      const label = KEY_TO_LABEL[key];
      if (label && this.user) {
        void this.submit(label);
      }
    });
    this.el.retryButton.addEventListener("click", () => {
      void this.advance();
    });
  }

  async start(user: string): Promise<void> {
    if (!user) {
      return;
    }
    this.user = user;
    this.el.loginForm.hidden = true;
    this.el.session.hidden = false;
    await this.advance();
  }

  /** Fetch and render the next unlabeled item (or the completion screen). */
  async advance(): Promise<void> {
    this.el.errorBanner.hidden = true;
    let item: NextItem;
    try {
      item = await this.api.next(this.user);
    } catch {
      this.showError();
      return;
    }
    this.current = item;
    this.renderProgress(item.progress);
    if (item.done) {
      this.el.session.hidden = true;
      this.el.doneScreen.hidden = false;
      await this.refreshAgreement();
      return;
    }
    this.el.image.src = item.image_url ?? "";
    this.el.question.textContent = item.question ?? "";
    this.el.expectedAnswer.textContent = item.expected_answer ?? "";
  }

  /** Submit exactly one label for the current item, then advance. */
  async submit(label: Label): Promise<void> {
    if (this.inFlight || !this.current || this.current.done) {
      return;
    }
    const editId = this.current.edit_id;
    if (!editId) {
      return;
    }
    this.inFlight = true;
    this.setButtonsDisabled(true);
    try {
      // a 409 means the label is already stored; advancing is correct
      await this.api.label(this.user, editId, label);
    } catch {
      this.showError();
      return;
    } finally {
      this.inFlight = false;
      this.setButtonsDisabled(false);
    }
    await this.advance();
  }

  async refreshAgreement(): Promise<void> {
    let payload: AgreementPayload;
    try {
      payload = await this.api.agreement();
    } catch {
      return;
    }
    this.el.agreementPanel.textContent = renderAgreement(payload);
  }

  private renderProgress(progress: { labeled: number; total: number }): void {
    this.el.progress.textContent = `${progress.labeled} / ${progress.total}`;
  }

  private setButtonsDisabled(disabled: boolean): void {
    for (const label of Object.values(KEY_TO_LABEL)) {
      this.el.buttons[label].disabled = disabled;
    }
  }

  private showError(): void {
    this.el.errorBanner.hidden = false;
  }
}

/** Text rendering of the agreement payload; mirrors the endpoint exactly. */
export function renderAgreement(payload: AgreementPayload): string {
  if (payload.empty) {
    return "No labels yet.";
  }
  const lines: string[] = [`Items: ${payload.n_items ?? 0}`];
  const fmt = (row: Record<Label, number>) =>
    `yes ${row.yes.toFixed(2)}%  no ${row.no.toFixed(2)}%  ` +
    `ambiguous ${row.ambiguous.toFixed(2)}%`;
  for (const [user, row] of Object.entries(payload.per_user ?? {})) {
    lines.push(`${user}: ${fmt(row)}`);
  }
  if (payload.intersection) {
    lines.push(`all agree: ${fmt(payload.intersection)}`);
  }
  if (payload.union) {
    lines.push(`any: ${fmt(payload.union)}`);
  }
  return lines.join("\n");
}
