/** Single-page annotation flow.
 *
 * One pair on screen at a time: image, caption, label checkboxes built
 * from the service schema, facet checkboxes gated on the facet-carrier
 * label, a comment box, and a submit button. Digit keys toggle labels,
 * Enter submits. Queue position comes only from server responses, so a
 * reload resumes exactly where the server says the annotator is.
 *
 * Control gating mirrors the server rules (exclusive labels clear the
 * rest, facets are disabled until their carrier label is checked). One
 * edge is deliberately left to the server: unchecking the carrier
 * label keeps already-chosen facets rather than silently discarding
 * them, so a submit in that state is rejected server-side and the rule
 * is shown inline with the selection preserved.
 */

import { ApiClient, ApiError, NetworkError } from "./api.js";
import { buildUiSchema, shortcutFor, UiSchema } from "./schema.js";
import { validateSelection } from "./validate.js";
import type { NextDoneResponse, NextPairResponse, SubmitPayload } from "./types.js";

export interface AppOptions {
  /** timestamp source for submissions; injectable for scripted runs */
  clock?: () => number;
}

export class AnnotateApp {
  private ui: UiSchema | null = null;
  private current: NextPairResponse | null = null;
  private selected = new Set<string>();
  private facetsChecked = new Set<string>();
  private imageFailed = false;
  private clock: () => number;
  private keyHandler: (ev: KeyboardEvent) => void;

  constructor(
    private root: HTMLElement,
    private client: ApiClient,
    options: AppOptions = {},
  ) {
    this.clock = options.clock ?? (() => Date.now());
    this.keyHandler = (ev) => this.onKey(ev);
  }

  async start(): Promise<void> {
    this.root.ownerDocument.addEventListener("keydown", this.keyHandler);
    await this.advance();
  }

  stop(): void {
    this.root.ownerDocument.removeEventListener("keydown", this.keyHandler);
  }

  async advance(): Promise<void> {
    let res;
    try {
      res = await this.client.next();
    } catch (err) {
      if (err instanceof NetworkError) {
        this.renderRetryBanner("could not reach the service", () => this.advance());
        return;
      }
      this.renderFatal(err);
      return;
    }
    if (res.status === "done") {
      this.renderDone(res);
    } else {
      this.renderPair(res);
    }
  }

  // ---------------------------------------------------------------- render

  renderPair(payload: NextPairResponse): void {
    this.current = payload;
    this.ui = buildUiSchema(payload.schema);
    this.selected = new Set();
    this.facetsChecked = new Set();
    this.imageFailed = false;
    const doc = this.root.ownerDocument;
    this.root.innerHTML = "";

    const header = doc.createElement("header");
    header.className = "pair-header";
    const position = doc.createElement("span");
    position.className = "position";
    position.textContent = `pair ${payload.position} of ${payload.total}`;
    const who = doc.createElement("span");
    who.className = "annotator";
    who.textContent = this.client.annotator;
    header.append(position, who);

    const figure = doc.createElement("figure");
    figure.className = "pair-view";
    const img = doc.createElement("img");
    img.src = payload.pair.image_url;
    img.alt = "image under annotation";
    img.addEventListener("error", () => this.onImageError(img));
    const caption = doc.createElement("figcaption");
    caption.textContent = payload.pair.caption;
    figure.append(img, caption);

    const labels = doc.createElement("fieldset");
    labels.className = "labels";
    const legend = doc.createElement("legend");
    legend.textContent = "How does the text relate to the image?";
    labels.append(legend);
    for (const rel of this.ui.relations) {
      labels.append(this.makeRelationControl(rel.label, rel.help));
    }

    const facets = doc.createElement("fieldset");
    facets.className = "facets";
    const facetLegend = doc.createElement("legend");
    facetLegend.textContent = `${this.ui.facetRequires} facets`;
    facets.append(facetLegend);
    for (const facet of this.ui.facets) {
      facets.append(this.makeFacetControl(facet));
    }

    const comment = doc.createElement("textarea");
    comment.className = "comment";
    comment.placeholder = "optional comment";

    const messages = doc.createElement("ul");
    messages.className = "messages";

    const submit = doc.createElement("button");
    submit.className = "submit";
    submit.textContent = "submit";
    submit.addEventListener("click", () => void this.submit());

    this.root.append(header, figure, labels, facets, comment, messages, submit);
    this.refreshGating();
  }

  private makeRelationControl(label: string, help: string): HTMLLabelElement {
    const doc = this.root.ownerDocument;
    const wrap = doc.createElement("label");
    wrap.title = help;
    const input = doc.createElement("input");
    input.type = "checkbox";
    input.dataset.label = label;
    input.addEventListener("change", () => this.toggleRelation(label));
    const text = doc.createElement("span");
    const key = this.ui ? shortcutFor(this.ui, label) : null;
    const badge = doc.createElement("span");
    badge.className = "shortcut";
    badge.textContent = key ?? "";
    text.textContent = label;
    wrap.append(input, badge, text);
    return wrap;
  }

  private makeFacetControl(facet: string): HTMLLabelElement {
    const doc = this.root.ownerDocument;
    const wrap = doc.createElement("label");
    const input = doc.createElement("input");
    input.type = "checkbox";
    input.dataset.facet = facet;
    input.addEventListener("change", () => this.toggleFacet(facet));
    const text = doc.createElement("span");
    text.textContent = facet;
    wrap.append(input, text);
    return wrap;
  }

  renderDone(payload: NextDoneResponse): void {
    this.current = null;
    this.root.innerHTML = "";
    const doc = this.root.ownerDocument;
    const screen = doc.createElement("div");
    screen.className = "done-screen";
    const h = doc.createElement("h2");
    h.textContent = "queue complete";
    const p = doc.createElement("p");
    p.className = "progress-summary";
    p.textContent = `${payload.completed} of ${payload.total} assignments annotated`;
    screen.append(h, p);
    this.root.append(screen);
  }

  private renderFatal(err: unknown): void {
    this.root.innerHTML = "";
    const p = this.root.ownerDocument.createElement("p");
    p.className = "fatal";
    p.textContent = err instanceof Error ? err.message : String(err);
    this.root.append(p);
  }

  // ------------------------------------------------------------- selection

  toggleRelation(label: string): void {
    if (!this.ui) return;
    if (this.selected.has(label)) {
      this.selected.delete(label);
    } else {
      const desc = this.ui.relations.find((r) => r.label === label);
      if (desc?.exclusive) {
        this.selected.clear();
      } else {
        for (const rel of this.ui.relations) {
          if (rel.exclusive) this.selected.delete(rel.label);
        }
      }
      this.selected.add(label);
    }
    this.refreshGating();
    this.showInlineWarnings();
  }

  toggleFacet(facet: string): void {
    if (this.facetsChecked.has(facet)) {
      this.facetsChecked.delete(facet);
    } else {
      this.facetsChecked.add(facet);
    }
    this.showInlineWarnings();
  }

  private refreshGating(): void {
    if (!this.ui) return;
    const carrierOn = this.selected.has(this.ui.facetRequires);
    for (const input of this.root.querySelectorAll<HTMLInputElement>("input[data-label]")) {
      input.checked = this.selected.has(input.dataset.label ?? "");
    }
    for (const input of this.root.querySelectorAll<HTMLInputElement>("input[data-facet]")) {
      input.disabled = !carrierOn;
      input.checked = this.facetsChecked.has(input.dataset.facet ?? "");
    }
  }

  private onImageError(img: HTMLImageElement): void {
    this.imageFailed = true;
    const doc = this.root.ownerDocument;
    const placeholder = doc.createElement("div");
    placeholder.className = "image-placeholder";
    placeholder.textContent = "image unavailable";
    img.replaceWith(placeholder);
    const warning = doc.createElement("p");
    warning.className = "image-warning";
    warning.textContent =
      "the image could not be loaded; annotate from the caption and flag it";
    const figure = this.root.querySelector("figure.pair-view");
    figure?.before(warning);
  }

  // ----------------------------------------------------------------- keys

  private onKey(ev: KeyboardEvent): void {
    if (!this.ui || !this.current) return;
    const target = ev.target as HTMLElement | null;
    if (target && (target.tagName === "TEXTAREA" || target.tagName === "INPUT")) {
      if (!(target as HTMLInputElement).type || (target as HTMLInputElement).type !== "checkbox") {
        return;
      }
    }
    if (ev.key === "Enter") {
      ev.preventDefault();
      void this.submit();
      return;
    }
    const label = this.ui.shortcuts.get(ev.key);
    if (label) {
      ev.preventDefault();
      this.toggleRelation(label);
    }
  }

  // --------------------------------------------------------------- submit

  selection(): { relations: string[]; facets: string[] } {
    if (!this.ui) return { relations: [], facets: [] };
    return {
      relations: this.ui.relations.map((r) => r.label).filter((l) => this.selected.has(l)),
      facets: this.ui.facets.filter((f) => this.facetsChecked.has(f)),
    };
  }

  private commentValue(): string | null {
    const box = this.root.querySelector<HTMLTextAreaElement>("textarea.comment");
    const text = (box?.value ?? "").trim();
    if (this.imageFailed) {
      return text ? `${text} [image-load-failed]` : "[image-load-failed]";
    }
    return text || null;
  }

  async submit(): Promise<void> {
    if (!this.current || !this.ui) return;
    const { relations, facets } = this.selection();
    if (relations.length === 0) {
      this.renderViolations(validateSelection(this.current.schema, this.selected, this.facetsChecked));
      return;
    }
    const payload: SubmitPayload = {
      pair_id: this.current.pair.pair_id,
      relations,
      facets,
      comment: this.commentValue(),
      timestamp: this.clock(),
    };
    try {
      await this.client.submit(payload);
    } catch (err) {
      if (err instanceof ApiError) {
        this.renderViolations(
          err.violations.length ? err.violations : [String(err.detail ?? err.message)],
        );
        return;
      }
      if (err instanceof NetworkError) {
        this.renderRetryBanner("submit failed, nothing was lost", () => this.submit());
        return;
      }
      throw err;
    }
    await this.advance();
  }

  private showInlineWarnings(): void {
    if (!this.current) return;
    const warnings = validateSelection(this.current.schema, this.selected, this.facetsChecked);
    this.renderViolations(warnings.filter((w) => w !== "select at least one label"));
  }

  private renderViolations(violations: string[]): void {
    const list = this.root.querySelector("ul.messages");
    if (!list) return;
    list.innerHTML = "";
    const doc = this.root.ownerDocument;
    for (const v of violations) {
      const item = doc.createElement("li");
      item.className = "violation";
      item.textContent = v;
      list.append(item);
    }
  }

  private renderRetryBanner(message: string, retry: () => Promise<void> | void): void {
    const existing = this.root.querySelector(".retry-banner");
    existing?.remove();
    const doc = this.root.ownerDocument;
    const banner = doc.createElement("div");
    banner.className = "retry-banner";
    const text = doc.createElement("span");
    text.textContent = message;
    const button = doc.createElement("button");
    button.textContent = "retry";
    button.addEventListener("click", () => {
      banner.remove();
      void retry();
    });
    banner.append(text, button);
    const anchor = this.root.querySelector("ul.messages");
    if (anchor) {
      anchor.before(banner);
    } else {
      this.root.append(banner);
    }
  }
}
