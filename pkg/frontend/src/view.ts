// DOM rendering.  The view is a pure function of the app state: every
// displayed confidence comes verbatim from the service (2 decimals),
// no strength arithmetic happens here.

import { depthMap, layoutTree } from "./tree.js";
import type { Polarity, SessionView } from "./types.js";
import { SEMANTICS_IDS } from "./types.js";

export const MAX_DEPTH = 2;

const NODE_W = 240;
const NODE_H = 130;
const H_GAP = 28;
const V_GAP = 70;

export interface ViewState {
  session: SessionView | null;
  busy: boolean;
  banner: string | null;
  settingsOpen: boolean;
  sliderError: { argumentId: string; message: string } | null;
  addForm: { parent: string; polarity: Polarity } | null;
  verdictFlash: boolean;
}

export interface Handlers {
  onClaimSubmit(text: string): void;
  onSliderCommit(argumentId: string, value: number, revert: () => void): void;
  onAddFormOpen(parent: string, polarity: Polarity): void;
  onAddFormClose(): void;
  onAddGenerate(parent: string, polarity: Polarity): void;
  onAddManual(parent: string, polarity: Polarity, text: string, score: number | null): void;
  onChatSend(message: string): void;
  onUpload(file: File): void;
  onSettingsOpen(): void;
  onSettingsClose(): void;
  onSettingsSave(settings: unknown): void;
  onBannerDismiss(): void;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string | boolean> = {},
  ...children: (Node | string)[]
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    if (typeof value === "boolean") {
      if (value) node.setAttribute(key, "");
    } else {
      node.setAttribute(key, value);
    }
  }
  node.append(...children);
  return node;
}

function svgEl(tag: string, attrs: Record<string, string>): SVGElement {
  const node = document.createElementNS("http://www.w3.org/2000/svg", tag);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, value);
  }
  return node;
}

function fmt(value: number): string {
  return value.toFixed(2);
}

function verdictBadge(state: ViewState): HTMLElement {
  const verdict = state.session?.verdict;
  if (!verdict) {
    return el("span", { id: "verdict", class: "verdict none" }, "no claim yet");
  }
  const classes = `verdict ${verdict.label}${state.verdictFlash ? " flash" : ""}`;
  return el("span", { id: "verdict", class: classes }, `${fmt(verdict.root_strength)} · ${verdict.label}`);
}

function header(state: ViewState, handlers: Handlers): HTMLElement {
  const settingsButton = el("button", { id: "open-settings", disabled: state.busy }, "Settings");
  settingsButton.addEventListener("click", () => handlers.onSettingsOpen());
  const claim = state.session?.qbaf?.arguments.find((a) => a.id === state.session?.qbaf?.root);
  return el(
    "header",
    {},
    el("h1", {}, "Argument tree"),
    el("span", { id: "claim-text" }, claim ? claim.text : ""),
    verdictBadge(state),
    settingsButton,
  );
}

function banner(state: ViewState, handlers: Handlers): HTMLElement | null {
  if (!state.banner) return null;
  const dismiss = el("button", { class: "dismiss" }, "×");
  dismiss.addEventListener("click", () => handlers.onBannerDismiss());
  return el("div", { id: "banner", class: "banner", role: "alert" }, state.banner, dismiss);
}

function claimPrompt(state: ViewState, handlers: Handlers): HTMLElement {
  const input = el("input", {
    id: "claim-input",
    placeholder: "State a binary claim to assess",
    disabled: state.busy,
  });
  const button = el("button", { type: "submit", disabled: state.busy }, "Assess");
  const form = el("form", { id: "claim-form" }, input, button);
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    if (input.value.trim()) handlers.onClaimSubmit(input.value.trim());
  });
  return el("div", { class: "claim-prompt" }, el("p", {}, "No claim under debate yet."), form);
}

function addForm(state: ViewState, handlers: Handlers): HTMLElement {
  const form = state.addForm!;
  const textInput = el("input", { class: "add-text", placeholder: "evidence text (manual)" });
  const scoreInput = el("input", {
    class: "add-score",
    type: "number",
    min: "0",
    max: "1",
    step: "0.01",
    placeholder: "score (blank = ask LLM)",
  });
  const generate = el("button", { type: "button", class: "add-generate" }, "Generate");
  generate.addEventListener("click", () => handlers.onAddGenerate(form.parent, form.polarity));
  const manual = el("button", { type: "button", class: "add-manual" }, "Add");
  manual.addEventListener("click", () => {
    if (!textInput.value.trim()) return;
    const score = scoreInput.value === "" ? null : Number(scoreInput.value);
    handlers.onAddManual(form.parent, form.polarity, textInput.value.trim(), score);
  });
  const cancel = el("button", { type: "button", class: "add-cancel" }, "Cancel");
  cancel.addEventListener("click", () => handlers.onAddFormClose());
  return el(
    "div",
    { class: "add-form", "data-parent": form.parent, "data-polarity": form.polarity },
    el("div", { class: "add-form-title" }, `new ${form.polarity}er`),
    generate,
    textInput,
    scoreInput,
    manual,
    cancel,
  );
}

function nodeCard(
  state: ViewState,
  handlers: Handlers,
  argumentId: string,
  x: number,
  y: number,
): HTMLElement {
  const session = state.session!;
  const qbaf = session.qbaf!;
  const argument = qbaf.arguments.find((a) => a.id === argumentId)!;
  const depths = depthMap(qbaf);
  const depth = depths[argumentId] ?? 0;
  const strength = session.strengths?.[argumentId];
  const isRoot = argumentId === qbaf.root;

  const slider = el("input", {
    type: "range",
    class: "slider",
    min: "0",
    max: "1",
    step: "0.01",
    value: String(argument.base_score),
    "data-node": argumentId,
    disabled: state.busy,
  }) as HTMLInputElement;
  const original = argument.base_score;
  slider.addEventListener("change", () => {
    handlers.onSliderCommit(argumentId, Number(slider.value), () => {
      slider.value = String(original);
    });
  });

  const atCap = depth >= MAX_DEPTH;
  const capTooltip = "Depth limit reached: this argument cannot take further evidence";
  const addButton = (polarity: Polarity, label: string, cls: string) => {
    const button = el(
      "button",
      {
        class: cls,
        "data-node": argumentId,
        disabled: atCap || state.busy,
        ...(atCap ? { title: capTooltip } : {}),
      },
      label,
    );
    button.addEventListener("click", () => handlers.onAddFormOpen(argumentId, polarity));
    return button;
  };

  const children: (Node | string)[] = [
    el("div", { class: "node-role" }, isRoot ? "claim" : argument.provenance),
    el("div", { class: "node-text", title: argument.text }, argument.text),
    el(
      "label",
      { class: "node-base" },
      "base ",
      slider,
      el("span", { class: "base-value" }, fmt(argument.base_score)),
    ),
    el(
      "div",
      { class: "node-final" },
      "final ",
      el("span", { class: "final-value", "data-node": argumentId }, strength === undefined ? "?" : fmt(strength)),
    ),
    el(
      "div",
      { class: "node-actions" },
      addButton("attack", "+ attacker", "add-attacker"),
      addButton("support", "+ supporter", "add-supporter"),
    ),
  ];
  if (state.sliderError && state.sliderError.argumentId === argumentId) {
    children.push(el("div", { class: "slider-error" }, state.sliderError.message));
  }
  if (state.addForm && state.addForm.parent === argumentId) {
    children.push(addForm(state, handlers));
  }

  return el(
    "div",
    {
      class: `node-card${isRoot ? " root" : ""}`,
      "data-node": argumentId,
      style: `left:${x}px;top:${y}px;width:${NODE_W}px`,
    },
    ...children,
  );
}

function treePanel(state: ViewState, handlers: Handlers): HTMLElement {
  const session = state.session!;
  const qbaf = session.qbaf!;
  const layout = layoutTree(qbaf);
  const pxWidth = layout.width * (NODE_W + H_GAP);
  const pxHeight = layout.height * (NODE_H + V_GAP);

  const panel = el("div", { id: "tree-panel", style: `width:${pxWidth}px;height:${pxHeight}px` });
  const svg = svgEl("svg", {
    class: "edges",
    width: String(pxWidth),
    height: String(pxHeight),
    viewBox: `0 0 ${pxWidth} ${pxHeight}`,
  });

  const anchor = (id: string) => {
    const pos = layout.positions[id];
    return {
      x: pos.x * (NODE_W + H_GAP),
      top: pos.y * (NODE_H + V_GAP),
      bottom: pos.y * (NODE_H + V_GAP) + NODE_H,
    };
  };

  for (const edge of qbaf.edges) {
    const child = anchor(edge.source);
    const parent = anchor(edge.target);
    svg.append(
      svgEl("line", {
        class: `edge ${edge.polarity}`,
        x1: String(child.x),
        y1: String(child.top),
        x2: String(parent.x),
        y2: String(parent.bottom),
      }),
    );
    const labelX = (child.x + parent.x) / 2;
    const labelY = (child.top + parent.bottom) / 2;
    const label = svgEl("text", {
      class: `edge-sign ${edge.polarity}`,
      x: String(labelX),
      y: String(labelY),
    });
    label.textContent = edge.polarity === "attack" ? "−" : "+";
    svg.append(label);
  }
  panel.append(svg);

  for (const argument of qbaf.arguments) {
    const pos = layout.positions[argument.id];
    const x = pos.x * (NODE_W + H_GAP) - NODE_W / 2;
    const y = pos.y * (NODE_H + V_GAP);
    panel.append(nodeCard(state, handlers, argument.id, x, y));
  }
  return panel;
}

function miniMap(state: ViewState): HTMLElement {
  const qbaf = state.session!.qbaf!;
  const layout = layoutTree(qbaf);
  const width = 180;
  const height = 110;
  const sx = (value: number) => 10 + (value / Math.max(layout.width, 1)) * (width - 20);
  const sy = (value: number) => 14 + (value / Math.max(layout.height - 1, 1)) * (height - 28);

  const svg = svgEl("svg", {
    id: "minimap",
    width: String(width),
    height: String(height),
    viewBox: `0 0 ${width} ${height}`,
  });
  for (const edge of qbaf.edges) {
    const child = layout.positions[edge.source];
    const parent = layout.positions[edge.target];
    svg.append(
      svgEl("line", {
        class: `edge ${edge.polarity}`,
        x1: String(sx(child.x)),
        y1: String(sy(child.y)),
        x2: String(sx(parent.x)),
        y2: String(sy(parent.y)),
      }),
    );
  }
  for (const argument of qbaf.arguments) {
    const pos = layout.positions[argument.id];
    svg.append(
      svgEl("circle", {
        class: `mini-node${argument.id === qbaf.root ? " root" : ""}`,
        cx: String(sx(pos.x)),
        cy: String(sy(pos.y)),
        r: argument.id === qbaf.root ? "6" : "4",
      }),
    );
  }
  const box = el("div", { class: "minimap-box" }, el("div", { class: "side-title" }, "structure"));
  box.append(svg);
  return box;
}

function documentsPanel(state: ViewState, handlers: Handlers): HTMLElement {
  const session = state.session!;
  const list = el("ul", { id: "document-list" });
  for (const doc of session.documents) {
    list.append(
      el(
        "li",
        { class: doc.extraction_empty ? "doc empty" : "doc" },
        `\u{1F4C4} ${doc.filename || doc.id} (${doc.page_count} p.)${doc.extraction_empty ? " — no extractable text" : ""}`,
      ),
    );
  }
  const input = el("input", {
    type: "file",
    id: "pdf-input",
    accept: "application/pdf",
    disabled: state.busy,
  }) as HTMLInputElement;
  input.addEventListener("change", () => {
    const file = input.files?.[0];
    if (file) handlers.onUpload(file);
  });
  return el(
    "div",
    { class: "documents-box" },
    el("div", { class: "side-title" }, "trusted sources (PDF)"),
    list,
    input,
  );
}

function chatPanel(state: ViewState, handlers: Handlers): HTMLElement {
  const session = state.session!;
  const transcript = el("div", { id: "transcript" });
  for (const entry of session.chat) {
    const isDocMarker = entry.role === "system" && entry.text.startsWith("[document attached");
    transcript.append(
      el("div", { class: `chat-entry ${entry.role}${isDocMarker ? " doc-marker" : ""}` }, entry.text),
    );
  }
  const input = el("input", {
    id: "chat-input",
    placeholder: session.qbaf ? "add evidence or just chat" : "state the claim to assess",
    disabled: state.busy,
  }) as HTMLInputElement;
  const send = el("button", { type: "submit", id: "chat-send", disabled: state.busy }, "Send");
  const form = el("form", { id: "chat-form" }, input, send);
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    if (input.value.trim()) handlers.onChatSend(input.value.trim());
  });
  return el("div", { class: "chat-box" }, el("div", { class: "side-title" }, "chat"), transcript, form);
}

function settingsModal(state: ViewState, handlers: Handlers): HTMLElement {
  const settings = state.session!.settings;
  const select = (id: string, options: (string | number)[], current: string | number) => {
    const node = el("select", { id }) as HTMLSelectElement;
    for (const option of options) {
      const item = el("option", { value: String(option) }, String(option));
      if (String(option) === String(current)) item.setAttribute("selected", "");
      node.append(item);
    }
    return node;
  };
  const semantics = select("settings-semantics", [...SEMANTICS_IDS], settings.semantics);
  const depth = select("settings-depth", [1, 2], settings.depth);
  const breadth = select("settings-breadth", [1, 2, 3, 4], settings.breadth);
  const kind = select("settings-kind", ["mock", "http"], settings.backend.kind);
  const endpoint = el("input", {
    id: "settings-endpoint",
    value: settings.backend.endpoint_url,
    placeholder: "https://api.example/v1",
  }) as HTMLInputElement;
  const model = el("input", { id: "settings-model", value: settings.backend.model }) as HTMLInputElement;
  // held in the form only; sent to the service, never put in browser storage
  const apiKey = el("input", {
    id: "settings-api-key",
    type: "password",
    placeholder: settings.backend.api_key ? "unchanged (•••)" : "API key",
  }) as HTMLInputElement;

  const save = el("button", { id: "settings-save", type: "button" }, "Save");
  save.addEventListener("click", () => {
    handlers.onSettingsSave({
      semantics: semantics.value,
      depth: Number(depth.value),
      breadth: Number(breadth.value),
      backend: {
        kind: kind.value,
        endpoint_url: endpoint.value,
        model: model.value,
        // blank input = keep whatever the service already has
        api_key: apiKey.value || settings.backend.api_key,
        temperature: settings.backend.temperature,
        timeout: settings.backend.timeout,
        mock_seed: settings.backend.mock_seed,
      },
    });
  });
  const close = el("button", { id: "settings-close", type: "button" }, "Cancel");
  close.addEventListener("click", () => handlers.onSettingsClose());

  const row = (label: string, control: HTMLElement) => el("label", { class: "settings-row" }, label, control);
  return el(
    "div",
    { id: "settings-modal", class: "modal" },
    el(
      "div",
      { class: "modal-body" },
      el("h2", {}, "Settings"),
      row("gradual semantics", semantics),
      row("depth", depth),
      row("breadth", breadth),
      row("backend", kind),
      row("endpoint", endpoint),
      row("model", model),
      row("API key", apiKey),
      el("div", { class: "modal-actions" }, save, close),
    ),
  );
}

export function render(root: HTMLElement, state: ViewState, handlers: Handlers): void {
  root.replaceChildren();
  root.append(header(state, handlers));
  const alert = banner(state, handlers);
  if (alert) root.append(alert);

  const main = el("main", {});
  if (!state.session) {
    main.append(el("p", { class: "loading" }, "connecting…"));
  } else if (!state.session.qbaf) {
    main.append(claimPrompt(state, handlers));
  } else {
    main.append(treePanel(state, handlers));
  }
  if (state.session) {
    const side = el("aside", {});
    if (state.session.qbaf) side.append(miniMap(state));
    side.append(documentsPanel(state, handlers), chatPanel(state, handlers));
    main.append(side);
  }
  root.append(main);

  if (state.settingsOpen && state.session) {
    root.append(settingsModal(state, handlers));
  }
}
