import { ClientState, JudgeClient } from "./client.js";
import { Side } from "./types.js";

export interface Handlers {
  onChoose: (side: Side) => void;
  onRefresh: () => void;
}

function el(
  doc: Document,
  tag: string,
  className: string,
  text = "",
): HTMLElement {
  const node = doc.createElement(tag);
  if (className) node.className = className;
  if (text) node.textContent = text;
  return node;
}

function panel(
  doc: Document,
  side: Side,
  label: string,
  passage: string,
  enabled: boolean,
  onChoose: (side: Side) => void,
): HTMLElement {
  const article = el(doc, "article", "panel");
  article.dataset.side = side;
  const button = el(doc, "button", "pick", label) as HTMLButtonElement;
  button.disabled = !enabled;
  button.addEventListener("click", () => onChoose(side));
  article.appendChild(button);
  article.appendChild(el(doc, "div", "passage", passage));
  return article;
}

/** Rebuild the whole UI for one client state. */
export function render(
  state: ClientState,
  container: HTMLElement,
  handlers: Handlers,
): void {
  const doc = container.ownerDocument;
  container.replaceChildren();

  if (state.excluded) {
    container.appendChild(
      el(doc, "div", "banner", "Your answers failed a quality check; they will not be counted."),
    );
  }

  switch (state.phase) {
    case "idle":
    case "loading":
      container.appendChild(el(doc, "p", "status", "Loading the next pair..."));
      break;
    case "viewing":
    case "submitting": {
      const pair = state.pair;
      if (pair === null) break;
      container.appendChild(el(doc, "p", "question", pair.question));
      const panels = el(doc, "main", "panels");
      const enabled = state.phase === "viewing";
      panels.appendChild(
        panel(doc, "a", "Prefer left (←)", pair.passage_a, enabled, handlers.onChoose),
      );
      panels.appendChild(
        panel(doc, "b", "Prefer right (→)", pair.passage_b, enabled, handlers.onChoose),
      );
      container.appendChild(panels);
      break;
    }
    case "drained": {
      container.appendChild(
        el(doc, "p", "status", "Nothing to judge right now; pairs may be leased to others."),
      );
      const again = el(doc, "button", "refresh", "Check again") as HTMLButtonElement;
      again.addEventListener("click", () => handlers.onRefresh());
      container.appendChild(again);
      break;
    }
    case "complete":
      container.appendChild(el(doc, "p", "status done", "All pairs are judged. Thank you!"));
      break;
    case "error":
      container.appendChild(el(doc, "div", "error", `Something went wrong: ${state.message}`));
      break;
  }

  const footer = el(doc, "footer", "statusbar", `${state.judged} judged this session`);
  if (state.message && state.phase === "viewing") {
    footer.appendChild(el(doc, "span", "note", ` (${state.message})`));
  }
  container.appendChild(footer);
}

/** Left/right arrow keys pick the matching passage. */
export function attachKeyboard(
  client: JudgeClient,
  target: Pick<Window, "addEventListener">,
): void {
  target.addEventListener("keydown", (event: KeyboardEvent) => {
    if (event.key === "ArrowLeft") void client.choose("a");
    else if (event.key === "ArrowRight") void client.choose("b");
  });
}
