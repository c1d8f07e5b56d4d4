import { describe, expect, test, vi } from "vitest";

import { ClientState } from "../src/client.js";
import { Handlers, render } from "../src/dom.js";
import { PairPayload } from "../src/types.js";

const PAIR: PairPayload = {
  pair_id: "p1",
  topic: "q1",
  question: "Which is better?",
  passage_a: "alpha text",
  passage_b: "beta text",
  token: "t1",
};

function state(overrides: Partial<ClientState>): ClientState {
  return { phase: "idle", pair: null, judged: 0, excluded: false, message: "", ...overrides };
}

function mount(clientState: ClientState, handlers?: Partial<Handlers>): HTMLElement {
  const container = document.createElement("div");
  document.body.appendChild(container);
  render(clientState, container, {
    onChoose: handlers?.onChoose ?? (() => undefined),
    onRefresh: handlers?.onRefresh ?? (() => undefined),
  });
  return container;
}

describe("rendering", () => {
  test("loading shows a status line", () => {
    const container = mount(state({ phase: "loading" }));
    expect(container.textContent).toContain("Loading the next pair");
  });

  test("clicking a panel button reports its side", () => {
    const onChoose = vi.fn();
    const container = mount(state({ phase: "viewing", pair: PAIR }), { onChoose });
    container
      .querySelector<HTMLButtonElement>('article[data-side="b"] button.pick')
      ?.click();
    expect(onChoose).toHaveBeenCalledExactlyOnceWith("b");
  });

  test("submitting keeps the passages visible but disables the buttons", () => {
    const container = mount(state({ phase: "submitting", pair: PAIR }));
    expect(container.textContent).toContain("alpha text");
    expect(container.textContent).toContain("beta text");
    for (const button of container.querySelectorAll("button.pick")) {
      expect((button as HTMLButtonElement).disabled).toBe(true);
    }
  });

  test("drained offers a retry button", () => {
    const onRefresh = vi.fn();
    const container = mount(state({ phase: "drained" }), { onRefresh });
    const button = container.querySelector<HTMLButtonElement>("button.refresh");
    expect(button).not.toBeNull();
    button?.click();
    expect(onRefresh).toHaveBeenCalledOnce();
  });

  test("complete thanks the assessor and shows the session count", () => {
    const container = mount(state({ phase: "complete", judged: 7 }));
    expect(container.textContent).toContain("All pairs are judged");
    expect(container.textContent).toContain("7 judged this session");
  });

  test("error shows the message", () => {
    const container = mount(state({ phase: "error", message: "boom" }));
    expect(container.querySelector(".error")?.textContent).toContain("boom");
  });

  test("the exclusion banner appears in any phase once set", () => {
    const container = mount(state({ phase: "viewing", pair: PAIR, excluded: true }));
    expect(container.querySelector(".banner")?.textContent).toContain("quality check");
  });

  test("re-rendering replaces the previous screen", () => {
    const container = mount(state({ phase: "viewing", pair: PAIR }));
    render(state({ phase: "complete", judged: 1 }), container, {
      onChoose: () => undefined,
      onRefresh: () => undefined,
    });
    expect(container.textContent).not.toContain("alpha text");
    expect(container.querySelectorAll("button.pick").length).toBe(0);
  });
});
