import { describe, expect, test } from "vitest";

import { JudgeClient } from "../src/client.js";
import { render } from "../src/dom.js";
import { Side } from "../src/types.js";
import { docOfPassage, passageOf, ScriptedService } from "./fixture.js";

const EIGHT = ["c1", "c2", "c3", "c4", "c5", "c6", "c7", "c8"];

function mount(client: JudgeClient): HTMLElement {
  const container = document.createElement("div");
  document.body.appendChild(container);
  client.subscribe((state) =>
    render(state, container, {
      onChoose: (side: Side) => void client.choose(side),
      onRefresh: () => void client.refresh(),
    }),
  );
  return container;
}

// strength follows candidate order: c1 beats c2 beats c3 ...
function strongerSide(client: JudgeClient): Side {
  const pair = client.state.pair;
  if (pair === null) throw new Error("no pair on screen");
  return docOfPassage(pair.passage_a) < docOfPassage(pair.passage_b) ? "a" : "b";
}

async function settled(client: JudgeClient): Promise<void> {
  for (let i = 0; i < 100; i++) {
    const phase = client.state.phase;
    if (phase !== "submitting" && phase !== "loading") return;
    await Promise.resolve();
  }
  throw new Error("client did not settle");
}

describe("judging UI acceptance", () => {
  test("renders a pair with both passages and the question", async () => {
    const service = new ScriptedService(EIGHT);
    const client = new JudgeClient(service, "w1");
    const container = mount(client);

    await client.start();

    expect(client.state.phase).toBe("viewing");
    expect(container.textContent).toContain("Which passage answers the question better?");
    expect(container.textContent).toContain(passageOf("c1"));
    expect(container.textContent).toContain(passageOf("c2"));
    const buttons = container.querySelectorAll("button.pick");
    expect(buttons.length).toBe(2);
    for (const button of buttons) {
      expect((button as HTMLButtonElement).disabled).toBe(false);
    }
  });

  test("submits exactly one judgment per decision", async () => {
    const service = new ScriptedService(EIGHT);
    const client = new JudgeClient(service, "w1");
    const container = mount(client);
    await client.start();
    const firstPair = client.state.pair;
    if (firstPair === null) throw new Error("no pair rendered");

    // a double click: the second lands while the first is in flight
    const left = container.querySelector<HTMLButtonElement>('article[data-side="a"] button.pick');
    if (left === null) throw new Error("left button missing");
    left.click();
    left.click();
    await settled(client);

    expect(service.applied.filter((a) => a.pairId === firstPair.pair_id).length).toBe(1);
    expect(service.submits.filter((s) => s.pair_id === firstPair.pair_id).length).toBe(1);
    expect(client.state.judged).toBe(1);

    // the same guard applies to direct calls racing each other
    const race1 = client.choose("a");
    const race2 = client.choose("b");
    expect(await race2).toBe(false);
    expect(await race1).toBe(true);
    expect(client.state.judged).toBe(2);
    expect(service.applied.length).toBe(2);
  });

  test("recovers an expired lease without losing the decision", async () => {
    const service = new ScriptedService(EIGHT);
    const client = new JudgeClient(service, "w1");
    mount(client);
    await client.start();
    const shown = client.state.pair;
    if (shown === null) throw new Error("no pair rendered");
    const chosenDoc = docOfPassage(shown.passage_a);

    // lease times out before the click; the re-issued pair is side-flipped
    service.expireLease(true);
    const accepted = await client.choose("a");

    expect(accepted).toBe(true);
    expect(service.rejected).toBe(1);
    expect(service.applied.length).toBe(1);
    expect(service.applied[0]?.pairId).toBe(shown.pair_id);
    expect(service.applied[0]?.winnerDoc).toBe(chosenDoc);
    expect(client.state.judged).toBe(1);
    expect(client.state.phase).toBe("viewing");
  });

  test("completes an eight candidate tournament in seven interactions", async () => {
    const service = new ScriptedService(EIGHT);
    const client = new JudgeClient(service, "w1");
    mount(client);
    await client.start();

    let interactions = 0;
    while (client.state.phase === "viewing" && interactions < 20) {
      interactions += 1;
      await client.choose(strongerSide(client));
    }

    expect(interactions).toBe(7);
    expect(service.applied.length).toBe(7);
    expect(service.submits.length).toBe(7);
    expect(service.champion).toBe("c1");
    expect(client.state.phase).toBe("complete");
  });
});
