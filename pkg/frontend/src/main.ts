import { JudgeClient } from "./client.js";
import { attachKeyboard, render } from "./dom.js";
import { HttpTransport } from "./transport.js";

function assessorName(): string {
  const fromUrl = new URLSearchParams(window.location.search).get("assessor");
  if (fromUrl) {
    localStorage.setItem("assessor", fromUrl);
    return fromUrl;
  }
  const stored = localStorage.getItem("assessor");
  if (stored) return stored;
  const generated = `anon-${Math.random().toString(36).slice(2, 10)}`;
  localStorage.setItem("assessor", generated);
  return generated;
}

const app = document.getElementById("app");
if (app === null) throw new Error("missing #app container");

const client = new JudgeClient(new HttpTransport(""), assessorName());
client.subscribe((state) =>
  render(state, app, {
    onChoose: (side) => void client.choose(side),
    onRefresh: () => void client.refresh(),
  }),
);
attachKeyboard(client, window);
void client.start();
