import { ApiClient } from "./api.js";
import { Controller } from "./controller.js";
import { render, renderOnboarding } from "./render.js";

async function boot(): Promise<void> {
  const root = document.getElementById("app");
  if (!(root instanceof HTMLElement)) {
    throw new Error("missing #app container");
  }
  const api = new ApiClient("");
  const ctl = new Controller(api, (state) => render(root, state, ctl));

  let sessions;
  try {
    sessions = await api.listSessions();
  } catch (err) {
    ctl.state.error = err instanceof Error ? err.message : String(err);
    render(root, ctl.state, ctl);
    return;
  }
  if (sessions.length === 0) {
    renderOnboarding(root);
    return;
  }

  const fromHash = window.location.hash.replace(/^#/, "");
  const wanted = sessions.find((s) => s.session_id === fromHash);
  const first = sessions[0];
  const id = wanted?.session_id ?? first?.session_id ?? "";
  await ctl.loadSession(id);
}

void boot();
