import { ApiClient } from "./api.js";
import { RouteExplorer } from "./app.js";
import { renderApp } from "./render.js";

function bootstrap(): void {
  const treeContainer = document.getElementById("tree");
  const form = document.getElementById("target-form") as HTMLFormElement | null;
  const targetInput = document.getElementById(
    "target-input",
  ) as HTMLInputElement | null;
  if (!treeContainer || !form || !targetInput) return;

  const api = new ApiClient("");
  const explorer = new RouteExplorer(api, {
    onChange: () =>
      renderApp(treeContainer, explorer.view, explorer.banner, {
        onExpand: (nodeId, cls) => void explorer.submitExpansion(nodeId, cls),
        onSelect: (nodeId) => explorer.select(nodeId),
        onDismissBanner: () => explorer.dismissBanner(),
      }),
  });

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const target = targetInput.value.trim();
    if (target) void explorer.start(target);
  });
}

bootstrap();
