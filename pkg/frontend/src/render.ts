/** DOM rendering of the view model.  Rendering is a pure function of
 *  (view model, banner): the container is rebuilt on every change. */

import type { Banner } from "./app.js";
import type { EnergyBar, NodeView, TreeViewModel } from "./viewmodel.js";

export interface RenderHandlers {
  onExpand: (nodeId: number, reactionClass: number | null) => void;
  onSelect: (nodeId: number) => void;
  onDismissBanner: () => void;
}

function el(
  tag: string,
  className?: string,
  text?: string,
): HTMLElement {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function classSelector(): HTMLSelectElement {
  const select = document.createElement("select");
  select.className = "class-select";
  const unknown = document.createElement("option");
  unknown.value = "";
  unknown.textContent = "class: unknown";
  select.appendChild(unknown);
  for (let c = 1; c <= 10; c++) {
    const opt = document.createElement("option");
    opt.value = String(c);
    opt.textContent = `class: ${c}`;
    select.appendChild(opt);
  }
  return select;
}

function energyBars(bars: EnergyBar[]): HTMLElement {
  const wrap = el("div", "energy-bars");
  const max = Math.max(1e-9, ...bars.map((b) => Math.abs(b.value)));
  for (const bar of bars) {
    const row = el("div", "energy-bar");
    row.appendChild(el("span", "energy-label", bar.label));
    const track = el("div", "energy-track");
    const fill = el("div", "energy-fill");
    fill.style.width = `${(Math.abs(bar.value) / max) * 100}%`;
    track.appendChild(fill);
    row.appendChild(track);
    row.appendChild(el("span", "energy-value", bar.value.toFixed(3)));
    wrap.appendChild(row);
  }
  return wrap;
}

function nodeCard(
  node: NodeView,
  byId: Map<number, NodeView>,
  handlers: RenderHandlers,
  seen: Set<number>,
): HTMLElement {
  const card = el(
    "div",
    `node node-${node.kind} status-${node.status}` +
      (node.onSolvedRoute ? " on-route" : "") +
      (node.selected ? " selected" : ""),
  );
  card.dataset.nodeId = String(node.id);

  const header = el("div", "node-header");
  header.appendChild(el("span", "node-label", node.label));
  header.appendChild(el("span", "node-status", node.status));
  header.addEventListener("click", () => handlers.onSelect(node.id));
  card.appendChild(header);

  if (node.kind === "reaction") {
    card.appendChild(energyBars(node.energyBars));
  }

  if (node.kind === "molecule") {
    const controls = el("div", "node-controls");
    const select = classSelector();
    const button = document.createElement("button");
    button.textContent = node.pending ? "expanding…" : "expand";
    button.disabled = !node.expandable;
    button.addEventListener("click", () => {
      const cls = select.value === "" ? null : Number(select.value);
      handlers.onExpand(node.id, cls);
    });
    controls.appendChild(select);
    controls.appendChild(button);
    card.appendChild(controls);
  }

  if (seen.has(node.id)) {
    // converging branch: render a reference instead of recursing forever
    card.appendChild(el("div", "node-ref", `(see node ${node.id} above)`));
    return card;
  }
  seen.add(node.id);
  if (node.children.length > 0) {
    const kids = el("div", "node-children");
    for (const childId of node.children) {
      const child = byId.get(childId);
      if (child) kids.appendChild(nodeCard(child, byId, handlers, seen));
    }
    card.appendChild(kids);
  }
  return card;
}

export function renderApp(
  container: HTMLElement,
  vm: TreeViewModel | null,
  banner: Banner | null,
  handlers: RenderHandlers,
): void {
  container.replaceChildren();

  if (banner !== null) {
    const box = el("div", `banner banner-${banner.kind}`);
    box.appendChild(el("strong", "banner-code", banner.code));
    box.appendChild(el("span", "banner-message", ` ${banner.message}`));
    const close = document.createElement("button");
    close.className = "banner-dismiss";
    close.textContent = "×";
    close.addEventListener("click", handlers.onDismissBanner);
    box.appendChild(close);
    container.appendChild(box);
  }

  if (vm === null) return;
  if (vm.empty) {
    container.appendChild(
      el("div", "empty-state", "No nodes in this session yet."),
    );
    return;
  }

  const meta = el("div", "session-meta");
  meta.appendChild(el("span", "budget", `budget: ${vm.budgetRemaining}`));
  if (vm.solvedRoutes.length > 0) {
    const best = vm.solvedRoutes[0]!;
    meta.appendChild(
      el(
        "span",
        "solved",
        `solved route: ${best.steps.length} steps, ` +
          `energy ${best.totalEnergy.toFixed(3)}`,
      ),
    );
  }
  container.appendChild(meta);

  const byId = new Map(vm.nodes.map((n) => [n.id, n]));
  const root = byId.get(vm.rootId);
  if (root) {
    container.appendChild(nodeCard(root, byId, handlers, new Set()));
  }
}
