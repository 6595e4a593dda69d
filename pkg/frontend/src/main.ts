/** Browser bootstrap: wires the linked views controller to plain SVG/DOM.
 * The view models carry everything render-ready; this file only paints. */

import { HttpClient } from "./api";
import { LinkedViews, ViewName } from "./controller";
import { renderGaugeSvg } from "./gauge";
import type { MapViewModel } from "./views/map";

const FILL_COLORS = ["#f4f1ea", "#fee8c8", "#fdd49e", "#fdbb84", "#fc8d59",
  "#ef6548", "#d7301f", "#990000"];

function el(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node;
}

function mapSvg(model: MapViewModel, onSite: (siteId: string) => void): SVGSVGElement {
  const svg = document.createElementNS("http://www.w3.org/2000/svg", "svg");
  const xs = model.sites.flatMap((s) =>
    [...s.path.matchAll(/[ML]([-\d.]+),([-\d.]+)/g)].map((m) => Number(m[1])));
  const ys = model.sites.flatMap((s) =>
    [...s.path.matchAll(/[ML]([-\d.]+),([-\d.]+)/g)].map((m) => Number(m[2])));
  const pad = 0.001;
  const minX = Math.min(...xs) - pad;
  const minY = Math.min(...ys) - pad;
  svg.setAttribute("viewBox", `${minX} ${minY} ${Math.max(...xs) - minX + pad} ${Math.max(...ys) - minY + pad}`);
  svg.setAttribute("class", "map");
  for (const site of model.sites) {
    const path = document.createElementNS("http://www.w3.org/2000/svg", "path");
    path.setAttribute("d", site.path);
    path.setAttribute("fill", FILL_COLORS[site.fillClass]);
    path.setAttribute("class",
      `site${site.inRegion ? " in-region" : ""}${site.highlighted ? " highlighted" : ""}`);
    path.addEventListener("click", () => onSite(site.siteId));
    svg.appendChild(path);
  }
  return svg;
}

async function boot(): Promise<void> {
  let controllerRef: LinkedViews | null = null;
  const client = new HttpClient("", () => controllerRef?.state.sessionId ?? null);
  const controller: LinkedViews = new LinkedViews(client);
  controllerRef = controller;

  const renderers: Record<ViewName, () => void> = {
    map: () => {
      const model = controller.viewModels().map;
      const host = el("map-view");
      host.replaceChildren();
      if (model) {
        host.appendChild(mapSvg(model, (siteId) => {
          void controller.selectSite(
            controller.state.selectedSite === siteId ? null : siteId);
        }));
      }
    },
    hotspot: () => {
      const model = controller.viewModels().hotspot;
      const host = el("hotspot-view");
      host.replaceChildren();
      for (const card of model.cards) {
        const div = document.createElement("div");
        div.className = `hotspot-card${card.noise ? " noise" : ""}${card.selected ? " selected" : ""}`;
        div.innerHTML = `<header>hotspot ${card.index + 1}</header>` +
          renderGaugeSvg(card.gauge) +
          `<footer>${card.memberSites.join(", ") || "(noise)"}</footer>`;
        div.addEventListener("click", () => {
          void controller.selectHotspot(card.selected ? null : card.index);
        });
        host.appendChild(div);
      }
    },
    global: () => {
      const model = controller.viewModels().global;
      const host = el("global-view");
      host.replaceChildren();
      if (!model) return;
      const svg = document.createElementNS("http://www.w3.org/2000/svg", "svg");
      svg.setAttribute("viewBox", "0 0 1 1");
      svg.setAttribute("preserveAspectRatio", "none");
      svg.setAttribute("class", "global-chart");
      const path = document.createElementNS("http://www.w3.org/2000/svg", "path");
      path.setAttribute("d", model.areaPath);
      path.setAttribute("class", "area");
      svg.appendChild(path);
      host.appendChild(svg);
    },
    cumulative: () => {
      const model = controller.viewModels().cumulative;
      const host = el("cumulative-view");
      host.replaceChildren();
      if (!model) return;
      for (const group of [model.byMonth, model.byWeekday, model.byPeriod]) {
        const peak = Math.max(1, ...group.map((b) => b.base));
        const block = document.createElement("div");
        block.className = "bar-group";
        for (const bar of group) {
          const column = document.createElement("div");
          column.className = "bar";
          column.title = `${bar.label}: ${bar.base} (filtered ${bar.overlay})`;
          column.innerHTML =
            `<span class="base" style="height:${(60 * bar.base / peak).toFixed(1)}px"></span>` +
            `<span class="overlay" style="height:${(60 * bar.overlay / peak).toFixed(1)}px"></span>`;
          block.appendChild(column);
        }
        host.appendChild(block);
      }
    },
    ranking: () => {
      const model = controller.viewModels().ranking;
      const host = el("ranking-view");
      host.replaceChildren();
      if (!model || !model.lines.length) return;
      const svg = document.createElementNS("http://www.w3.org/2000/svg", "svg");
      const n = Math.max(model.labels.length - 1, 1);
      svg.setAttribute("viewBox", `0 0 100 ${10 * (model.topCount + 1)}`);
      svg.setAttribute("class", "ranking-chart");
      model.lines.forEach((line, i) => {
        for (let j = 1; j < line.points.length; j++) {
          const a = line.points[j - 1];
          const b = line.points[j];
          const seg = document.createElementNS("http://www.w3.org/2000/svg", "line");
          seg.setAttribute("x1", String((100 * a.slice) / n));
          seg.setAttribute("y1", String(10 * a.rank));
          seg.setAttribute("x2", String((100 * b.slice) / n));
          seg.setAttribute("y2", String(10 * b.rank));
          seg.setAttribute("stroke-width", String(b.width / 4));
          seg.setAttribute("class", `rank-line type-${i}`);
          svg.appendChild(seg);
        }
      });
      host.appendChild(svg);
    },
    radial: () => {
      const model = controller.viewModels().radial;
      const host = el("radial-view");
      host.replaceChildren();
      if (!model) return;
      for (const chart of model.charts) {
        const div = document.createElement("div");
        div.className = `radial-chart${chart.dashed ? " dashed" : ""}`;
        const svg = [`<svg viewBox="-55 -55 110 110">`];
        const sectorSpan = (2 * Math.PI) / model.years.length;
        chart.sectors.forEach((sector, s) => {
          sector.bars.forEach((height, m) => {
            const angle = s * sectorSpan + (m / 12) * sectorSpan - Math.PI / 2;
            const r0 = 14;
            const r1 = r0 + 36 * height;
            const x0 = (r0 * Math.cos(angle)).toFixed(1);
            const y0 = (r0 * Math.sin(angle)).toFixed(1);
            const x1 = (r1 * Math.cos(angle)).toFixed(1);
            const y1 = (r1 * Math.sin(angle)).toFixed(1);
            svg.push(`<line x1="${x0}" y1="${y0}" x2="${x1}" y2="${y1}" class="radial-bar"/>`);
          });
        });
        svg.push(`</svg>`);
        div.innerHTML = `<header>${chart.shareLabel} ${chart.type}</header>` + svg.join("");
        div.addEventListener("click", () => void controller.selectRadialType(chart.type));
        host.appendChild(div);
      }
    },
    filterWidget: () => {
      const model = controller.viewModels().filterWidget;
      const host = el("filter-widget");
      host.replaceChildren();
      if (!model) return;
      for (const [bars, toggle] of [
        [model.years, (label: string) => void controller.toggleYear(Number(label))],
        [model.types, (label: string) => void controller.toggleType(label)],
      ] as const) {
        const block = document.createElement("div");
        block.className = "filter-histogram";
        const peak = Math.max(1, ...bars.map((b) => b.count));
        for (const bar of bars) {
          const button = document.createElement("button");
          button.className = `filter-bar${bar.excluded ? " excluded" : ""}`;
          button.title = `${bar.label}: ${bar.count}`;
          button.innerHTML =
            `<span style="height:${(40 * bar.count / peak).toFixed(1)}px"></span>` +
            `<label>${bar.label}</label>`;
          button.addEventListener("click", () => toggle(bar.label));
          block.appendChild(button);
        }
        host.appendChild(block);
      }
    },
  };

  controller.subscribe((changed) => {
    for (const view of changed) renderers[view]();
  });

  await controller.init();

  el("draw-polygon").addEventListener("click", () => {
    // demo drawing: a rectangle over the whole dataset extent
    const features = controller.cache.meta?.geometry.features ?? [];
    const coords = features.flatMap((f) =>
      (f.geometry.type === "Polygon" ? (f.geometry.coordinates as number[][][]) : [])
        .flat());
    const lons = coords.map((c) => c[0]);
    const lats = coords.map((c) => c[1]);
    const ring = [
      [Math.min(...lons) - 1e-3, Math.min(...lats) - 1e-3],
      [Math.max(...lons) + 1e-3, Math.min(...lats) - 1e-3],
      [Math.max(...lons) + 1e-3, Math.max(...lats) + 1e-3],
      [Math.min(...lons) - 1e-3, Math.max(...lats) + 1e-3],
    ];
    void controller.selectRegion({ mode: "polygon", geometry: ring });
  });
  el("recompute").addEventListener("click", () => {
    const k = Number((el("rank-input") as HTMLInputElement).value || "3");
    void controller.recompute(k);
  });
}

void boot();
