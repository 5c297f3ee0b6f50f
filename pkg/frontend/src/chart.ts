/** SVG rendering of the chart model built in view.ts. */

import type { ChartModel } from "./view.js";

const APPLIANCE_COLORS: Record<string, string> = {
  washing_machine: "#2f7fd1",
  dishwasher: "#2fa86b",
  ev_charger: "#8a5fd3",
};

function escapeXml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function renderChartSvg(model: ChartModel): string {
  const parts: string[] = [];
  parts.push(
    `<svg viewBox="0 0 ${model.width} ${model.height}" width="100%" ` +
      `role="img" aria-label="price curve with schedule overlays" ` +
      `xmlns="http://www.w3.org/2000/svg">`,
  );
  parts.push(
    `<rect class="max-window-band" data-start-slot="${model.band.startSlot}" ` +
      `data-end-slot="${model.band.endSlot}" x="${model.band.x.toFixed(1)}" y="0" ` +
      `width="${model.band.width.toFixed(1)}" height="180" fill="#d64545" opacity="0.25"/>`,
  );
  parts.push(
    `<path d="${model.pricePath}" fill="none" stroke="#28415c" stroke-width="1.5"/>`,
  );
  for (const label of model.yLabels) {
    parts.push(
      `<text x="4" y="${(label.y - 3).toFixed(1)}" class="axis-label">${escapeXml(label.text)}</text>`,
    );
  }
  for (const bar of model.bars) {
    const color = APPLIANCE_COLORS[bar.overlay.applianceId] ?? "#777";
    parts.push(
      `<rect class="schedule-bar" data-appliance="${escapeXml(bar.overlay.applianceId)}" ` +
        `x="${bar.x.toFixed(1)}" y="${bar.y.toFixed(1)}" width="${bar.width.toFixed(1)}" ` +
        `height="${bar.height}" rx="3" fill="${color}"><title>${escapeXml(bar.overlay.label)}</title></rect>`,
    );
    parts.push(
      `<text x="${(bar.x + bar.width + 6).toFixed(1)}" y="${(bar.y + bar.height - 4).toFixed(1)}" ` +
        `class="bar-label">${escapeXml(bar.overlay.applianceId)}</text>`,
    );
  }
  for (const label of model.xLabels) {
    parts.push(
      `<text x="${label.x.toFixed(1)}" y="${model.height - 6}" class="axis-label">` +
        `${escapeXml(label.text)}</text>`,
    );
  }
  parts.push("</svg>");
  return parts.join("");
}
