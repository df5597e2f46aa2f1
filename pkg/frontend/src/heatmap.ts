/**
 * Heatmap rendering: x = reconfiguration delay (log-spaced columns),
 * y = message size (log-spaced rows, largest at the top), color = speedup
 * with 1.0 anchored at white and darker blue for larger values. A colorbar
 * on the right annotates the white anchor and the data maximum.
 */

import { Metric } from "./csv.js";
import { formatBytes, formatTimeNs, HeatmapGrid } from "./grid.js";
import { drawText, GLYPH_HEIGHT, textWidth } from "./font.js";
import { encodePng, Raster } from "./png.js";

const CELL = 48;
const MARGIN_LEFT = 64;
const MARGIN_TOP = 26;
const MARGIN_BOTTOM = 46;
const COLORBAR_WIDTH = 14;
const COLORBAR_GAP = 12;
const MARGIN_RIGHT = COLORBAR_GAP + COLORBAR_WIDTH + 44;

const INK: [number, number, number] = [40, 40, 40];
const DARKEST: [number, number, number] = [8, 48, 107];
export const WHITE: [number, number, number] = [255, 255, 255];

/**
 * Speedups at or below 1 are white; above 1 the shade deepens with
 * log(value)/log(max), which keeps order-of-magnitude spreads readable.
 */
export function speedupColor(value: number, max: number): [number, number, number] {
  if (!(value > 1) || !(max > 1)) {
    return WHITE;
  }
  const t = Math.min(1, Math.log(value) / Math.log(max));
  return [
    Math.round(WHITE[0] + (DARKEST[0] - WHITE[0]) * t),
    Math.round(WHITE[1] + (DARKEST[1] - WHITE[1]) * t),
    Math.round(WHITE[2] + (DARKEST[2] - WHITE[2]) * t),
  ];
}

function formatValue(value: number): string {
  if (value >= 100) return value.toFixed(0);
  if (value >= 10) return value.toFixed(1);
  return value.toFixed(2);
}

export function renderHeatmap(grid: HeatmapGrid): Raster {
  const columns = grid.alphaRNs.length;
  const rows = grid.msgBytes.length;
  const plotWidth = columns * CELL;
  const plotHeight = rows * CELL;
  const width = MARGIN_LEFT + plotWidth + MARGIN_RIGHT;
  const height = MARGIN_TOP + plotHeight + MARGIN_BOTTOM;
  const raster = new Raster(width, height);

  drawText(raster, MARGIN_LEFT, 8, grid.metric, INK);

  // Cells: row 0 (smallest message size) sits at the bottom.
  for (let yi = 0; yi < rows; yi++) {
    for (let xi = 0; xi < columns; xi++) {
      const value = grid.cells[yi][xi];
      const px = MARGIN_LEFT + xi * CELL;
      const py = MARGIN_TOP + (rows - 1 - yi) * CELL;
      raster.fillRect(px, py, CELL, CELL, speedupColor(value, grid.max));
    }
  }

  // Thin frame around the plot area.
  for (let x = MARGIN_LEFT - 1; x <= MARGIN_LEFT + plotWidth; x++) {
    raster.set(x, MARGIN_TOP - 1, INK);
    raster.set(x, MARGIN_TOP + plotHeight, INK);
  }
  for (let y = MARGIN_TOP - 1; y <= MARGIN_TOP + plotHeight; y++) {
    raster.set(MARGIN_LEFT - 1, y, INK);
    raster.set(MARGIN_LEFT + plotWidth, y, INK);
  }

  // X ticks: delay per column, centered under the cell.
  for (let xi = 0; xi < columns; xi++) {
    const label = formatTimeNs(grid.alphaRNs[xi]);
    const cx = MARGIN_LEFT + xi * CELL + CELL / 2;
    drawText(raster, Math.round(cx - textWidth(label) / 2), MARGIN_TOP + plotHeight + 6, label, INK);
  }
  const xTitle = "RECONFIG DELAY";
  drawText(
    raster,
    Math.round(MARGIN_LEFT + plotWidth / 2 - textWidth(xTitle) / 2),
    MARGIN_TOP + plotHeight + 6 + GLYPH_HEIGHT + 8,
    xTitle,
    INK,
  );

  // Y ticks: message size per row, right-aligned in the left margin.
  for (let yi = 0; yi < rows; yi++) {
    const label = formatBytes(grid.msgBytes[yi]);
    const cy = MARGIN_TOP + (rows - 1 - yi) * CELL + CELL / 2;
    drawText(raster, MARGIN_LEFT - 6 - textWidth(label), Math.round(cy - GLYPH_HEIGHT / 2), label, INK);
  }
  drawText(raster, 2, 8, "MSG SIZE", INK);

  // Colorbar: white (1.0) at the bottom to the data maximum at the top.
  const barX = MARGIN_LEFT + plotWidth + COLORBAR_GAP;
  for (let i = 0; i < plotHeight; i++) {
    const frac = 1 - i / (plotHeight - 1); // 1 at top
    const value = grid.max > 1 ? Math.exp(frac * Math.log(grid.max)) : 1;
    const rgb = speedupColor(value, grid.max);
    for (let x = barX; x < barX + COLORBAR_WIDTH; x++) {
      raster.set(x, MARGIN_TOP + i, rgb);
    }
  }
  for (let y = MARGIN_TOP - 1; y <= MARGIN_TOP + plotHeight; y++) {
    raster.set(barX - 1, y, INK);
    raster.set(barX + COLORBAR_WIDTH, y, INK);
  }
  for (let x = barX - 1; x <= barX + COLORBAR_WIDTH; x++) {
    raster.set(x, MARGIN_TOP - 1, INK);
    raster.set(x, MARGIN_TOP + plotHeight, INK);
  }
  const labelX = barX + COLORBAR_WIDTH + 4;
  drawText(raster, labelX, MARGIN_TOP - 1, formatValue(Math.max(grid.max, 1)), INK);
  drawText(raster, labelX, MARGIN_TOP + plotHeight - GLYPH_HEIGHT + 1, "1.00", INK);

  return raster;
}

export function renderToPng(grid: HeatmapGrid): Buffer {
  return encodePng(renderHeatmap(grid));
}

export function cellTopLeft(grid: HeatmapGrid, alphaRNs: number, msgBytes: number): [number, number] {
  const xi = grid.alphaRNs.indexOf(alphaRNs);
  const yi = grid.msgBytes.indexOf(msgBytes);
  if (xi < 0 || yi < 0) {
    throw new Error(`no cell at alpha_r_ns=${alphaRNs} msg_bytes=${msgBytes}`);
  }
  return [MARGIN_LEFT + xi * CELL, MARGIN_TOP + (grid.msgBytes.length - 1 - yi) * CELL];
}

export type { Metric };
