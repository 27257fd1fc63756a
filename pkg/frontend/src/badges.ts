/** Rendering-only mapping from server classifications to badge styling. */

import type { Classification } from "./types.js";

export const BADGE_COLORS: Record<Classification, string> = {
  BelowNormal: "#d97706", // amber
  Normal: "#16a34a", // green
  AboveNormal: "#dc2626", // red
};

export function badgeClass(classification: Classification): string {
  return {
    BelowNormal: "badge-below",
    Normal: "badge-normal",
    AboveNormal: "badge-above",
  }[classification];
}
