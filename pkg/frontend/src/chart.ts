/** Minimal dependency-free SVG line chart for yearly prevalence series. */

export interface Series {
  label: string;
  points: { year: number; pct: number }[];
}

const WIDTH = 640;
const HEIGHT = 280;
const PAD = 40;
const COLORS = ["#2166ac", "#b2182b", "#1b7837", "#762a83"];

export function renderPrevalenceChart(series: Series[]): SVGSVGElement {
  const svg = document.createElementNS("http://www.w3.org/2000/svg", "svg");
  svg.setAttribute("viewBox", `0 0 ${WIDTH} ${HEIGHT}`);
  svg.setAttribute("class", "prevalence-chart");
  svg.setAttribute("role", "img");

  const points = series.flatMap((s) => s.points);
  if (points.length === 0) return svg;
  const years = points.map((p) => p.year);
  const minYear = Math.min(...years);
  const maxYear = Math.max(...years);
  const x = (year: number): number =>
    maxYear === minYear
      ? WIDTH / 2
      : PAD + ((year - minYear) / (maxYear - minYear)) * (WIDTH - 2 * PAD);
  const y = (pct: number): number => HEIGHT - PAD - (pct / 100) * (HEIGHT - 2 * PAD);

  const axis = document.createElementNS(svg.namespaceURI, "path");
  axis.setAttribute(
    "d",
    `M ${PAD} ${PAD} L ${PAD} ${HEIGHT - PAD} L ${WIDTH - PAD} ${HEIGHT - PAD}`,
  );
  axis.setAttribute("class", "axis");
  axis.setAttribute("fill", "none");
  axis.setAttribute("stroke", "#555");
  svg.append(axis);

  series.forEach((s, idx) => {
    const color = COLORS[idx % COLORS.length];
    const sorted = [...s.points].sort((a, b) => a.year - b.year);
    if (sorted.length > 1) {
      const path = document.createElementNS(svg.namespaceURI, "path");
      path.setAttribute(
        "d",
        sorted
          .map((p, i) => `${i === 0 ? "M" : "L"} ${x(p.year)} ${y(p.pct)}`)
          .join(" "),
      );
      path.setAttribute("class", `series series-${idx}`);
      path.setAttribute("data-label", s.label);
      path.setAttribute("fill", "none");
      path.setAttribute("stroke", color);
      path.setAttribute("stroke-width", "2");
      svg.append(path);
    }
    for (const p of sorted) {
      const dot = document.createElementNS(svg.namespaceURI, "circle");
      dot.setAttribute("cx", String(x(p.year)));
      dot.setAttribute("cy", String(y(p.pct)));
      dot.setAttribute("r", "3");
      dot.setAttribute("fill", color);
      dot.setAttribute("class", `point point-${idx}`);
      dot.setAttribute("data-year", String(p.year));
      dot.setAttribute("data-pct", String(p.pct));
      svg.append(dot);
    }
    const label = document.createElementNS(svg.namespaceURI, "text");
    label.setAttribute("x", String(WIDTH - PAD));
    label.setAttribute("y", String(PAD + 16 * idx));
    label.setAttribute("text-anchor", "end");
    label.setAttribute("fill", color);
    label.setAttribute("class", "legend");
    label.textContent = s.label;
    svg.append(label);
  });
  return svg;
}
