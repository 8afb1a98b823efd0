"""Figure spec files: sectioned key=value text describing panels and series.

Example::

    [figure]
    output = fig2b.png
    rows = 3
    cols = 1

    [panel.1]
    title = N = 1
    xlabel = time (us)
    ylabel = ground phase (rad)
    series1 = runs/fig2b/trace_N1.csv : t_us : ground_phase_rad : N=1

Series values are "csv_path : x_column : y_column : label".  Relative CSV
paths resolve against a data root (the spec file's directory by default).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path


class SpecError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


@dataclass
class Series:
    csv_path: str
    x_column: str
    y_column: str
    label: str = ""


@dataclass
class Panel:
    title: str = ""
    xlabel: str = ""
    ylabel: str = ""
    logy: bool = False
    series: list[Series] = field(default_factory=list)


@dataclass
class FigureSpec:
    output: str
    rows: int
    cols: int
    title: str = ""
    panels: list[Panel] = field(default_factory=list)


_FIGURE_KEYS = {"output", "rows", "cols", "title"}
_PANEL_KEYS = {"title", "xlabel", "ylabel", "logy"}
_PANEL_RE = re.compile(r"panel\.(\d+)$")
_SERIES_RE = re.compile(r"series(\d+)$")


def parse_spec(text: str) -> FigureSpec:
    figure: dict[str, str] = {}
    panels: dict[int, Panel] = {}
    current: tuple[str, int | None] | None = None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip()
            if name == "figure":
                current = ("figure", None)
                continue
            match = _PANEL_RE.match(name)
            if match:
                k = int(match.group(1))
                panels.setdefault(k, Panel())
                current = ("panel", k)
                continue
            raise SpecError(f"unknown section [{name}]", lineno)
        if "=" not in line:
            raise SpecError(f"expected key = value, got {line!r}", lineno)
        if current is None:
            raise SpecError("key outside any [section]", lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if current[0] == "figure":
            if key not in _FIGURE_KEYS:
                raise SpecError(f"unknown key {key!r} in [figure]", lineno)
            figure[key] = value
        else:
            panel = panels[current[1]]
            if _SERIES_RE.match(key):
                parts = [p.strip() for p in value.split(":")]
                if len(parts) < 3:
                    raise SpecError(
                        "series expects 'csv : xcol : ycol[ : label]'", lineno)
                panel.series.append(Series(parts[0], parts[1], parts[2],
                                           parts[3] if len(parts) > 3 else ""))
            elif key in _PANEL_KEYS:
                if key == "logy":
                    panel.logy = value.lower() in ("true", "yes", "on", "1")
                else:
                    setattr(panel, key, value)
            else:
                raise SpecError(f"unknown key {key!r} in a panel section",
                                lineno)

    if "output" not in figure:
        raise SpecError("missing required key 'output' in [figure]")
    if not panels:
        raise SpecError("spec defines no panels")
    ordered = [panels[k] for k in sorted(panels)]
    for k, panel in zip(sorted(panels), ordered):
        if not panel.series:
            raise SpecError(f"panel {k} has no series")
    rows = int(figure.get("rows", len(ordered)))
    cols = int(figure.get("cols", 1))
    if rows * cols < len(ordered):
        raise SpecError(f"layout {rows}x{cols} cannot hold "
                        f"{len(ordered)} panels")
    return FigureSpec(output=figure["output"], rows=rows, cols=cols,
                      title=figure.get("title", ""), panels=ordered)


def load_spec(path: str | Path) -> FigureSpec:
    return parse_spec(Path(path).read_text())
