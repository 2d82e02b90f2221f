"""Deterministic SVG and plain-text views of a composite explanation.

The state space is laid out as a lattice of small grids: two factors become
the cell axes of each grid, the remaining factors index the panel rows and
columns.  Element order, coordinates and colors are fully determined by the
explanation document, so repeated renders are byte-identical.
"""

from __future__ import annotations

from dataclasses import dataclass
from xml.sax.saxutils import escape

from .errors import RenderSchemaError
from .factored_space import factorization_from_dict
from .search import EXPLANATION_SCHEMA

# Fixed per-action-id palette (cycled past the end).  Index order matches the
# built-in Taxi actions, giving South=blue, North=orange, East=green,
# West=pink, Pickup=brown, Dropoff=purple.
PALETTE = (
    "#4e79a7",  # blue
    "#f28e2b",  # orange
    "#59a14f",  # green
    "#e377c2",  # pink
    "#8c564b",  # brown
    "#9467bd",  # purple
    "#e15759",  # red
    "#76b7b2",  # teal
)

BOUNDARY_FILL = "#d9d9d9"
EMPTY_FILL = "#ffffff"
GRID_STROKE = "#bbbbbb"

CELL = 20
PANEL_GAP = 14
MARGIN_LEFT = 92
MARGIN_TOP = 56
LEGEND_H = 26

_DIR_GLYPHS = {0: "→", 1: "↓", 2: "←", 3: "↑"}


def action_color(action):
    return PALETTE[action % len(PALETTE)]


@dataclass(frozen=True)
class PanelLayout:
    """Which factor indices form the cell axes and the panel axes."""

    x_factor: int
    y_factor: int | None
    panel_row_factors: tuple
    panel_col_factors: tuple


_TAXI_NAMES = ("row", "col", "P", "D")
_MINIGRID_NAMES = ("agent_x", "agent_y", "dir", "goal_x", "goal_y")

# Landmark letters at (x, y) grid coordinates of every Taxi panel.
_TAXI_GLYPHS = {(0, 0): "R", (4, 0): "G", (0, 4): "Y", (3, 4): "B"}


def layout_for(factorization) -> PanelLayout:
    names = factorization.names
    if names == _TAXI_NAMES:
        return PanelLayout(x_factor=1, y_factor=0,
                           panel_row_factors=(2,), panel_col_factors=(3,))
    if names == _MINIGRID_NAMES:
        return PanelLayout(x_factor=0, y_factor=1,
                           panel_row_factors=(2,), panel_col_factors=(3, 4))
    if len(names) == 1:
        return PanelLayout(0, None, (), ())
    rest = tuple(range(2, len(names)))
    return PanelLayout(0, 1, rest[: len(rest) // 2], rest[len(rest) // 2:])


def _check_schema(doc):
    if not isinstance(doc, dict) or doc.get("schema") != EXPLANATION_SCHEMA:
        raise RenderSchemaError(
            f"expected a {EXPLANATION_SCHEMA} document, got "
            f"{doc.get('schema') if isinstance(doc, dict) else type(doc).__name__!r}"
        )


def classify_states(doc):
    """Map each referenced state to (category, action)."""
    _check_schema(doc)
    cells = {}
    for m in doc["boundary"]:
        cells[tuple(m["state"])] = ("boundary", m["action"])
    for m in doc["counterfactuals"]["members"]:
        cells[tuple(m["state"])] = ("cf", m["action"])
    for s in doc["region"]["states"]:
        cells[tuple(s)] = ("region", doc["seed_action"])
    cells[tuple(doc["seed"])] = ("seed", doc["seed_action"])
    return cells


def _action_names(doc, action_names):
    if action_names is not None:
        return lambda a: action_names[a] if 0 <= a < len(action_names) else f"a{a}"
    embedded = {}
    for m in list(doc["counterfactuals"]["members"]) + list(doc["boundary"]):
        if "action_name" in m:
            embedded[m["action"]] = m["action_name"]
    if "seed_action_name" in doc:
        embedded[doc["seed_action"]] = doc["seed_action_name"]
    return lambda a: embedded.get(a, f"a{a}")


def _combos(factors, indices):
    """All value tuples over the chosen factor indices, domain order."""
    combos = [()]
    for i in indices:
        combos = [c + (v,) for c in combos for v in factors[i].domain]
    return combos


def _combo_label(names, indices, values):
    return ",".join(f"{names[i]}={v}" for i, v in zip(indices, values))


def render_svg(doc, action_names=None) -> str:
    """Lattice-of-grids SVG; stable element order makes output reproducible."""
    _check_schema(doc)
    f = factorization_from_dict(doc["factorization"])
    layout = layout_for(f)
    name_of = _action_names(doc, action_names)
    cells = classify_states(doc)
    factors = f.factors
    names = f.names

    x_dom = factors[layout.x_factor].domain
    y_dom = factors[layout.y_factor].domain if layout.y_factor is not None else (0,)
    nx, ny = len(x_dom), len(y_dom)
    row_combos = _combos(factors, layout.panel_row_factors)
    col_combos = _combos(factors, layout.panel_col_factors)
    panel_w, panel_h = nx * CELL, ny * CELL
    width = MARGIN_LEFT + len(col_combos) * (panel_w + PANEL_GAP)
    height = MARGIN_TOP + len(row_combos) * (panel_h + PANEL_GAP) + LEGEND_H

    glyphs_for = None
    if names == _TAXI_NAMES:
        glyphs_for = lambda col_vals: _TAXI_GLYPHS
    elif names == _MINIGRID_NAMES:
        glyphs_for = lambda col_vals: {(col_vals[0] - 1, col_vals[1] - 1): "G"}

    seed = tuple(doc["seed"])
    seed_desc = ",".join(str(v) for v in seed)
    title = (f"{doc['mode']} explanation | seed ({seed_desc}) | "
             f"action {name_of(doc['seed_action'])} | "
             f"region {doc['region']['size']} states")

    out = []
    out.append('<?xml version="1.0" encoding="UTF-8"?>')
    out.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}" '
        f'font-family="monospace" font-size="11">'
    )
    out.append(f'<rect x="0" y="0" width="{width}" height="{height}" fill="#ffffff"/>')
    out.append(f'<text x="{MARGIN_LEFT}" y="18" font-size="13">{escape(title)}</text>')

    for ci, cv in enumerate(col_combos):
        label = _combo_label(names, layout.panel_col_factors, cv)
        if label:
            cx = MARGIN_LEFT + ci * (panel_w + PANEL_GAP)
            out.append(f'<text x="{cx}" y="{MARGIN_TOP - 8}" font-size="9">'
                       f'{escape(label)}</text>')
    for ri, rv in enumerate(row_combos):
        label = _combo_label(names, layout.panel_row_factors, rv)
        if label:
            ry = MARGIN_TOP + ri * (panel_h + PANEL_GAP) + panel_h // 2
            out.append(f'<text x="6" y="{ry}" font-size="9">{escape(label)}</text>')

    def state_at(xv, yv, rv, cv):
        values = [None] * len(factors)
        values[layout.x_factor] = xv
        if layout.y_factor is not None:
            values[layout.y_factor] = yv
        for i, v in zip(layout.panel_row_factors, rv):
            values[i] = v
        for i, v in zip(layout.panel_col_factors, cv):
            values[i] = v
        return tuple(values)

    for ri, rv in enumerate(row_combos):
        py = MARGIN_TOP + ri * (panel_h + PANEL_GAP)
        for ci, cv in enumerate(col_combos):
            px = MARGIN_LEFT + ci * (panel_w + PANEL_GAP)
            glyphs = glyphs_for(cv) if glyphs_for else {}
            for yi, yv in enumerate(y_dom):
                for xi, xv in enumerate(x_dom):
                    s = state_at(xv, yv, rv, cv)
                    category, action = cells.get(s, (None, None))
                    if category in ("region", "seed"):
                        fill = action_color(doc["seed_action"])
                    elif category == "cf":
                        fill = action_color(action)
                    elif category == "boundary":
                        fill = BOUNDARY_FILL
                    else:
                        fill = EMPTY_FILL
                    x, y = px + xi * CELL, py + yi * CELL
                    out.append(
                        f'<rect x="{x}" y="{y}" width="{CELL}" height="{CELL}" '
                        f'fill="{fill}" stroke="{GRID_STROKE}" stroke-width="1"/>'
                    )
                    if category == "cf":
                        out.append(
                            f'<path d="M{x + 4} {y + 4} L{x + CELL - 4} '
                            f'{y + CELL - 4} M{x + CELL - 4} {y + 4} L{x + 4} '
                            f'{y + CELL - 4}" stroke="#000000" stroke-width="2"/>'
                        )
                    if category == "seed":
                        glyph = "S"
                        if names == _MINIGRID_NAMES:
                            glyph = _DIR_GLYPHS.get(s[2], "S")
                        out.append(
                            f'<text x="{x + CELL // 2}" y="{y + CELL // 2 + 4}" '
                            f'text-anchor="middle" font-weight="bold" '
                            f'fill="#ffffff">{escape(glyph)}</text>'
                        )
                    elif (xi, yi) in glyphs:
                        out.append(
                            f'<text x="{x + CELL - 6}" y="{y + 9}" font-size="7" '
                            f'fill="#555555">{escape(glyphs[(xi, yi)])}</text>'
                        )

    legend_actions = sorted(
        {doc["seed_action"]}
        | {m["action"] for m in doc["counterfactuals"]["members"]}
        | {m["action"] for m in doc["boundary"]}
    )
    ly = height - LEGEND_H + 6
    lx = MARGIN_LEFT
    for a in legend_actions:
        out.append(f'<rect x="{lx}" y="{ly}" width="12" height="12" '
                   f'fill="{action_color(a)}" stroke="{GRID_STROKE}"/>')
        out.append(f'<text x="{lx + 16}" y="{ly + 10}" font-size="10">'
                   f'{escape(name_of(a))}</text>')
        lx += 16 + 9 * max(2, len(name_of(a)))
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render_text(doc, action_names=None) -> str:
    """Terminal fallback: one ASCII grid per panel that contains anything."""
    _check_schema(doc)
    f = factorization_from_dict(doc["factorization"])
    layout = layout_for(f)
    name_of = _action_names(doc, action_names)
    cells = classify_states(doc)
    factors = f.factors
    names = f.names

    x_dom = factors[layout.x_factor].domain
    y_dom = factors[layout.y_factor].domain if layout.y_factor is not None else (0,)
    row_combos = _combos(factors, layout.panel_row_factors)
    col_combos = _combos(factors, layout.panel_col_factors)

    marks = {"seed": "S", "region": "#", "cf": "X", "boundary": "o"}
    seed_desc = ",".join(str(v) for v in doc["seed"])
    lines = [
        f"{doc['mode']} explanation | seed ({seed_desc}) | "
        f"action {name_of(doc['seed_action'])}",
        f"region {doc['region']['size']} states | "
        f"min cf distance {doc['counterfactuals']['min_distance']} | "
        f"cf count {doc['counterfactuals']['count']}",
        "legend: S seed, # region, X minimal cf, o boundary, . empty",
    ]
    skipped = 0
    for rv in row_combos:
        for cv in col_combos:
            grid = []
            occupied = False
            for yv in y_dom:
                row_marks = []
                for xv in x_dom:
                    values = [None] * len(factors)
                    values[layout.x_factor] = xv
                    if layout.y_factor is not None:
                        values[layout.y_factor] = yv
                    for i, v in zip(layout.panel_row_factors, rv):
                        values[i] = v
                    for i, v in zip(layout.panel_col_factors, cv):
                        values[i] = v
                    category, _ = cells.get(tuple(values), (None, None))
                    row_marks.append(marks.get(category, "."))
                    occupied = occupied or category is not None
                grid.append(" ".join(row_marks))
            if not occupied:
                skipped += 1
                continue
            label = ",".join(
                part for part in (
                    _combo_label(names, layout.panel_row_factors, rv),
                    _combo_label(names, layout.panel_col_factors, cv),
                ) if part
            )
            lines.append(f"[{label}]" if label else "[panel]")
            lines.extend("  " + g for g in grid)
    if skipped:
        lines.append(f"({skipped} empty panels not shown)")
    return "\n".join(lines) + "\n"
