"""
grid_builder.py
====================================
Entity grids and dialogue-act grids. Rows are turns or DA units, columns are
entities in order of first appearance; cells hold a role, a presence mark or
a DA tag, with "-" for absent entities.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import pandas as pd

from utility.dialogue import ABSENT, ROLE_PRECEDENCE, Dialogue, Role, Tagset
from utility.errors import ConfigError, GridError

NO_ENTITIES = "no_entities"
ALL_DAS = "all_das"

class RowUnit(str, Enum):
    TURN = "Turn"
    DA_UNIT = "DAUnit"

class CellVocab(str, Enum):
    ROLE = "Role"
    PRESENCE = "Presence"
    DA = "DA"

@dataclass(frozen=True)
class GridSpec:
    row_unit: RowUnit
    cell_vocab: CellVocab
    only_das: bool = False
    tagset: Optional[Tagset] = None

    def __post_init__(self):
        if self.cell_vocab == CellVocab.DA:
            if self.tagset is None:
                raise ConfigError("DA cells need a tagset")
            if self.row_unit != RowUnit.DA_UNIT:
                raise ConfigError("DA cells need DA-unit rows")
        if self.only_das and self.cell_vocab != CellVocab.DA:
            raise ConfigError("Only-DAs grids use DA cells")

    @property
    def tagset_id(self) -> Optional[str]:
        return self.tagset.tagset_id if self.tagset is not None else None

    @property
    def has_no_entities_column(self) -> bool:
        return self.cell_vocab == CellVocab.DA and not self.only_das

@dataclass(frozen=True)
class Grid:
    rows: Tuple[str, ...]
    columns: Tuple[str, ...]
    cells: Tuple[Tuple[str, ...], ...]
    spec: GridSpec

    @property
    def shape(self) -> Tuple[int, int]:
        return len(self.rows), len(self.columns)

    def column(self, name: str) -> Tuple[str, ...]:
        j = self.columns.index(name)
        return tuple(row[j] for row in self.cells)

def make_grid_spec(model_name: str, tagset: Optional[Tagset] = None) -> GridSpec:
    """GridSpec of one of the five single-grid models"""
    if model_name == "T-Grid:role":
        return GridSpec(RowUnit.TURN, CellVocab.ROLE, tagset=tagset)
    elif model_name == "T-Grid:presence":
        return GridSpec(RowUnit.TURN, CellVocab.PRESENCE, tagset=tagset)
    elif model_name == "D-Grid:role":
        return GridSpec(RowUnit.DA_UNIT, CellVocab.ROLE, tagset=tagset)
    elif model_name == "D-Grid:DA":
        return GridSpec(RowUnit.DA_UNIT, CellVocab.DA, tagset=tagset)
    elif model_name == "Only-DAs":
        return GridSpec(RowUnit.DA_UNIT, CellVocab.DA, only_das=True, tagset=tagset)
    else:
        raise ConfigError(f"{model_name!r} is not a single-grid model")

def most_prominent_role(roles: Iterable[Role]) -> Role:
    """S beats O beats X"""
    roles = set(Role(r) for r in roles)
    if not roles:
        raise GridError("most_prominent_role needs at least one role")
    for role in ROLE_PRECEDENCE:
        if role in roles:
            return role

def _spans(d: Dialogue, spec: GridSpec) -> List[Tuple[str, list, Optional[str]]]:
    if spec.row_unit == RowUnit.TURN:
        return [(f"t{i + 1}", list(turn.mentions), None) for i, turn in enumerate(d.turns)]
    return [(f"da{i + 1}", list(unit.mentions), unit.da_tag) for i, unit in enumerate(d.units)]

def build_grid(d: Dialogue, spec: GridSpec) -> Grid:
    """
    Builds the grid of a dialogue
    :param d: a valid dialogue
    :param spec: grid construction parameters
    :return: the grid
    """
    if spec.tagset is not None and d.tagset_id != spec.tagset_id:
        raise GridError(f"{d.dialogue_id}: tagset {d.tagset_id!r} does not match {spec.tagset_id!r}")
    spans = _spans(d, spec)
    rows = tuple(label for label, _, _ in spans)

    if spec.only_das:
        return Grid(rows, (ALL_DAS,), tuple((tag,) for _, _, tag in spans), spec)

    entities = d.entity_ids()
    columns = tuple(entities) + ((NO_ENTITIES,) if spec.has_no_entities_column else ())
    cells = []
    for _, mentions, da_tag in spans:
        roles: Dict[str, List[Role]] = {}
        for mention in mentions:
            roles.setdefault(mention.entity_id, []).append(mention.role)
        row = []
        for entity in entities:
            if entity not in roles:
                row.append(ABSENT)
            elif spec.cell_vocab == CellVocab.ROLE:
                row.append(most_prominent_role(roles[entity]).value)
            elif spec.cell_vocab == CellVocab.PRESENCE:
                row.append(Role.X.value)
            else:
                row.append(da_tag)
        if spec.has_no_entities_column:
            row.append(da_tag if not mentions else ABSENT)
        cells.append(tuple(row))
    return Grid(rows, columns, tuple(cells), spec)

def grid_to_frame(g: Grid) -> pd.DataFrame:
    return pd.DataFrame(list(g.cells), index=list(g.rows), columns=list(g.columns))

def grid_to_text(g: Grid) -> str:
    """Plain-text table in the usual grid layout"""
    if not g.columns:
        return "\n".join(g.rows)
    return grid_to_frame(g).to_string()

def grid_to_json(g: Grid) -> dict:
    return {"rows": list(g.rows), "columns": list(g.columns), "cells": [list(row) for row in g.cells]}

def grid_from_json(raw: dict, spec: GridSpec) -> Grid:
    rows, columns = tuple(raw["rows"]), tuple(raw["columns"])
    cells = tuple(tuple(row) for row in raw["cells"])
    if len(cells) != len(rows) or any(len(row) != len(columns) for row in cells):
        raise GridError(f"Grid cells do not match {len(rows)}x{len(columns)}")
    return Grid(rows, columns, cells, spec)
