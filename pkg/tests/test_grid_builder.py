import pytest

from conftest import make_dialogue
from tools.grid_builder import (ALL_DAS, NO_ENTITIES, CellVocab, GridSpec, RowUnit, build_grid,
                                grid_from_json, grid_to_json, grid_to_text, make_grid_spec,
                                most_prominent_role)
from utility.dialogue import Role, Tagset
from utility.errors import ConfigError, GridError

ENTITIES = ("company", "drugs", "policy", "convictions", "clients")

def test_t_grid_role_matches_entity_grid(fig1_dialogue, fig1_tagset):
    g = build_grid(fig1_dialogue, make_grid_spec("T-Grid:role", fig1_tagset))
    assert g.shape == (5, 5)
    assert g.rows == ("t1", "t2", "t3", "t4", "t5")
    assert g.columns == ENTITIES
    assert g.cells == (
        ("S", "X", "-", "-", "-"),
        ("X", "S", "O", "X", "S"),
        ("-", "-", "-", "-", "-"),
        ("-", "-", "-", "-", "-"),
        ("-", "X", "-", "-", "-"),
    )

def test_d_grid_da_matches_modified_grid(fig1_dialogue, fig1_tagset):
    g = build_grid(fig1_dialogue, make_grid_spec("D-Grid:DA", fig1_tagset))
    assert g.shape == (8, 6)
    assert g.columns == ENTITIES + (NO_ENTITIES,)
    assert g.cells == (
        ("qy", "qy", "-", "-", "-", "-"),
        ("-", "na", "na", "-", "-", "-"),
        ("-", "-", "-", "-", "-", "sd^e"),
        ("sd", "sd", "sd", "sd", "sd", "-"),
        ("-", "-", "-", "-", "-", "%"),
        ("-", "-", "-", "-", "-", "qo"),
        ("-", "-", "-", "-", "-", "nn"),
        ("-", "sd^e", "-", "-", "-", "-"),
    )

def test_only_das_column(fig1_dialogue, fig1_tagset):
    g = build_grid(fig1_dialogue, make_grid_spec("Only-DAs", fig1_tagset))
    assert g.columns == (ALL_DAS,)
    assert g.column(ALL_DAS) == fig1_dialogue.da_tags
    assert g.column(ALL_DAS) == ("qy", "na", "sd^e", "sd", "%", "qo", "nn", "sd^e")

def test_d_grid_role_rows(fig1_dialogue, fig1_tagset):
    g = build_grid(fig1_dialogue, make_grid_spec("D-Grid:role", fig1_tagset))
    assert g.shape == (8, 5)
    assert g.cells[3] == ("X", "S", "O", "X", "S")
    assert g.cells[2] == ("-",) * 5

def test_presence_is_role_without_roles(fig1_dialogue, fig1_tagset):
    role = build_grid(fig1_dialogue, make_grid_spec("T-Grid:role", fig1_tagset))
    presence = build_grid(fig1_dialogue, make_grid_spec("T-Grid:presence", fig1_tagset))
    mapped = tuple(tuple("X" if c in ("S", "O", "X") else c for c in row) for row in role.cells)
    assert presence.cells == mapped

def test_no_entities_is_exclusive(fig1_dialogue, fig1_tagset):
    g = build_grid(fig1_dialogue, make_grid_spec("D-Grid:DA", fig1_tagset))
    for row, tag in zip(g.cells, fig1_dialogue.da_tags):
        entity_cells = row[:-1]
        assert (row[-1] != "-") == all(c == "-" for c in entity_cells)
        assert all(c in ("-", tag) for c in row)

def test_zero_entity_dialogue():
    tagset = Tagset("swbd-damsl-fig1", ("qy", "nn"))
    d = make_dialogue("empty", [[("qy", [])], [("nn", [])], [("qy", [])]])
    assert build_grid(d, make_grid_spec("T-Grid:presence", tagset)).shape == (3, 0)
    assert build_grid(d, make_grid_spec("D-Grid:DA", tagset)).shape == (3, 1)
    assert build_grid(d, make_grid_spec("Only-DAs", tagset)).shape == (3, 1)

def test_repeated_mentions_use_precedence():
    tagset = Tagset("swbd-damsl-fig1", ("sd",))
    d = make_dialogue("x", [[("sd", [("a", "X"), ("a", "O")]), ("sd", [("a", "X")])]])
    assert build_grid(d, make_grid_spec("T-Grid:role", tagset)).cells == (("O",),)
    assert build_grid(d, make_grid_spec("D-Grid:role", tagset)).cells == (("O",), ("X",))

@pytest.mark.parametrize("roles, expected", [
    ([Role.X, Role.O, Role.S], Role.S),
    ([Role.X], Role.X),
    ([Role.O, Role.X, Role.X, Role.O], Role.O),
])
def test_most_prominent_role(roles, expected):
    assert most_prominent_role(roles) == expected

def test_most_prominent_role_needs_input():
    with pytest.raises(GridError):
        most_prominent_role([])

def test_tagset_mismatch(fig1_dialogue):
    with pytest.raises(GridError):
        build_grid(fig1_dialogue, make_grid_spec("D-Grid:DA", Tagset("other", ("qy",))))

def test_inconsistent_specs():
    with pytest.raises(ConfigError):
        GridSpec(RowUnit.DA_UNIT, CellVocab.DA)
    with pytest.raises(ConfigError):
        GridSpec(RowUnit.TURN, CellVocab.DA, tagset=Tagset("t", ("qy",)))
    with pytest.raises(ConfigError):
        GridSpec(RowUnit.DA_UNIT, CellVocab.ROLE, only_das=True)
    with pytest.raises(ConfigError):
        make_grid_spec("T-Grid:role + Only DAs")

def test_grid_dumps(fig1_dialogue, fig1_tagset):
    spec = make_grid_spec("D-Grid:DA", fig1_tagset)
    g = build_grid(fig1_dialogue, spec)
    text = grid_to_text(g)
    assert "no_entities" in text and "da8" in text
    assert grid_from_json(grid_to_json(g), spec) == g
    with pytest.raises(GridError):
        grid_from_json({"rows": ["da1"], "columns": ["a", "b"], "cells": [["-"]]}, spec)
