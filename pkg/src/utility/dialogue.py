"""
dialogue.py
====================================
Annotated-dialogue data model and validation.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from utility.errors import TaskError

ABSENT = "-"

class Role(str, Enum):
    """Grammatical role of an entity mention, ordered by prominence"""
    S = "S"
    O = "O"
    X = "X"

ROLE_PRECEDENCE = (Role.S, Role.O, Role.X)

def normalize_entity(entity: str) -> str:
    return entity.strip().lower()

@dataclass(frozen=True)
class EntityMention:
    entity_id: str
    role: Role
    surface: str = ""

@dataclass(frozen=True)
class DAUnit:
    da_tag: str
    text: str = ""
    mentions: Tuple[EntityMention, ...] = ()

@dataclass(frozen=True)
class Turn:
    speaker: str
    units: Tuple[DAUnit, ...]

    @property
    def mentions(self) -> Tuple[EntityMention, ...]:
        return tuple(m for unit in self.units for m in unit.mentions)

@dataclass(frozen=True)
class Dialogue:
    dialogue_id: str
    turns: Tuple[Turn, ...]
    tagset_id: str

    def __len__(self) -> int:
        return len(self.turns)

    @property
    def units(self) -> Tuple[DAUnit, ...]:
        return tuple(unit for turn in self.turns for unit in turn.units)

    @property
    def da_tags(self) -> Tuple[str, ...]:
        return tuple(unit.da_tag for unit in self.units)

    def entity_ids(self) -> List[str]:
        """Distinct entity ids in order of first appearance"""
        seen = {}
        for unit in self.units:
            for mention in unit.mentions:
                seen.setdefault(mention.entity_id, None)
        return list(seen)

    def reorder(self, order: Sequence[int]) -> Dialogue:
        """Return the dialogue with whole turns rearranged; order[i] is the
        original index of the turn placed at position i"""
        if sorted(order) != list(range(len(self.turns))):
            raise TaskError(f"{self.dialogue_id}: {list(order)} is not a permutation of the turns")
        return replace(self, turns=tuple(self.turns[i] for i in order))

    def insert_turn(self, turn_index: int, slot: int) -> Dialogue:
        """Remove turn `turn_index` and re-insert it before the `slot`-th
        remaining turn (slot == len-1 appends)"""
        if not 0 <= turn_index < len(self.turns):
            raise TaskError(f"{self.dialogue_id}: turn {turn_index} out of range")
        remaining = [t for i, t in enumerate(self.turns) if i != turn_index]
        if not 0 <= slot <= len(remaining):
            raise TaskError(f"{self.dialogue_id}: slot {slot} out of range")
        remaining.insert(slot, self.turns[turn_index])
        return replace(self, turns=tuple(remaining))

@dataclass(frozen=True)
class Tagset:
    tagset_id: str
    tags: Tuple[str, ...]
    _members: frozenset = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "tags", tuple(self.tags))
        object.__setattr__(self, "_members", frozenset(self.tags))

    def __contains__(self, tag: str) -> bool:
        return tag in self._members

    def __len__(self) -> int:
        return len(self.tags)

    def __iter__(self) -> Iterator[str]:
        return iter(self.tags)

SPLIT_NAMES = ("train", "test", "dev")

@dataclass(frozen=True)
class Corpus:
    dialogues: Tuple[Dialogue, ...]
    tagset: Tagset
    split: Optional[Dict[str, Tuple[str, ...]]] = field(default=None)

    def __len__(self) -> int:
        return len(self.dialogues)

    def __iter__(self) -> Iterator[Dialogue]:
        return iter(self.dialogues)

    @property
    def ids(self) -> List[str]:
        return [d.dialogue_id for d in self.dialogues]

    def get(self, dialogue_id: str) -> Dialogue:
        for dialogue in self.dialogues:
            if dialogue.dialogue_id == dialogue_id:
                return dialogue
        raise KeyError(dialogue_id)

    def subset(self, split_name: Optional[str]) -> Corpus:
        """Dialogues of one split part, in corpus order. Without a split (or
        with split_name None) the whole corpus is returned."""
        if split_name is None or self.split is None:
            return self
        wanted = set(self.split.get(split_name, ()))
        return Corpus(tuple(d for d in self.dialogues if d.dialogue_id in wanted),
                      self.tagset, None)

@dataclass(frozen=True)
class Violation:
    code: str
    dialogue_id: str
    turn_index: Optional[int] = None
    unit_index: Optional[int] = None
    detail: str = ""

    def __str__(self) -> str:
        location = self.dialogue_id
        if self.turn_index is not None:
            location += f" turn {self.turn_index}"
        if self.unit_index is not None:
            location += f" unit {self.unit_index}"
        return f"{self.code} at {location}: {self.detail}" if self.detail else f"{self.code} at {location}"

def validate_dialogue(d: Dialogue, tagset: Tagset) -> List[Violation]:
    violations = []
    if d.tagset_id != tagset.tagset_id:
        violations.append(Violation("TAGSET_MISMATCH", d.dialogue_id,
                                    detail=f"{d.tagset_id!r} != {tagset.tagset_id!r}"))
    for t, turn in enumerate(d.turns):
        if len(turn.units) == 0:
            violations.append(Violation("EMPTY_TURN", d.dialogue_id, t))
        for u, unit in enumerate(turn.units):
            if unit.da_tag not in tagset:
                violations.append(Violation("UNKNOWN_TAG", d.dialogue_id, t, u, unit.da_tag))
            for mention in unit.mentions:
                if not mention.entity_id.strip():
                    violations.append(Violation("EMPTY_ENTITY", d.dialogue_id, t, u))
                elif mention.entity_id != normalize_entity(mention.entity_id):
                    violations.append(Violation("UNNORMALIZED_ENTITY", d.dialogue_id, t, u,
                                                mention.entity_id))
                if not isinstance(mention.role, Role):
                    violations.append(Violation("INVALID_ROLE", d.dialogue_id, t, u,
                                                str(mention.role)))
    return violations

def validate_corpus(c: Corpus) -> List[Violation]:
    """Corpus-level checks: unique ids, tagset membership and a proper split"""
    violations = []
    seen = set()
    for d in c.dialogues:
        if d.dialogue_id in seen:
            violations.append(Violation("DUPLICATE_ID", d.dialogue_id))
        seen.add(d.dialogue_id)
        violations.extend(validate_dialogue(d, c.tagset))
    if len(c.tagset) == 0:
        violations.append(Violation("EMPTY_TAGSET", c.tagset.tagset_id))
    if c.split is not None:
        assigned = {}
        for name, ids in c.split.items():
            if name not in SPLIT_NAMES:
                violations.append(Violation("UNKNOWN_SPLIT", name))
            for dialogue_id in ids:
                if dialogue_id not in seen:
                    violations.append(Violation("SPLIT_UNKNOWN_ID", dialogue_id, detail=name))
                if dialogue_id in assigned:
                    violations.append(Violation("SPLIT_OVERLAP", dialogue_id,
                                                detail=f"{assigned[dialogue_id]}/{name}"))
                assigned[dialogue_id] = name
    return violations
