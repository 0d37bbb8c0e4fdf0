"""Immutable domain types for play-by-post campaigns and their annotations.

Everything here is a plain value object: construction validates invariants
and raises ValueError naming the offending field, and all collections are
frozen so instances can be shared freely across threads. Inference lives in
the other modules.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Iterable, Mapping

DUNGEON_MASTER = "Dungeon Master"

PRONOUN_LABELS = ("he/him", "she/her", "they/them")


class ActionKind(Enum):
    ATTACK = "attack"
    SKILL_CHECK = "skill_check"
    DAMAGE_OR_HEAL = "damage_or_heal"
    UNKNOWN_CHECK = "unknown_check"


def _require(condition: bool, field_name: str, message: str) -> None:
    if not condition:
        raise ValueError(f"{field_name}: {message}")


@dataclass(frozen=True)
class DiceRoll:
    """One parsed dice expression plus the result recorded in the post.

    ``consistent`` is a derived flag, not a construction constraint:
    transcripts contain typos, so a recorded result outside the reachable
    range is preserved and merely flagged.
    """

    count: int
    faces: int
    modifier: int
    result: int
    paragraph_index: int = 0
    char_offset: int = 0

    def __post_init__(self) -> None:
        _require(self.count >= 1, "count", "must be at least 1")
        _require(self.faces >= 2, "faces", "must be at least 2")
        _require(self.paragraph_index >= 0, "paragraph_index", "must be non-negative")
        _require(self.char_offset >= 0, "char_offset", "must be non-negative")

    @property
    def consistent(self) -> bool:
        low = self.count + self.modifier
        high = self.count * self.faces + self.modifier
        return low <= self.result <= high

    def to_dict(self) -> dict[str, Any]:
        return {
            "count": self.count,
            "faces": self.faces,
            "modifier": self.modifier,
            "result": self.result,
            "paragraph_index": self.paragraph_index,
            "char_offset": self.char_offset,
            "consistent": self.consistent,
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "DiceRoll":
        return cls(
            count=d["count"],
            faces=d["faces"],
            modifier=d["modifier"],
            result=d["result"],
            paragraph_index=d.get("paragraph_index", 0),
            char_offset=d.get("char_offset", 0),
        )


@dataclass(frozen=True)
class Post:
    """One forum turn: ordered paragraphs plus the rolls embedded in them."""

    post_id: str
    author_id: str
    index: int
    paragraphs: tuple[str, ...]
    rolls: tuple[DiceRoll, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "paragraphs", tuple(self.paragraphs))
        object.__setattr__(self, "rolls", tuple(self.rolls))
        _require(self.index >= 0, "index", "must be non-negative")
        _require(
            bool(self.paragraphs) or bool(self.rolls),
            "paragraphs",
            "may be empty only if rolls is non-empty",
        )
        for roll in self.rolls:
            _require(
                roll.paragraph_index < len(self.paragraphs),
                "rolls",
                f"paragraph_index {roll.paragraph_index} outside paragraphs",
            )

    def text(self) -> str:
        return "\n".join(self.paragraphs)

    def to_dict(self, include_rolls: bool = False) -> dict[str, Any]:
        d: dict[str, Any] = {
            "post_id": self.post_id,
            "author_id": self.author_id,
            "paragraphs": list(self.paragraphs),
        }
        if include_rolls:
            d["rolls"] = [r.to_dict() for r in self.rolls]
        return d


@dataclass(frozen=True)
class Campaign:
    """An ordered sequence of posts by a fixed set of players."""

    campaign_id: str
    posts: tuple[Post, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "posts", tuple(self.posts))
        _require(len(self.posts) >= 1, "posts", "at least one post required")
        for expected, post in enumerate(self.posts):
            _require(
                post.index == expected,
                "posts",
                f"indices must be contiguous from 0 (found {post.index} at {expected})",
            )

    @property
    def player_ids(self) -> frozenset[str]:
        return frozenset(p.author_id for p in self.posts)

    def to_dict(self, include_rolls: bool = False) -> dict[str, Any]:
        return {
            "campaign_id": self.campaign_id,
            "posts": [p.to_dict(include_rolls=include_rolls) for p in self.posts],
        }


@dataclass(frozen=True)
class CharacterProfile:
    """Per-player properties inferred from their posts.

    The DM profile is scrubbed: class fixed to Dungeon Master, everything
    else absent, because the DM voices many characters at once.
    """

    player_id: str
    is_dm: bool = False
    name: str | None = None
    character_class: str | None = None
    race: str | None = None
    pronouns: str | None = None
    inventory: frozenset[str] = frozenset()
    spells: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        object.__setattr__(self, "inventory", frozenset(self.inventory))
        object.__setattr__(self, "spells", frozenset(self.spells))
        if self.is_dm:
            _require(
                self.character_class == DUNGEON_MASTER,
                "character_class",
                "DM profile must have the Dungeon Master class",
            )
            _require(self.name is None, "name", "DM profile must be scrubbed")
            _require(self.race is None, "race", "DM profile must be scrubbed")
            _require(self.pronouns is None, "pronouns", "DM profile must be scrubbed")
            _require(not self.inventory, "inventory", "DM profile must be scrubbed")
            _require(not self.spells, "spells", "DM profile must be scrubbed")

    def to_dict(self) -> dict[str, Any]:
        return {
            "player_id": self.player_id,
            "is_dm": self.is_dm,
            "name": self.name,
            "character_class": self.character_class,
            "race": self.race,
            "pronouns": self.pronouns,
            "inventory": sorted(self.inventory),
            "spells": sorted(self.spells),
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "CharacterProfile":
        return cls(
            player_id=d["player_id"],
            is_dm=d.get("is_dm", False),
            name=d.get("name"),
            character_class=d.get("character_class"),
            race=d.get("race"),
            pronouns=d.get("pronouns"),
            inventory=frozenset(d.get("inventory", ())),
            spells=frozenset(d.get("spells", ())),
        )


@dataclass(frozen=True)
class Action:
    """One classified dice action within a turn."""

    kind: ActionKind
    source_roll: DiceRoll
    skill: str | None = None

    def __post_init__(self) -> None:
        if self.kind is ActionKind.SKILL_CHECK:
            _require(self.skill is not None, "skill", "required for skill checks")
        else:
            _require(self.skill is None, "skill", "only allowed for skill checks")

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind.value,
            "skill": self.skill,
            "roll": self.source_roll.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "Action":
        return cls(
            kind=ActionKind(d["kind"]),
            skill=d.get("skill"),
            source_roll=DiceRoll.from_dict(d["roll"]),
        )


@dataclass(frozen=True)
class TurnState:
    """The per-turn control-feature record used to condition generation."""

    player_id: str
    character_name: str | None = None
    character_class: str | None = None
    race: str | None = None
    pronouns: str | None = None
    inventory: frozenset[str] = frozenset()
    in_combat: bool = False
    in_character: bool = True
    actions: tuple[Action, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "inventory", frozenset(self.inventory))
        object.__setattr__(self, "actions", tuple(self.actions))

    def consistent_with(self, profile: CharacterProfile) -> bool:
        """True when every character field present on both sides agrees."""
        pairs = (
            (self.character_name, profile.name),
            (self.character_class, profile.character_class),
            (self.race, profile.race),
            (self.pronouns, profile.pronouns),
        )
        return all(a == b for a, b in pairs if a is not None and b is not None)

    def to_dict(self) -> dict[str, Any]:
        return {
            "player_id": self.player_id,
            "character_name": self.character_name,
            "character_class": self.character_class,
            "race": self.race,
            "pronouns": self.pronouns,
            "inventory": sorted(self.inventory),
            "in_combat": self.in_combat,
            "in_character": self.in_character,
            "actions": [a.to_dict() for a in self.actions],
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "TurnState":
        return cls(
            player_id=d["player_id"],
            character_name=d.get("character_name"),
            character_class=d.get("character_class"),
            race=d.get("race"),
            pronouns=d.get("pronouns"),
            inventory=frozenset(d.get("inventory", ())),
            in_combat=d.get("in_combat", False),
            in_character=d.get("in_character", True),
            actions=tuple(Action.from_dict(a) for a in d.get("actions", ())),
        )


@dataclass(frozen=True)
class CombatSpan:
    """A contiguous inclusive range of posts spent in combat."""

    start_index: int
    end_index: int
    monsters: tuple[tuple[str, int], ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "monsters", tuple(tuple(m) for m in self.monsters))
        _require(self.start_index >= 0, "start_index", "must be non-negative")
        _require(
            self.start_index <= self.end_index,
            "end_index",
            "must not precede start_index",
        )
        for name, count in self.monsters:
            _require(count >= 1, "monsters", f"count for {name!r} must be positive")

    def contains(self, index: int) -> bool:
        return self.start_index <= index <= self.end_index

    def to_dict(self) -> dict[str, Any]:
        return {
            "start_index": self.start_index,
            "end_index": self.end_index,
            "monsters": [[n, c] for n, c in self.monsters],
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "CombatSpan":
        return cls(
            start_index=d["start_index"],
            end_index=d["end_index"],
            monsters=tuple((n, c) for n, c in d.get("monsters", ())),
        )


def validate_spans(spans: Iterable[CombatSpan]) -> None:
    """Reject span lists that are unsorted or overlapping."""
    previous_end = -1
    for span in spans:
        _require(
            span.start_index > previous_end,
            "spans",
            f"span starting at {span.start_index} overlaps or is out of order",
        )
        previous_end = span.end_index


@dataclass(frozen=True)
class GoldAnnotations:
    """Ground truth carried alongside a campaign by the synthetic generator.

    ``paragraph_labels`` holds per-post lists of "IC"/"OOC" paragraph labels
    and ``cue_posts`` the indices of posts where the generator planted at
    least one detectable signal.
    """

    turn_states: tuple[TurnState, ...]
    profiles: dict[str, CharacterProfile] = field(default_factory=dict)
    combat_spans: tuple[CombatSpan, ...] = ()
    paragraph_labels: tuple[tuple[str, ...], ...] = ()
    cue_posts: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "turn_states", tuple(self.turn_states))
        object.__setattr__(self, "combat_spans", tuple(self.combat_spans))
        object.__setattr__(
            self, "paragraph_labels", tuple(tuple(p) for p in self.paragraph_labels)
        )
        object.__setattr__(self, "cue_posts", tuple(self.cue_posts))
        validate_spans(self.combat_spans)
        if self.paragraph_labels:
            _require(
                len(self.paragraph_labels) == len(self.turn_states),
                "paragraph_labels",
                "must align with turn_states",
            )
        dm_count = sum(1 for p in self.profiles.values() if p.is_dm)
        _require(dm_count == 1, "profiles", "exactly one DM profile required")

    def validate_against(self, campaign: Campaign) -> None:
        _require(
            len(self.turn_states) == len(campaign.posts),
            "turn_states",
            "must align with campaign posts",
        )
        for state, post in zip(self.turn_states, campaign.posts):
            _require(
                state.player_id == post.author_id,
                "turn_states",
                f"player mismatch at post {post.index}",
            )
            profile = self.profiles.get(state.player_id)
            if profile is not None:
                _require(
                    state.consistent_with(profile),
                    "turn_states",
                    f"state at post {post.index} contradicts the player profile",
                )

    def to_dict(self) -> dict[str, Any]:
        return {
            "turn_states": [t.to_dict() for t in self.turn_states],
            "profiles": {pid: p.to_dict() for pid, p in sorted(self.profiles.items())},
            "combat_spans": [s.to_dict() for s in self.combat_spans],
            "paragraph_labels": [list(p) for p in self.paragraph_labels],
            "cue_posts": list(self.cue_posts),
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "GoldAnnotations":
        return cls(
            turn_states=tuple(TurnState.from_dict(t) for t in d["turn_states"]),
            profiles={
                pid: CharacterProfile.from_dict(p)
                for pid, p in d.get("profiles", {}).items()
            },
            combat_spans=tuple(
                CombatSpan.from_dict(s) for s in d.get("combat_spans", ())
            ),
            paragraph_labels=tuple(
                tuple(p) for p in d.get("paragraph_labels", ())
            ),
            cue_posts=tuple(d.get("cue_posts", ())),
        )
