"""Next-utterance fine-tuning examples with control-feature conditioning.

Each example pairs a sliding context window (up to seven preceding turns
by default) with the following turn as the target. The four variants
differ only in where per-turn state blocks are attached:

    none  - plain text everywhere
    all   - state blocks on every context turn and on the target
    prev  - state blocks on context turns only
    curr  - a state block on the target only

Output is deterministic byte-for-byte: identical inputs yield identical
files, so fixtures can be golden-tested.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Any, Iterable, Sequence

from .models import DUNGEON_MASTER, Action, ActionKind, TurnState
from .transcripts import dump_json_line


class ControlVariant(Enum):
    NONE = "none"
    ALL_CTRL = "all"
    PREV_CTRL = "prev"
    CURR_CTRL = "curr"


_ABSENT = "N/A"


def _render_action(action: Action) -> str:
    if action.kind is ActionKind.ATTACK:
        return "Attack"
    if action.kind is ActionKind.DAMAGE_OR_HEAL:
        return "Damage"
    if action.kind is ActionKind.SKILL_CHECK:
        return f"{action.skill.title()} Check"
    return "Check"


def _yes_no(flag: bool) -> str:
    return "Yes" if flag else "No"


def render_turn_block(state: TurnState, text: str) -> str:
    """The fixed-order control-feature block for one turn.

    Field order and value conventions follow the training-data layout:
    absent values render as N/A, booleans as Yes/No, and multi-item fields
    comma-joined. The DM renders with Character and Class "Dungeon Master".
    """
    if state.character_name is not None:
        character = state.character_name
    elif state.character_class == DUNGEON_MASTER:
        character = DUNGEON_MASTER
    else:
        character = _ABSENT

    if state.character_class is None:
        rendered_class = _ABSENT
    elif state.character_class == DUNGEON_MASTER:
        rendered_class = DUNGEON_MASTER
    else:
        rendered_class = state.character_class.title()

    inventory = (
        ", ".join(item.title() for item in sorted(state.inventory))
        if state.inventory
        else _ABSENT
    )
    actions = (
        ", ".join(_render_action(a) for a in state.actions)
        if state.actions
        else _ABSENT
    )
    lines = (
        f"Text: {text}",
        f"Player ID: {state.player_id}",
        f"Character: {character}",
        f"Race: {state.race.title() if state.race else _ABSENT}",
        f"Class: {rendered_class}",
        f"Pronouns: {state.pronouns if state.pronouns else _ABSENT}",
        f"Inventory: {inventory}",
        f"In combat?: {_yes_no(state.in_combat)}",
        f"In character?: {_yes_no(state.in_character)}",
        f"Action: {actions}",
    )
    return "\n".join(lines)


@dataclass(frozen=True)
class TurnEntry:
    index: int
    text: str
    state: TurnState | None

    @property
    def rendered(self) -> str:
        if self.state is None:
            return f"Text: {self.text}"
        return render_turn_block(self.state, self.text)

    def to_dict(self) -> dict[str, Any]:
        return {
            "index": self.index,
            "text": self.text,
            "state": self.state.to_dict() if self.state is not None else None,
            "rendered": self.rendered,
        }


@dataclass(frozen=True)
class FinetuneExample:
    campaign_id: str
    target_index: int
    variant: ControlVariant
    context: tuple[TurnEntry, ...]
    target: TurnEntry

    def block_count(self) -> int:
        blocks = sum(1 for entry in self.context if entry.state is not None)
        return blocks + (1 if self.target.state is not None else 0)

    def rendered_prompt(self) -> str:
        """All turns concatenated with TURN headers, target last."""
        parts = []
        for offset, entry in enumerate(self.context, start=1):
            parts.append(f"TURN {offset}:\n{entry.rendered}")
        parts.append(f"TURN {len(self.context) + 1}:\n{self.target.rendered}")
        return "\n\n".join(parts)

    def to_dict(self) -> dict[str, Any]:
        return {
            "campaign_id": self.campaign_id,
            "target_index": self.target_index,
            "variant": self.variant.value,
            "context": [entry.to_dict() for entry in self.context],
            "target": self.target.to_dict(),
        }


def build_examples(
    campaign_id: str,
    turns: Sequence[tuple[str, TurnState]],
    variant: ControlVariant,
    window: int = 7,
) -> list[FinetuneExample]:
    """One example per target turn index >= 1, sliding by one.

    Early targets use however many turns exist instead of being skipped.
    """
    if window < 1:
        raise ValueError("window: must be positive")
    examples = []
    for target_index in range(1, len(turns)):
        start = max(0, target_index - window)
        context_states = variant in (ControlVariant.ALL_CTRL, ControlVariant.PREV_CTRL)
        target_state = variant in (ControlVariant.ALL_CTRL, ControlVariant.CURR_CTRL)
        context = tuple(
            TurnEntry(
                index=i,
                text=turns[i][0],
                state=turns[i][1] if context_states else None,
            )
            for i in range(start, target_index)
        )
        text, state = turns[target_index]
        target = TurnEntry(
            index=target_index, text=text, state=state if target_state else None
        )
        examples.append(
            FinetuneExample(
                campaign_id=campaign_id,
                target_index=target_index,
                variant=variant,
                context=context,
                target=target,
            )
        )
    return examples


def write_examples(
    path: str | Path, examples: Iterable[FinetuneExample]
) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for example in examples:
            handle.write(dump_json_line(example.to_dict()))
            handle.write("\n")
