"""End-to-end heuristic annotation of campaigns.

Couples the per-player property heuristics, the combat state machine, roll
classification, and IC/OOC labeling into one annotated record per campaign,
including the per-turn slot view consumed by the fill models and the
evaluation tools.

Slot coverage follows the evidence available per turn: character slots are
covered for every turn whose author earned a profile value, while the
combat and action slots are covered only on turns that actually contain a
roll. Turns without coverage are left for the slot-fill models.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Any, Iterable, Mapping, Sequence

from .characters import build_profiles, text_signals
from .combat import (
    CombatDetectorConfig,
    annotate_turn_actions,
    detect_combat_spans,
    extract_monsters,
)
from .errors import FormatError
from .gazetteers import Gazetteers
from .icooc import IcOocModel, label_turn, rule_based_turn_label
from .models import (
    Action,
    Campaign,
    CharacterProfile,
    CombatSpan,
    GoldAnnotations,
    Post,
    TurnState,
)
from .transcripts import campaign_from_record

SLOT_KEYS = ("name", "character_class", "race", "pronouns", "in_combat", "action")

FILLABLE_SLOTS = ("character_class", "race", "pronouns", "in_combat", "action")

HEURISTIC = "heuristic"
MODEL = "model"
GOLD = "gold"

SlotValue = tuple[str | None, str | None]


def action_slot_value(actions: Sequence[Action]) -> str | None:
    """Canonical slot value for a turn's actions: kinds in roll order."""
    if not actions:
        return None
    return ",".join(a.kind.value for a in actions)


def state_slot_values(state: TurnState) -> dict[str, str | None]:
    """Flatten a TurnState into the per-slot comparison view."""
    return {
        "name": state.character_name,
        "character_class": state.character_class,
        "race": state.race,
        "pronouns": state.pronouns,
        "in_combat": "true" if state.in_combat else "false",
        "action": action_slot_value(state.actions),
    }


@dataclass(frozen=True)
class AnnotatedCampaign:
    campaign: Campaign
    profiles: dict[str, CharacterProfile]
    combat_spans: tuple[CombatSpan, ...]
    turn_states: tuple[TurnState, ...]
    slot_values: tuple[dict[str, SlotValue], ...]
    coverage: float

    def with_slot_values(
        self, slot_values: Sequence[Mapping[str, SlotValue]]
    ) -> "AnnotatedCampaign":
        return replace(self, slot_values=tuple(dict(sv) for sv in slot_values))


def _turn_in_character(post: Post, icooc_model: IcOocModel | None) -> bool:
    if icooc_model is None:
        return rule_based_turn_label(post) == "IC"
    non_blank = [p for p in post.paragraphs if p.strip()]
    if not non_blank:
        return True
    trimmed = Post(
        post_id=post.post_id,
        author_id=post.author_id,
        index=post.index,
        paragraphs=tuple(non_blank),
    )
    _, turn_label = label_turn(icooc_model, trimmed)
    return turn_label == "IC"


def annotate_campaign(
    campaign: Campaign,
    gazetteers: Gazetteers,
    combat_config: CombatDetectorConfig = CombatDetectorConfig(),
    icooc_model: IcOocModel | None = None,
    inventory_fallback: bool = False,
) -> AnnotatedCampaign:
    """Run every heuristic over one campaign.

    Without a trained IC/OOC model the turn flavor falls back to the dice
    rule: paragraphs containing roll notation count as OOC.
    """
    profiles = build_profiles(
        campaign, gazetteers, inventory_fallback=inventory_fallback
    )
    bare_spans = detect_combat_spans(campaign, gazetteers, combat_config)
    spans = tuple(
        CombatSpan(
            start_index=s.start_index,
            end_index=s.end_index,
            monsters=tuple(extract_monsters(campaign, s, gazetteers, combat_config)),
        )
        for s in bare_spans
    )
    actions_per_post = annotate_turn_actions(
        campaign, gazetteers, combat_config, spans=list(bare_spans)
    )

    states: list[TurnState] = []
    slot_values: list[dict[str, SlotValue]] = []
    covered_posts = 0
    for post, actions in zip(campaign.posts, actions_per_post):
        profile = profiles[post.author_id]
        in_combat = any(s.contains(post.index) for s in spans)
        state = TurnState(
            player_id=post.author_id,
            character_name=profile.name,
            character_class=profile.character_class,
            race=profile.race,
            pronouns=profile.pronouns,
            inventory=profile.inventory,
            in_combat=in_combat,
            in_character=_turn_in_character(post, icooc_model),
            actions=tuple(actions),
        )
        states.append(state)

        slots: dict[str, SlotValue] = {}
        for key, value in (
            ("name", profile.name),
            ("character_class", profile.character_class),
            ("race", profile.race),
            ("pronouns", profile.pronouns),
        ):
            slots[key] = (value, HEURISTIC) if value is not None else (None, None)
        if post.rolls:
            slots["in_combat"] = ("true" if in_combat else "false", HEURISTIC)
        else:
            slots["in_combat"] = (None, None)
        action_value = action_slot_value(actions)
        slots["action"] = (
            (action_value, HEURISTIC) if action_value is not None else (None, None)
        )
        slot_values.append(slots)

        if post.rolls or text_signals(post.text(), gazetteers):
            covered_posts += 1

    return AnnotatedCampaign(
        campaign=campaign,
        profiles=profiles,
        combat_spans=spans,
        turn_states=tuple(states),
        slot_values=tuple(slot_values),
        coverage=covered_posts / len(campaign.posts),
    )


def annotate_corpus(
    campaigns: Iterable[Campaign],
    gazetteers: Gazetteers,
    combat_config: CombatDetectorConfig = CombatDetectorConfig(),
    icooc_model: IcOocModel | None = None,
    inventory_fallback: bool = False,
    fill: bool = True,
    fill_threshold: float = 0.5,
    fill_smoothing: float = 1.0,
    workers: int = 1,
) -> list[AnnotatedCampaign]:
    """Annotate many campaigns, then train and apply the slot-fill models.

    Worker threads process campaigns concurrently; output order always
    equals input order. Fill models are trained on the corpus's own
    heuristic-covered turns, mirroring how the fallback classifiers are
    meant to be bootstrapped; slots with a single observed label are
    skipped rather than failing the whole run.
    """
    from .slots import fill_missing, train_slot_models

    def _one(campaign: Campaign) -> AnnotatedCampaign:
        return annotate_campaign(
            campaign,
            gazetteers,
            combat_config,
            icooc_model=icooc_model,
            inventory_fallback=inventory_fallback,
        )

    campaign_list = list(campaigns)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            annotated = list(pool.map(_one, campaign_list))
    else:
        annotated = [_one(c) for c in campaign_list]

    if fill and annotated:
        models = train_slot_models(
            annotated, smoothing=fill_smoothing, skip_degenerate=True
        )
        if models:
            annotated = fill_missing(annotated, models, min_score=fill_threshold)
    return annotated


def annotated_to_record(annotated: AnnotatedCampaign) -> dict[str, Any]:
    record = annotated.campaign.to_dict(include_rolls=True)
    for post_dict, state in zip(record["posts"], annotated.turn_states):
        post_dict["actions"] = [a.to_dict() for a in state.actions]
    record["coverage"] = annotated.coverage
    record["profiles"] = {
        pid: p.to_dict() for pid, p in sorted(annotated.profiles.items())
    }
    record["combat_spans"] = [s.to_dict() for s in annotated.combat_spans]
    record["turn_states"] = [t.to_dict() for t in annotated.turn_states]
    record["turn_slots"] = [
        {
            key: {"value": value, "source": source}
            for key, (value, source) in sorted(slots.items())
        }
        for slots in annotated.slot_values
    ]
    return record


def gold_to_record(campaign: Campaign, gold: GoldAnnotations) -> dict[str, Any]:
    """Gold annotations in the same slot-record shape the evaluator reads."""
    record: dict[str, Any] = {"campaign_id": campaign.campaign_id}
    record.update(gold.to_dict())
    record["turn_slots"] = [
        {
            key: {"value": value, "source": GOLD}
            for key, value in sorted(state_slot_values(state).items())
        }
        for state in gold.turn_states
    ]
    return record


def slot_rows_from_record(record: Mapping[str, Any]) -> list[dict[str, str | None]]:
    """Per-turn slot values from an annotated or gold JSONL record."""
    try:
        turn_slots = record["turn_slots"]
    except KeyError as exc:
        raise FormatError("record carries no turn_slots") from exc
    return [
        {key: cell["value"] for key, cell in slots.items()} for slots in turn_slots
    ]


def turns_from_record(
    record: Mapping[str, Any],
) -> tuple[str, list[tuple[str, TurnState]]]:
    """(campaign_id, [(turn text, state), ...]) from an annotated record."""
    try:
        campaign = campaign_from_record(
            {"campaign_id": record["campaign_id"], "posts": record["posts"]}
        )
        states = [TurnState.from_dict(t) for t in record["turn_states"]]
    except KeyError as exc:
        raise FormatError(f"annotated record missing field {exc}") from exc
    if len(states) != len(campaign.posts):
        raise FormatError("turn_states do not align with posts")
    turns = [
        (" ".join(post.paragraphs), state)
        for post, state in zip(campaign.posts, states)
    ]
    return campaign.campaign_id, turns


def validate_record(record: Mapping[str, Any]) -> None:
    """Reconstruct every domain type in an annotated record.

    Constructors enforce the type invariants, so a clean pass means the
    record is structurally sound; used by the CLI before it reports
    success.
    """
    from .models import validate_spans

    _, turns = turns_from_record(record)
    profiles = {
        pid: CharacterProfile.from_dict(p)
        for pid, p in record.get("profiles", {}).items()
    }
    spans = [CombatSpan.from_dict(s) for s in record.get("combat_spans", ())]
    validate_spans(spans)
    for _, state in turns:
        profile = profiles.get(state.player_id)
        if profile is not None and not state.consistent_with(profile):
            raise FormatError(
                f"turn state for {state.player_id!r} contradicts its profile"
            )
    slot_rows_from_record(record)
