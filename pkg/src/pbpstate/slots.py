"""Fallback slot classifiers for turns the heuristics leave unvalued.

One multinomial model per slot, sharing the IC/OOC featurizer, trained on
the turns where the heuristic produced a value and using only the current
post's text as input. Filling never overwrites a heuristic value: the
models only propose labels for uncovered turns, and only when the
posterior clears the confidence threshold.

Character name and inventory stay heuristic-only; there is no useful
closed label set for them.
"""

from __future__ import annotations

from typing import Mapping, Sequence

from .errors import DegenerateDataError, DegenerateSlotError
from .icooc import IcOocModel, fit_from_features, featurize
from .models import Campaign
from .pipeline import FILLABLE_SLOTS, HEURISTIC, MODEL, AnnotatedCampaign, SlotValue


def _post_features(campaign: Campaign) -> list[dict[str, int]]:
    return [
        featurize(post.text()) if post.text().strip() else {}
        for post in campaign.posts
    ]


def train_slot_model(
    featurized: Sequence[tuple[dict[str, int], str]],
    slot: str,
    smoothing: float = 1.0,
) -> IcOocModel:
    """Fit one slot's classifier from (features, label) pairs."""
    labels = tuple(sorted({label for _, label in featurized}))
    if len(labels) < 2:
        raise DegenerateSlotError(
            f"slot {slot!r} has {len(labels)} observed label(s); need at least 2"
        )
    try:
        return fit_from_features(
            list(featurized), labels=labels, smoothing=smoothing, slot=slot
        )
    except DegenerateDataError as exc:
        raise DegenerateSlotError(str(exc)) from exc


def train_slot_models(
    annotated: Sequence[AnnotatedCampaign],
    slots: Sequence[str] = FILLABLE_SLOTS,
    smoothing: float = 1.0,
    skip_degenerate: bool = False,
) -> dict[str, IcOocModel]:
    """Train every requested slot on its heuristic-covered turns.

    With ``skip_degenerate`` slots lacking two observed labels are dropped
    from the result instead of raising.
    """
    training: dict[str, list[tuple[dict[str, int], str]]] = {s: [] for s in slots}
    for ac in annotated:
        features = _post_features(ac.campaign)
        for post_features, slot_row in zip(features, ac.slot_values):
            for slot in slots:
                value, source = slot_row.get(slot, (None, None))
                if source == HEURISTIC and value is not None:
                    training[slot].append((post_features, value))

    models: dict[str, IcOocModel] = {}
    for slot in slots:
        try:
            models[slot] = train_slot_model(training[slot], slot, smoothing)
        except DegenerateSlotError:
            if not skip_degenerate:
                raise
    return models


def predict_slot(
    model: IcOocModel, features: dict[str, int]
) -> tuple[str, float]:
    """(argmax label, posterior of that label)."""
    posteriors = model.posteriors(features)
    label = max(model.labels, key=lambda lab: posteriors[lab])
    return label, posteriors[label]


def fill_missing(
    annotated: Sequence[AnnotatedCampaign],
    models: Mapping[str, IcOocModel],
    min_score: float = 0.5,
) -> list[AnnotatedCampaign]:
    """Fill uncovered slots with model labels scoring at least min_score.

    Heuristic values are never touched; filled cells carry source "model".
    """
    filled: list[AnnotatedCampaign] = []
    for ac in annotated:
        features = _post_features(ac.campaign)
        new_rows: list[dict[str, SlotValue]] = []
        for post_features, slot_row in zip(features, ac.slot_values):
            row = dict(slot_row)
            for slot, model in models.items():
                value, source = row.get(slot, (None, None))
                if source is not None or value is not None:
                    continue
                label, score = predict_slot(model, post_features)
                if score >= min_score:
                    row[slot] = (label, MODEL)
            new_rows.append(row)
        filled.append(ac.with_slot_values(new_rows))
    return filled


def slot_coverage(annotated: AnnotatedCampaign) -> dict[str, float]:
    """Fraction of turns holding a value, per slot, regardless of source."""
    totals: dict[str, int] = {}
    for row in annotated.slot_values:
        for slot, (value, _) in row.items():
            if value is not None:
                totals[slot] = totals.get(slot, 0) + 1
    n = len(annotated.slot_values)
    return {slot: count / n for slot, count in sorted(totals.items())}
