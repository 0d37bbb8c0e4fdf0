"""In-character vs. out-of-character paragraph classification.

A smoothed multinomial bag-of-words model with three engineered indicator
features: dice notation, second-person address, and a digit-density bucket.
Out-of-character text talks rules and dice at the reader; in-character text
narrates, and those indicators separate the two even with a small
vocabulary. Training is a pure function of its arguments, so identical
inputs always reproduce the same model.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from pathlib import Path

from .dice import contains_dice_expr
from .errors import (
    DegenerateDataError,
    EmptyInputError,
    ModelIOError,
    VersionMismatchError,
)
from .models import Post

MODEL_MAGIC = "ICOOC-MODEL v1"

IC = "IC"
OOC = "OOC"

DICE_FEATURE = "__dice__"
SECOND_PERSON_FEATURE = "__second_person__"

_TOKEN_RE = re.compile(r"[a-z0-9']+")
_SECOND_PERSON = frozenset({"you", "your", "yours"})


@dataclass(frozen=True)
class LabeledParagraph:
    text: str
    label: str

    def __post_init__(self) -> None:
        if not self.text.strip():
            raise ValueError("text: must be non-empty")
        if self.label not in (IC, OOC):
            raise ValueError(f"label: must be {IC!r} or {OOC!r}")


def _digit_bucket(text: str) -> str:
    ratio = sum(c.isdigit() for c in text) / max(1, len(text))
    if ratio == 0:
        bucket = "none"
    elif ratio <= 0.05:
        bucket = "low"
    elif ratio <= 0.15:
        bucket = "mid"
    else:
        bucket = "high"
    return f"__digits:{bucket}__"


def featurize(paragraph: str) -> dict[str, int]:
    """Lowercased unigram counts plus the three indicator features."""
    if not paragraph.strip():
        raise EmptyInputError("paragraph is empty")
    features: dict[str, int] = {}
    for token in _TOKEN_RE.findall(paragraph.lower()):
        features[token] = features.get(token, 0) + 1
    if contains_dice_expr(paragraph):
        features[DICE_FEATURE] = 1
    if any(t in _SECOND_PERSON for t in features):
        features[SECOND_PERSON_FEATURE] = 1
    features[_digit_bucket(paragraph)] = 1
    return features


@dataclass(frozen=True)
class IcOocModel:
    """Linear scores over the featurizer's space, one column per label.

    Scores are log-prior plus count-weighted token weights; posteriors come
    from a softmax over the label scores, so they always sum to one.
    Tokens unseen in training are ignored.
    """

    labels: tuple[str, ...]
    priors: tuple[float, ...]
    weights: dict[str, tuple[float, ...]]
    smoothing: float
    slot: str | None = None

    def scores(self, features: dict[str, int]) -> tuple[float, ...]:
        totals = list(self.priors)
        for token, count in features.items():
            token_weights = self.weights.get(token)
            if token_weights is None:
                continue
            for j, w in enumerate(token_weights):
                totals[j] += count * w
        return tuple(totals)

    def posteriors(self, features: dict[str, int]) -> dict[str, float]:
        scores = self.scores(features)
        peak = max(scores)
        exp = [math.exp(s - peak) for s in scores]
        total = sum(exp)
        return {label: e / total for label, e in zip(self.labels, exp)}


def train(
    data: list[LabeledParagraph],
    smoothing: float = 1.0,
    seed: int = 0,
    labels: tuple[str, ...] = (IC, OOC),
) -> IcOocModel:
    """Fit the multinomial model with additive smoothing.

    Deterministic given (data order, smoothing, seed); the seed is part of
    the call contract for trainer interchangeability but this closed-form
    estimator does not consume it. Raises DegenerateDataError unless every
    requested label is present.

    The dice-notation feature is sign-constrained after fitting so that a
    dice match can never push a paragraph toward IC.
    """
    return fit_from_features(
        [(featurize(p.text), p.label) for p in data],
        labels=labels,
        smoothing=smoothing,
        slot=None,
        constrain_dice=True,
    )


def fit_from_features(
    featurized: list[tuple[dict[str, int], str]],
    labels: tuple[str, ...],
    smoothing: float,
    slot: str | None,
    constrain_dice: bool = False,
) -> IcOocModel:
    if smoothing <= 0:
        raise ValueError("smoothing: must be positive")
    observed = {label for _, label in featurized}
    missing = [label for label in labels if label not in observed]
    if missing or len(labels) < 2:
        raise DegenerateDataError(
            f"need examples for every label; missing {missing or labels}"
        )

    doc_counts = {label: 0 for label in labels}
    token_counts: dict[str, dict[str, int]] = {}
    label_totals = {label: 0 for label in labels}
    for features, label in featurized:
        doc_counts[label] += 1
        for token, count in features.items():
            per_label = token_counts.setdefault(token, dict.fromkeys(labels, 0))
            per_label[label] += count
            label_totals[label] += count

    total_docs = len(featurized)
    priors = tuple(math.log(doc_counts[lab] / total_docs) for lab in labels)
    vocab_size = len(token_counts)
    denominators = {
        lab: label_totals[lab] + smoothing * vocab_size for lab in labels
    }
    weights = {
        token: tuple(
            math.log((per_label[lab] + smoothing) / denominators[lab])
            for lab in labels
        )
        for token, per_label in token_counts.items()
    }

    if constrain_dice and DICE_FEATURE in weights and IC in labels and OOC in labels:
        ic, ooc = labels.index(IC), labels.index(OOC)
        w = list(weights[DICE_FEATURE])
        if w[ic] > w[ooc]:
            w[ic] = w[ooc]
            weights[DICE_FEATURE] = tuple(w)

    return IcOocModel(
        labels=labels,
        priors=priors,
        weights=weights,
        smoothing=smoothing,
        slot=slot,
    )


def predict(model: IcOocModel, paragraph: str) -> tuple[str, float]:
    """(most probable label, posterior probability of IC)."""
    posteriors = model.posteriors(featurize(paragraph))
    label = max(model.labels, key=lambda lab: posteriors[lab])
    return label, posteriors.get(IC, posteriors[label])


def label_turn(model: IcOocModel, post: Post) -> tuple[list[str], str]:
    """Label each paragraph; the turn takes the majority label, IC on ties."""
    labels = [predict(model, paragraph)[0] for paragraph in post.paragraphs]
    ic_count = sum(1 for lab in labels if lab == IC)
    turn_label = IC if ic_count >= len(labels) - ic_count else OOC
    return labels, turn_label


def rule_based_turn_label(post: Post) -> str:
    """Fallback when no trained model is supplied: dice notation means OOC."""
    ooc = sum(1 for p in post.paragraphs if contains_dice_expr(p))
    ic = len(post.paragraphs) - ooc
    return IC if ic >= ooc else OOC


def save_model(model: IcOocModel, path: str | Path) -> None:
    lines = [MODEL_MAGIC]
    lines.append("labels\t" + "\t".join(model.labels))
    if model.slot is not None:
        lines.append(f"slot\t{model.slot}")
    lines.append(f"smoothing\t{model.smoothing!r}")
    lines.append("priors\t" + "\t".join(repr(p) for p in model.priors))
    lines.append(f"tokens\t{len(model.weights)}")
    for token in sorted(model.weights):
        weights = model.weights[token]
        lines.append(token + "\t" + "\t".join(repr(w) for w in weights))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_model(path: str | Path) -> IcOocModel:
    text = Path(path).read_text(encoding="utf-8")
    lines = text.splitlines()
    if not lines or lines[0] != MODEL_MAGIC:
        raise VersionMismatchError(
            f"expected header {MODEL_MAGIC!r}, found {(lines[0] if lines else '')!r}"
        )
    try:
        cursor = 1
        parts = lines[cursor].split("\t")
        if parts[0] != "labels":
            raise ModelIOError(f"expected labels line, found {lines[cursor]!r}")
        labels = tuple(parts[1:])
        cursor += 1
        slot = None
        if lines[cursor].startswith("slot\t"):
            slot = lines[cursor].split("\t", 1)[1]
            cursor += 1
        smoothing = float(lines[cursor].split("\t", 1)[1])
        cursor += 1
        priors = tuple(float(v) for v in lines[cursor].split("\t")[1:])
        cursor += 1
        token_count = int(lines[cursor].split("\t", 1)[1])
        cursor += 1
        weights: dict[str, tuple[float, ...]] = {}
        for line in lines[cursor : cursor + token_count]:
            fields = line.split("\t")
            if len(fields) != 1 + len(labels):
                raise ModelIOError(f"malformed weight line {line!r}")
            weights[fields[0]] = tuple(float(v) for v in fields[1:])
        if len(weights) != token_count:
            raise ModelIOError(
                f"expected {token_count} tokens, found {len(weights)}"
            )
    except (IndexError, ValueError) as exc:
        raise ModelIOError(f"truncated or corrupt model file: {exc}") from exc
    return IcOocModel(
        labels=labels,
        priors=priors,
        weights=weights,
        smoothing=smoothing,
        slot=slot,
    )
