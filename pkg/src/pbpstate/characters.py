"""Per-player character property inference from post text.

The extraction rules are frequency heuristics over whole-word matches:
the most frequently mentioned candidate wins, with ties broken by earliest
first occurrence so results are stable under appending new posts. Name
candidates come from a capitalization heuristic rather than a neural NER
model, which keeps the pipeline dependency-free and deterministic.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Sequence

from .gazetteers import POSSESSIVE_ADJECTIVES, Gazetteers
from .models import DUNGEON_MASTER, Campaign, CharacterProfile, Post

_WORD_RE = re.compile(r"[A-Za-zÀ-ɏ]+(?:['’-][A-Za-zÀ-ɏ]+)*")
_SENTENCE_BREAK_RE = re.compile(r"[.!?\n]")
_CAST_RE = re.compile(r"(?<!\w)cast(?:s|ing)?(?!\w)", re.IGNORECASE)

_MAX_SPELL_TOKENS = 4


@dataclass
class MentionCounts:
    """Tallies per candidate plus the order each was first seen.

    ``best()`` returns the most frequent key; ties go to the earliest first
    occurrence (post index, then in-post order).
    """

    counts: dict[str, int] = field(default_factory=dict)
    first_seen: dict[str, tuple[int, int]] = field(default_factory=dict)
    _order: int = 0

    def add(self, key: str, post_index: int) -> None:
        self.counts[key] = self.counts.get(key, 0) + 1
        self.first_seen.setdefault(key, (post_index, self._order))
        self._order += 1

    def best(self) -> str | None:
        if not self.counts:
            return None
        return min(
            self.counts, key=lambda k: (-self.counts[k], self.first_seen[k])
        )


def identify_dm(campaign: Campaign) -> str:
    """The DM is the author of the campaign's first post."""
    return campaign.posts[0].author_id


def _tokens_with_positions(text: str) -> list[tuple[str, int, int, bool]]:
    """(surface, start, end, sentence_initial) for each word token."""
    tokens = []
    previous_end = 0
    at_sentence_start = True
    for m in _WORD_RE.finditer(text):
        gap = text[previous_end : m.start()]
        if previous_end > 0 and _SENTENCE_BREAK_RE.search(gap):
            at_sentence_start = True
        tokens.append((m.group(0), m.start(), m.end(), at_sentence_start))
        at_sentence_start = False
        previous_end = m.end()
    return tokens


def _is_capitalized(surface: str) -> bool:
    return (
        len(surface) >= 2
        and surface[0].isupper()
        and any(c.islower() for c in surface[1:])
    )


def _strip_possessive(surface: str) -> str:
    for suffix in ("'s", "’s"):
        if surface.endswith(suffix):
            return surface[: -len(suffix)]
    return surface


def extract_proper_names(text: str, gazetteers: Gazetteers) -> list[str]:
    """Candidate person names, one entry per occurrence, in order.

    A capitalized token qualifies unless it is a stopword or a gazetteer
    term. A token type capitalized only at sentence starts is kept only
    when the same word never occurs lowercased in the text, since a
    lowercase occurrence marks the capitalization as purely positional.
    Adjacent qualifying tokens merge into a two-token name.
    """
    tokens = _tokens_with_positions(text)
    blocklist = gazetteers.name_blocklist

    lowercase_types = {t[0].lower() for t in tokens if t[0].islower()}
    capitalized_mid_sentence: set[str] = set()
    for surface, _, _, initial in tokens:
        if _is_capitalized(surface) and not initial:
            capitalized_mid_sentence.add(_strip_possessive(surface).lower())

    def qualifies(surface: str, initial: bool) -> str | None:
        if not _is_capitalized(surface):
            return None
        stripped = _strip_possessive(surface)
        lowered = stripped.lower()
        if lowered in blocklist:
            return None
        if (
            lowered not in capitalized_mid_sentence
            and lowered in lowercase_types
        ):
            return None
        return stripped

    names: list[str] = []
    i = 0
    while i < len(tokens):
        surface, start, end, initial = tokens[i]
        candidate = qualifies(surface, initial)
        if candidate is None:
            i += 1
            continue
        if i + 1 < len(tokens):
            nxt_surface, nxt_start, _, _ = tokens[i + 1]
            between = text[end:nxt_start]
            partner = qualifies(nxt_surface, False)
            if partner is not None and between.strip() == "" and "\n" not in between:
                names.append(f"{candidate} {partner}")
                i += 2
                continue
        names.append(candidate)
        i += 1
    return names


def _ordered(posts: Sequence[Post]) -> list[Post]:
    return sorted(posts, key=lambda p: p.index)


def infer_name(posts: Sequence[Post], gazetteers: Gazetteers) -> str | None:
    """The player's most frequently mentioned proper name, if any."""
    tally = MentionCounts()
    for post in _ordered(posts):
        for name in extract_proper_names(post.text(), gazetteers):
            tally.add(name, post.index)
    return tally.best()


def infer_class(
    posts: Sequence[Post], gazetteers: Gazetteers, is_dm: bool = False
) -> str | None:
    """Most mentioned class; the DM is always the Dungeon Master."""
    if is_dm:
        return DUNGEON_MASTER
    tally = MentionCounts()
    for post in _ordered(posts):
        for term, _ in gazetteers.class_matcher.finditer(post.text()):
            tally.add(term, post.index)
    return tally.best()


def infer_race(posts: Sequence[Post], gazetteers: Gazetteers) -> str | None:
    """Race from the player's first post when present, else most frequent.

    Several races in the first post resolve to the earliest by offset.
    """
    ordered = _ordered(posts)
    if not ordered:
        return None
    first_matches = list(gazetteers.race_matcher.finditer(ordered[0].text()))
    if first_matches:
        return min(first_matches, key=lambda m: m[1])[0]
    tally = MentionCounts()
    for post in ordered:
        for term, _ in gazetteers.race_matcher.finditer(post.text()):
            tally.add(term, post.index)
    return tally.best()


def infer_pronouns(posts: Sequence[Post], gazetteers: Gazetteers) -> str | None:
    """The pronoun set whose forms the player uses most.

    Ties break by first occurrence in document order, so matches are
    merged across sets by offset before tallying.
    """
    tally = MentionCounts()
    for post in _ordered(posts):
        text = post.text()
        hits: list[tuple[int, str]] = []
        for label, matcher in gazetteers.pronoun_matchers:
            hits.extend((start, label) for _, start in matcher.finditer(text))
        for _, label in sorted(hits):
            tally.add(label, post.index)
    return tally.best()


def _inventory_hits(
    posts: Sequence[Post],
    possessives: Sequence[str],
    gazetteers: Gazetteers,
    fallback: bool,
) -> frozenset[str]:
    wanted = set(possessives)
    items = {t.lower() for t in gazetteers.items}
    found: set[str] = set()
    for post in _ordered(posts):
        text = post.text()
        tokens = _tokens_with_positions(text)
        for i, (surface, _, end, _) in enumerate(tokens[:-1]):
            if surface.lower() not in wanted:
                continue
            nxt_surface, nxt_start, _, _ = tokens[i + 1]
            if text[end:nxt_start].strip():
                continue
            word = nxt_surface.lower()
            if word in items:
                found.add(word)
            elif fallback and word not in gazetteers.stopwords and word.isalpha():
                found.add(word)
    return frozenset(found)


def extract_inventory(
    posts: Sequence[Post],
    pronouns: str | None,
    gazetteers: Gazetteers,
    fallback: bool = False,
) -> frozenset[str]:
    """Items named right after a possessive pronoun ("her sword").

    First-person possessives always count; third-person ones only for the
    player's own pronoun set. By default only gazetteer items are captured;
    with ``fallback`` any following noun-like token is taken.
    """
    return _inventory_hits(
        posts, gazetteers.possessives_for(pronouns), gazetteers, fallback
    )


def extract_spells(posts: Sequence[Post], gazetteers: Gazetteers) -> frozenset[str]:
    """Spell names following a cast verb, title-cased.

    Capture runs over the next few word tokens and stops at stopwords,
    punctuation, or paragraph breaks, so "cast sacred flame at ..." yields
    "Sacred Flame".
    """
    spells: set[str] = set()
    for post in _ordered(posts):
        for paragraph in post.paragraphs:
            tokens = _tokens_with_positions(paragraph)
            for m in _CAST_RE.finditer(paragraph):
                phrase: list[str] = []
                previous_end = m.end()
                for surface, start, end, _ in tokens:
                    if start < m.end():
                        continue
                    gap = paragraph[previous_end:start]
                    if gap.strip() or len(phrase) >= _MAX_SPELL_TOKENS:
                        break
                    if surface.lower() in gazetteers.stopwords:
                        break
                    phrase.append(surface)
                    previous_end = end
                if phrase:
                    spells.add(" ".join(w.capitalize() for w in phrase))
    return frozenset(spells)


def text_signals(text: str, gazetteers: Gazetteers) -> set[str]:
    """Which character-cue families fire anywhere in the text.

    Used for coverage accounting: a turn contributes a heuristic feature
    when at least one family fires (rolls are accounted separately).
    Detection mirrors the extractors themselves so coverage never counts
    a post the extractors would ignore.
    """
    signals: set[str] = set()
    if extract_proper_names(text, gazetteers):
        signals.add("name")
    if gazetteers.class_matcher.search(text):
        signals.add("class")
    if gazetteers.race_matcher.search(text):
        signals.add("race")
    if any(matcher.search(text) for _, matcher in gazetteers.pronoun_matchers):
        signals.add("pronouns")

    probe = Post(post_id="", author_id="", index=0, paragraphs=(text,))
    widest = gazetteers.possessives_for(None) + tuple(
        f for f in gazetteers.all_pronoun_forms if f in POSSESSIVE_ADJECTIVES
    )
    if _inventory_hits([probe], widest, gazetteers, fallback=False):
        signals.add("inventory")
    if _CAST_RE.search(text) and extract_spells([probe], gazetteers):
        signals.add("spells")
    return signals


def build_profiles(
    campaign: Campaign,
    gazetteers: Gazetteers,
    inventory_fallback: bool = False,
) -> dict[str, CharacterProfile]:
    """Run all property heuristics per player; the DM profile is scrubbed."""
    dm_id = identify_dm(campaign)
    by_player: dict[str, list[Post]] = {}
    for post in campaign.posts:
        by_player.setdefault(post.author_id, []).append(post)

    profiles: dict[str, CharacterProfile] = {
        dm_id: CharacterProfile(
            player_id=dm_id, is_dm=True, character_class=DUNGEON_MASTER
        )
    }
    for player_id, posts in by_player.items():
        if player_id == dm_id:
            continue
        pronouns = infer_pronouns(posts, gazetteers)
        profiles[player_id] = CharacterProfile(
            player_id=player_id,
            is_dm=False,
            name=infer_name(posts, gazetteers),
            character_class=infer_class(posts, gazetteers),
            race=infer_race(posts, gazetteers),
            pronouns=pronouns,
            inventory=extract_inventory(
                posts, pronouns, gazetteers, fallback=inventory_fallback
            ),
            spells=extract_spells(posts, gazetteers),
        )
    return profiles
