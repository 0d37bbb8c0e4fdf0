"""Game-state reconstruction and fine-tuning data tooling for play-by-post
tabletop RPG transcripts."""

__version__ = "0.1.0"
