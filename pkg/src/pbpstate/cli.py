"""Command-line interface wiring every stage into subcommands.

Exit codes: 0 success, 1 usage error, 2 data error. Diagnostics go to
stderr; data goes to files or stdout. A checked-in INI config file can
pin defaults (sections [paths], [combat], [fill], [serialize], [run]);
explicit flags always win over the config file.
"""

from __future__ import annotations

import argparse
import configparser
import json
import logging
import sys
from typing import Any, Sequence

from . import __version__
from .combat import CombatDetectorConfig
from .errors import PbpError
from .evaluation import (
    CorpusStats,
    corpus_stats,
    kendall_tau,
    pairwise_agreement,
    randolph_kappa,
    slot_accuracy,
)
from .gazetteers import load_gazetteers
from .icooc import IC, LabeledParagraph, label_turn, load_model, save_model, train
from .pipeline import (
    SLOT_KEYS,
    annotate_corpus,
    annotated_to_record,
    gold_to_record,
    slot_rows_from_record,
    turns_from_record,
    validate_record,
)
from .serialize import ControlVariant, build_examples, write_examples
from .synth import SignalRates, SynthConfig, generate_corpus, labeled_paragraphs
from .transcripts import (
    dump_json_line,
    iter_jsonl,
    load_campaigns,
    write_campaigns,
)

log = logging.getLogger("pbpstate")

USAGE_EXIT = 1
DATA_EXIT = 2


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on bad usage; the contract here is exit 1."""

    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(USAGE_EXIT)


def _read_config(path: str | None) -> configparser.ConfigParser:
    config = configparser.ConfigParser()
    if path is not None:
        with open(path, "r", encoding="utf-8") as handle:
            config.read_file(handle)
    return config


def _setting(
    flag_value: Any, config: configparser.ConfigParser, section: str, key: str,
    default: Any, cast: type = str,
) -> Any:
    if flag_value is not None:
        return flag_value
    if config.has_option(section, key):
        raw = config.get(section, key)
        if cast is bool:
            return raw.strip().lower() in ("1", "true", "yes", "on")
        return cast(raw)
    return default


def _write_lines(path: str, lines: list[str]) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for line in lines:
            handle.write(line)
            handle.write("\n")


def _stats_table(stats: CorpusStats) -> str:
    rows = [
        ("Number of campaigns", f"{stats.num_campaigns}"),
        ("Average players per campaign", f"{stats.avg_players_per_campaign:g}"),
        ("Average turns per campaign", f"{stats.avg_turns_per_campaign:g}"),
        ("Average words per campaign", f"{stats.avg_words_per_campaign:g}"),
        ("Total turns", f"{stats.total_turns}"),
        ("Total words", f"{stats.total_words}"),
        ("Average dice rolls per campaign", f"{stats.avg_rolls_per_campaign:g}"),
        ("Total dice rolls", f"{stats.total_rolls}"),
    ]
    width = max(len(label) for label, _ in rows)
    return "\n".join(f"{label:<{width}}  {value:>12}" for label, value in rows)


def _cmd_ingest(args: argparse.Namespace, config: configparser.ConfigParser) -> int:
    campaigns = list(load_campaigns(args.infile))
    write_campaigns(args.out, campaigns, include_rolls=True)
    log.info("ingested %d campaigns -> %s", len(campaigns), args.out)
    return 0


def _cmd_stats(args: argparse.Namespace, config: configparser.ConfigParser) -> int:
    stats = corpus_stats(load_campaigns(args.infile))
    if args.json:
        print(json.dumps(stats.to_dict(), indent=2))
    else:
        print(_stats_table(stats))
    return 0


def _cmd_synth(args: argparse.Namespace, config: configparser.ConfigParser) -> int:
    synth_config = SynthConfig(
        seed=args.seed,
        num_campaigns=args.campaigns,
        players_per_campaign=args.players,
        turns_per_campaign=args.turns,
        combat_density=args.combat_density,
        signal_rates=SignalRates.uniform(args.signal_rate),
        ooc_fraction=args.ooc_fraction,
        distractor_rate=args.distractor_rate,
        loose_check_rate=args.loose_check_rate,
        gap_turns=args.gap_turns,
    )
    corpus = generate_corpus(synth_config)
    write_campaigns(args.out, (c for c, _ in corpus.pairs))
    if args.gold:
        _write_lines(
            args.gold,
            [dump_json_line(gold_to_record(c, g)) for c, g in corpus.pairs],
        )
    log.info(
        "generated %d campaigns (%d turns) -> %s",
        len(corpus.pairs),
        int(corpus.expected_stats["total_turns"]),
        args.out,
    )
    return 0


def _cmd_annotate(args: argparse.Namespace, config: configparser.ConfigParser) -> int:
    gazetteer_path = _setting(
        args.gazetteers, config, "paths", "gazetteers", None
    )
    gazetteers = load_gazetteers(gazetteer_path)
    combat_config = CombatDetectorConfig(
        gap_turns=_setting(args.gap_turns, config, "combat", "gap_turns", 3, int),
        attack_window_chars=_setting(
            args.attack_window, config, "combat", "attack_window_chars", 100, int
        ),
    )
    icooc_model = load_model(args.icooc_model) if args.icooc_model else None
    fill_threshold = _setting(
        args.fill_threshold, config, "fill", "threshold", 0.5, float
    )
    workers = _setting(args.workers, config, "run", "workers", 1, int)

    annotated = annotate_corpus(
        load_campaigns(args.infile),
        gazetteers,
        combat_config,
        icooc_model=icooc_model,
        inventory_fallback=args.inventory_fallback,
        fill=not args.no_fill,
        fill_threshold=fill_threshold,
        workers=workers,
    )
    records = [annotated_to_record(ac) for ac in annotated]
    # Self-validation: every record must parse back into valid domain types.
    for record in records:
        validate_record(record)
    _write_lines(args.out, [dump_json_line(r) for r in records])
    mean_coverage = (
        sum(ac.coverage for ac in annotated) / len(annotated) if annotated else 0.0
    )
    log.info(
        "annotated %d campaigns (mean heuristic coverage %.3f) -> %s",
        len(annotated),
        mean_coverage,
        args.out,
    )
    return 0


def _cmd_train_icooc(
    args: argparse.Namespace, config: configparser.ConfigParser
) -> int:
    data: list[LabeledParagraph] = []
    if args.labeled:
        for lineno, record in iter_jsonl(args.labeled):
            data.append(
                LabeledParagraph(text=record["text"], label=record["label"])
            )
    else:
        from .models import GoldAnnotations

        campaigns = {c.campaign_id: c for c in load_campaigns(args.corpus)}
        for _, record in iter_jsonl(args.gold):
            campaign = campaigns[record["campaign_id"]]
            gold = GoldAnnotations.from_dict(record)
            data.extend(labeled_paragraphs([(campaign, gold)]))
    model = train(data, smoothing=args.smoothing, seed=args.seed)
    save_model(model, args.out)
    log.info("trained IC/OOC model on %d paragraphs -> %s", len(data), args.out)
    return 0


def _cmd_classify(args: argparse.Namespace, config: configparser.ConfigParser) -> int:
    model = load_model(args.model)
    lines = []
    for campaign in load_campaigns(args.infile):
        for post in campaign.posts:
            paragraph_labels, turn_label = label_turn(model, post)
            lines.append(
                dump_json_line(
                    {
                        "campaign_id": campaign.campaign_id,
                        "post_id": post.post_id,
                        "paragraph_labels": paragraph_labels,
                        "turn_label": turn_label,
                        "in_character": turn_label == IC,
                    }
                )
            )
    _write_lines(args.out, lines)
    return 0


def _cmd_serialize(
    args: argparse.Namespace, config: configparser.ConfigParser
) -> int:
    variant = ControlVariant(
        _setting(args.variant, config, "serialize", "variant", "none")
    )
    window = _setting(args.window, config, "serialize", "window", 7, int)
    examples = []
    for _, record in iter_jsonl(args.infile):
        campaign_id, turns = turns_from_record(record)
        examples.extend(build_examples(campaign_id, turns, variant, window=window))
    write_examples(args.out, examples)
    log.info("serialized %d examples (%s) -> %s", len(examples), variant.value, args.out)
    return 0


def _cmd_eval_gst(args: argparse.Namespace, config: configparser.ConfigParser) -> int:
    pred_rows: list[dict[str, Any]] = []
    for _, record in iter_jsonl(args.pred):
        pred_rows.extend(slot_rows_from_record(record))
    gold_rows: list[dict[str, Any]] = []
    for _, record in iter_jsonl(args.gold):
        gold_rows.extend(slot_rows_from_record(record))
    slots = args.slots.split(",") if args.slots else list(SLOT_KEYS)
    report = slot_accuracy(pred_rows, gold_rows, slots)
    if args.json:
        print(json.dumps(report.to_dict(), indent=2))
    else:
        width = max(len(s) for s in slots + ["joint", "all (mean)"])
        print(f"{'slot':<{width}}  accuracy  support")
        for slot in slots:
            print(
                f"{slot:<{width}}  {report.per_slot[slot]:>8.3f}"
                f"  {report.support[slot]:>7}"
            )
        print(f"{'all (mean)':<{width}}  {report.mean_accuracy:>8.3f}")
        print(
            f"{'joint':<{width}}  {report.joint_accuracy:>8.3f}"
            f"  {report.joint_support:>7}"
        )
    return 0


def _cmd_agreement(
    args: argparse.Namespace, config: configparser.ConfigParser
) -> int:
    label_items: list[list[Any]] = []
    score_items: list[list[float]] = []
    for _, record in iter_jsonl(args.infile):
        if "labels" in record:
            label_items.append(record["labels"])
        if "scores" in record:
            score_items.append([float(v) for v in record["scores"]])
    result: dict[str, Any] = {}
    if label_items:
        observed = pairwise_agreement(label_items)
        categories = args.categories or len(
            {label for item in label_items for label in item}
        )
        result["pairwise_agreement"] = observed
        result["categories"] = categories
        result["randolph_kappa"] = randolph_kappa(observed, categories)
    if score_items:
        raters = len(score_items[0])
        taus = []
        for i in range(raters):
            for j in range(i + 1, raters):
                taus.append(
                    kendall_tau(
                        [item[i] for item in score_items],
                        [item[j] for item in score_items],
                    )
                )
        result["kendall_tau_mean"] = sum(taus) / len(taus)
        result["kendall_tau_pairs"] = len(taus)
    if not result:
        raise PbpError("ratings file held neither labels nor scores")
    print(json.dumps(result, indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pbpstate", description=__doc__)
    parser.add_argument(
        "--version", action="version", version=f"pbpstate {__version__}"
    )
    parser.add_argument("--config", help="INI config file; flags override it")
    parser.add_argument(
        "-v", "--verbose", action="store_true", help="log progress to stderr"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate a transcript and materialize rolls")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("stats", help="corpus statistics")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_stats)

    p = sub.add_parser("synth", help="generate a synthetic corpus with gold labels")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--campaigns", type=int, default=10)
    p.add_argument("--players", type=int, default=5)
    p.add_argument("--turns", type=int, default=50)
    p.add_argument("--combat-density", type=float, default=0.04)
    p.add_argument("--signal-rate", type=float, default=1.0)
    p.add_argument("--ooc-fraction", type=float, default=0.3)
    p.add_argument("--distractor-rate", type=float, default=0.1)
    p.add_argument("--loose-check-rate", type=float, default=0.05)
    p.add_argument("--gap-turns", type=int, default=3)
    p.add_argument("--out", required=True)
    p.add_argument("--gold")
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser(
        "annotate",
        help="profiles + combat + actions + IC/OOC + slot fill over a corpus",
    )
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--gazetteers")
    p.add_argument("--gap-turns", type=int)
    p.add_argument("--attack-window", type=int)
    p.add_argument("--icooc-model")
    p.add_argument("--no-fill", action="store_true")
    p.add_argument("--fill-threshold", type=float)
    p.add_argument("--inventory-fallback", action="store_true")
    p.add_argument("--workers", type=int)
    p.set_defaults(func=_cmd_annotate)

    p = sub.add_parser("train-icooc", help="train the IC/OOC paragraph classifier")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--labeled", help="JSONL of {text, label} paragraphs")
    group.add_argument("--corpus", help="transcript JSONL (needs --gold)")
    p.add_argument("--gold", help="gold JSONL with paragraph labels")
    p.add_argument("--smoothing", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_train_icooc)

    p = sub.add_parser("classify", help="label a corpus with a trained model")
    p.add_argument("--model", required=True)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_classify)

    p = sub.add_parser("serialize", help="emit fine-tuning examples")
    p.add_argument("--in", dest="infile", required=True, help="annotated JSONL")
    p.add_argument("--out", required=True)
    p.add_argument("--variant", choices=[v.value for v in ControlVariant])
    p.add_argument("--window", type=int)
    p.set_defaults(func=_cmd_serialize)

    p = sub.add_parser("eval-gst", help="slot and joint accuracy against gold")
    p.add_argument("--pred", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--slots", help="comma-separated slot names")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_eval_gst)

    p = sub.add_parser("agreement", help="rater agreement statistics")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--categories", type=int)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_agreement)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(message)s",
    )
    if args.command == "train-icooc" and args.corpus and not args.gold:
        parser.error("--corpus requires --gold")
    try:
        config = _read_config(args.config)
        return args.func(args, config)
    except (PbpError, OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"pbpstate: error: {exc}", file=sys.stderr)
        return DATA_EXIT


if __name__ == "__main__":
    sys.exit(main())
