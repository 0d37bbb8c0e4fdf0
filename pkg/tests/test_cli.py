"""CLI behavior: exit codes, idempotency, end-to-end command flows."""

import json

import pytest

from pbpstate.cli import main


def run(argv, capsys=None):
    code = main(argv)
    return code


@pytest.fixture()
def synth_corpus(tmp_path):
    corpus = tmp_path / "corpus.jsonl"
    gold = tmp_path / "gold.jsonl"
    code = main(
        [
            "synth", "--seed", "3", "--campaigns", "3", "--players", "4",
            "--turns", "30", "--out", str(corpus), "--gold", str(gold),
        ]
    )
    assert code == 0
    return corpus, gold


def test_version(capsys):
    with pytest.raises(SystemExit) as excinfo:
        main(["--version"])
    assert excinfo.value.code == 0
    assert "pbpstate" in capsys.readouterr().out


def test_unknown_flag_exits_one(capsys):
    with pytest.raises(SystemExit) as excinfo:
        main(["stats", "--nonsense"])
    assert excinfo.value.code == 1
    assert "usage" in capsys.readouterr().err


def test_missing_subcommand_exits_one(capsys):
    with pytest.raises(SystemExit) as excinfo:
        main([])
    assert excinfo.value.code == 1


def test_corrupt_input_exits_two(tmp_path, capsys):
    bad = tmp_path / "bad.jsonl"
    bad.write_text('{"campaign_id": "c", "posts": [\n', encoding="utf-8")
    code = main(["stats", "--in", str(bad)])
    assert code == 2
    assert "line 1" in capsys.readouterr().err


def test_missing_file_exits_two(tmp_path, capsys):
    code = main(["stats", "--in", str(tmp_path / "nope.jsonl")])
    assert code == 2


def test_synth_deterministic_and_idempotent(tmp_path):
    first = tmp_path / "a.jsonl"
    second = tmp_path / "b.jsonl"
    argv = ["synth", "--seed", "7", "--campaigns", "2", "--turns", "20",
            "--players", "4"]
    assert main(argv + ["--out", str(first)]) == 0
    assert main(argv + ["--out", str(second)]) == 0
    assert first.read_bytes() == second.read_bytes()


def test_stats_table_and_json(synth_corpus, capsys):
    corpus, _ = synth_corpus
    assert main(["stats", "--in", str(corpus)]) == 0
    table = capsys.readouterr().out
    assert "Total turns" in table
    assert main(["stats", "--in", str(corpus), "--json"]) == 0
    stats = json.loads(capsys.readouterr().out)
    assert stats["total_turns"] == 90


def test_ingest_normalizes_and_adds_rolls(synth_corpus, tmp_path):
    corpus, _ = synth_corpus
    out = tmp_path / "ingested.jsonl"
    assert main(["ingest", "--in", str(corpus), "--out", str(out)]) == 0
    record = json.loads(out.read_text().splitlines()[0])
    assert "rolls" in record["posts"][0]


def test_annotate_eval_round_trip(synth_corpus, tmp_path, capsys):
    corpus, gold = synth_corpus
    annotated = tmp_path / "annotated.jsonl"
    assert (
        main(["annotate", "--in", str(corpus), "--out", str(annotated)]) == 0
    )
    record = json.loads(annotated.read_text().splitlines()[0])
    assert "turn_slots" in record and "coverage" in record

    assert (
        main(
            [
                "eval-gst", "--pred", str(annotated), "--gold", str(gold),
                "--slots", "name,character_class,race,pronouns", "--json",
            ]
        )
        == 0
    )
    report = json.loads(capsys.readouterr().out)
    assert report["per_slot"]["character_class"] == 1.0


def test_annotate_is_idempotent(synth_corpus, tmp_path):
    corpus, _ = synth_corpus
    first = tmp_path / "x.jsonl"
    second = tmp_path / "y.jsonl"
    assert main(["annotate", "--in", str(corpus), "--out", str(first)]) == 0
    assert main(["annotate", "--in", str(corpus), "--out", str(second)]) == 0
    assert first.read_bytes() == second.read_bytes()


def test_train_icooc_from_labeled_file(tmp_path):
    labeled = tmp_path / "paragraphs.jsonl"
    rows = [
        {"text": "the quiet road bends toward the ford", "label": "IC"},
        {"text": "a soft rain settles over the camp", "label": "IC"},
        {"text": "add your bonus to that roll first", "label": "OOC"},
        {"text": "you need a 12 or better to pass", "label": "OOC"},
    ]
    labeled.write_text(
        "\n".join(json.dumps(r) for r in rows) + "\n", encoding="utf-8"
    )
    model = tmp_path / "model.txt"
    assert main(["train-icooc", "--labeled", str(labeled), "--out", str(model)]) == 0
    assert model.read_text().startswith("ICOOC-MODEL v1")


def test_train_icooc_corpus_without_gold_is_usage_error(tmp_path, capsys):
    with pytest.raises(SystemExit) as excinfo:
        main(["train-icooc", "--corpus", "x.jsonl", "--out", "m.txt"])
    assert excinfo.value.code == 1


def test_train_classify_flow(synth_corpus, tmp_path):
    corpus, gold = synth_corpus
    model = tmp_path / "model.txt"
    labeled = tmp_path / "labels.jsonl"
    assert (
        main(
            [
                "train-icooc", "--corpus", str(corpus), "--gold", str(gold),
                "--out", str(model),
            ]
        )
        == 0
    )
    assert model.read_text().startswith("ICOOC-MODEL v1")
    assert (
        main(
            [
                "classify", "--model", str(model), "--in", str(corpus),
                "--out", str(labeled),
            ]
        )
        == 0
    )
    rows = [json.loads(line) for line in labeled.read_text().splitlines()]
    assert {row["turn_label"] for row in rows} == {"IC", "OOC"}


def test_serialize_variants(synth_corpus, tmp_path):
    corpus, _ = synth_corpus
    annotated = tmp_path / "annotated.jsonl"
    main(["annotate", "--in", str(corpus), "--out", str(annotated)])
    for variant, expected_blocks in [("none", 0), ("curr", 1)]:
        out = tmp_path / f"examples_{variant}.jsonl"
        assert (
            main(
                [
                    "serialize", "--in", str(annotated), "--out", str(out),
                    "--variant", variant,
                ]
            )
            == 0
        )
        rows = [json.loads(line) for line in out.read_text().splitlines()]
        assert len(rows) == 3 * 29
        for row in rows:
            blocks = sum(1 for t in row["context"] if t["state"] is not None)
            blocks += 1 if row["target"]["state"] is not None else 0
            assert blocks == expected_blocks


def test_agreement_command(tmp_path, capsys):
    ratings = tmp_path / "ratings.jsonl"
    lines = [
        json.dumps({"labels": ["yes", "yes", "no"], "scores": [4, 5, 2]}),
        json.dumps({"labels": ["yes", "yes", "yes"], "scores": [1, 2, 1]}),
        json.dumps({"labels": ["no", "no", "yes"], "scores": [5, 5, 3]}),
    ]
    ratings.write_text("\n".join(lines) + "\n", encoding="utf-8")
    assert main(["agreement", "--in", str(ratings), "--categories", "2"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["pairwise_agreement"] == pytest.approx((1 / 3 + 1.0 + 1 / 3) / 3)
    assert out["randolph_kappa"] == pytest.approx(
        2 * out["pairwise_agreement"] - 1
    )
    assert "kendall_tau_mean" in out


def test_config_file_provides_defaults(synth_corpus, tmp_path):
    corpus, _ = synth_corpus
    config = tmp_path / "run.ini"
    config.write_text("[combat]\ngap_turns = 5\n", encoding="utf-8")
    out_config = tmp_path / "with_config.jsonl"
    out_flag = tmp_path / "with_flag.jsonl"
    assert (
        main(
            [
                "--config", str(config), "annotate", "--in", str(corpus),
                "--out", str(out_config),
            ]
        )
        == 0
    )
    assert (
        main(
            [
                "--config", str(config), "annotate", "--in", str(corpus),
                "--out", str(out_flag), "--gap-turns", "3",
            ]
        )
        == 0
    )
    # Flag wins: the gap-3 output matches a plain gap-3 run.
    plain = tmp_path / "plain.jsonl"
    main(["annotate", "--in", str(corpus), "--out", str(plain)])
    assert out_flag.read_bytes() == plain.read_bytes()
