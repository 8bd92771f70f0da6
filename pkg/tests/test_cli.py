"""CLI surface: subcommands, exit codes, determinism."""

import csv
import json

import numpy as np
import pytest

from taco.cli import EXIT_DATA, EXIT_OK, EXIT_SERVICE, EXIT_USAGE, main
from taco.pipeline import read_jsonl, write_jsonl


@pytest.fixture()
def ramp_csv(tmp_path):
    path = tmp_path / "ramp.csv"
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["v"])
        for x in np.linspace(0.0, 1.0, 600):
            writer.writerow([x])
    return str(path)


def test_annotate_happy_path(ramp_csv, tmp_path):
    out = tmp_path / "ann.jsonl"
    code = main(["annotate", "--input", ramp_csv, "--out", str(out)])
    assert code == EXIT_OK
    rows = [json.loads(line) for line in out.read_text().splitlines()]
    assert len(rows) == 2
    assert "Rising" in rows[0]["classes"]
    assert rows[0]["params_digest"]


def test_unknown_flag_exits_one(capsys):
    assert main(["annotate", "--frobnicate"]) == EXIT_USAGE
    assert "usage" in capsys.readouterr().err.lower()


def test_unknown_subcommand_exits_one():
    assert main(["transmogrify"]) == EXIT_USAGE


def test_no_subcommand_prints_help(capsys):
    assert main([]) == EXIT_USAGE
    err = capsys.readouterr().err
    assert "annotate" in err and "eval" in err


def test_missing_input_file_exits_two():
    assert main(["annotate", "--input", "/nonexistent.csv"]) == EXIT_DATA


def test_caption_from_classes(capsys):
    code = main(["caption", "--classes", "Rising,Smooth"])
    assert code == EXIT_OK
    out = capsys.readouterr().out.strip()
    assert out == "The signal has a rising trend. The signal has a smooth shape."


def test_caption_unknown_class_exits_two():
    assert main(["caption", "--classes", "Wobbly"]) == EXIT_DATA


def test_caption_needs_exactly_one_source():
    assert main(["caption"]) == EXIT_USAGE


def test_caption_rephrase_unreachable_exits_three(monkeypatch):
    monkeypatch.delenv("TACO_LLM_ENDPOINT", raising=False)
    code = main(["caption", "--classes", "Rising", "--rephrase",
                 "--endpoint", "http://127.0.0.1:9/x"])
    assert code == EXIT_SERVICE


def test_caption_batch_from_annotations(tmp_path, capsys):
    rows = [{"id": "a", "classes": ["Rising", "Smooth"]},
            {"id": "b", "classes": []}]
    path = tmp_path / "ann.jsonl"
    write_jsonl(rows, path)
    assert main(["caption", "--input", str(path)]) == EXIT_OK
    lines = [json.loads(l) for l in capsys.readouterr().out.splitlines()]
    assert lines[0]["caption_base"].startswith("The signal has a rising trend.")
    assert lines[1]["caption_base"] == "The signal has no salient characteristics."


def test_synth_seed_determinism(tmp_path):
    out1 = tmp_path / "s1.jsonl"
    out2 = tmp_path / "s2.jsonl"
    for out in (out1, out2):
        code = main(["synth", "--count", "20", "--seed", "99", "--out", str(out)])
        assert code == EXIT_OK
    assert out1.read_bytes() == out2.read_bytes()


def test_synth_shape_constraint(tmp_path):
    out = tmp_path / "s.jsonl"
    assert main(["synth", "--count", "5", "--seed", "1", "--shapes", "Gaussian",
                 "--out", str(out)]) == EXIT_OK
    for record in read_jsonl(out):
        assert record.classes[0] == "Gaussian"


def test_synth_no_values(tmp_path):
    out = tmp_path / "s.jsonl"
    assert main(["synth", "--count", "2", "--seed", "1", "--no-values",
                 "--out", str(out)]) == EXIT_OK
    assert all(r.values is None for r in read_jsonl(out))


def test_dataset_jobs_determinism(ramp_csv, tmp_path):
    outs = []
    for jobs in ("1", "2"):
        out = tmp_path / f"d{jobs}.jsonl"
        code = main(["dataset", "--input", ramp_csv, "--jobs", jobs,
                     "--out", str(out)])
        assert code == EXIT_OK
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_dataset_skip_log(tmp_path):
    path = tmp_path / "bad.csv"
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["v"])
        for i in range(300):
            writer.writerow(["inf" if i == 10 else str(i)])
    out = tmp_path / "d.jsonl"
    skip_log = tmp_path / "skips.jsonl"
    code = main(["dataset", "--input", str(path), "--out", str(out),
                 "--skip-log", str(skip_log)])
    assert code == EXIT_OK
    assert out.read_bytes() == b""
    skips = [json.loads(l) for l in skip_log.read_text().splitlines()]
    assert len(skips) == 1 and "InvalidSignal" in skips[0]["reason"]


def test_nearnbr_subcommand(tmp_path):
    train = tmp_path / "train.jsonl"
    write_jsonl([{"id": f"t{i}", "caption_base": f"cap {i}",
                  "values": [float(i)] * 16} for i in range(4)], train)
    queries = tmp_path / "q.jsonl"
    write_jsonl([{"id": "q0", "caption_base": "", "values": [2.1] * 16}], queries)
    out = tmp_path / "pred.jsonl"
    code = main(["nearnbr", "--index", str(train), "--queries", str(queries),
                 "--out", str(out)])
    assert code == EXIT_OK
    row = json.loads(out.read_text())
    assert row["neighbor_id"] == "t2" and row["caption_base"] == "cap 2"


def test_nearnbr_predictions_feed_eval(tmp_path, capsys):
    # baseline predictions must evaluate directly against the query captions
    train = tmp_path / "train.jsonl"
    write_jsonl([{"id": f"t{i}", "caption_base": f"signal level {i} observed",
                  "values": [float(i)] * 16} for i in range(4)], train)
    queries = tmp_path / "q.jsonl"
    write_jsonl([{"id": "q0", "caption_base": "signal level 2 observed",
                  "values": [2.0] * 16}], queries)
    pred = tmp_path / "pred.jsonl"
    assert main(["nearnbr", "--index", str(train), "--queries", str(queries),
                 "--out", str(pred)]) == EXIT_OK
    assert main(["eval", "--candidates", str(pred),
                 "--references", str(queries)]) == EXIT_OK
    report = json.loads(capsys.readouterr().out)
    assert report["bleu_3"] == 1.0 and report["rouge_l"] == 1.0


def test_eval_subcommand_and_alignment_error(tmp_path, capsys):
    c = tmp_path / "c.jsonl"
    r = tmp_path / "r.jsonl"
    write_jsonl([{"id": "a", "caption_base": "the signal rises"}], c)
    write_jsonl([{"id": "a", "caption_base": "the signal rises"}], r)
    assert main(["eval", "--candidates", str(c), "--references", str(r)]) == EXIT_OK
    report = json.loads(capsys.readouterr().out)
    assert report["bleu_3"] == 1.0 and report["rouge_l"] == 1.0

    write_jsonl([{"id": "mismatched-id", "caption_base": "x"}], r)
    assert main(["eval", "--candidates", str(c), "--references", str(r)]) == EXIT_DATA
    err = capsys.readouterr().err
    assert "mismatched-id" in err


def test_eval_report_to_file(tmp_path):
    c = tmp_path / "c.jsonl"
    write_jsonl([{"id": "a", "caption_base": "x y z"}], c)
    out = tmp_path / "report.json"
    assert main(["eval", "--candidates", str(c), "--references", str(c),
                 "--out", str(out)]) == EXIT_OK
    assert json.loads(out.read_text())["sample_count"] == 1
