import json
import subprocess
import sys

import pytest

from geotag.cli import main

SMALL = "m = 16\nK = 16\nfeature_maps = 16\ndense_hidden = 30\nbatch_size = 10\nepochs = 100\n"


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    (d / "gaz.txt").write_text("kathmandu nepal\nlima\nnew york\nmexico city\nquito\nosaka\n"
                               "san jose costa rica\nchile\n", encoding="utf-8")
    (d / "tmpl.txt").write_text("strong earthquake in {LOC}\nfelt shaking in {LOC} and {LOC}\n"
                                "quake near {LOC} today\nno damage reported here\n"
                                "prayers for everyone in {LOC}\n", encoding="utf-8")
    (d / "cfg.txt").write_text(SMALL, encoding="utf-8")
    assert main(["synth", "--gazetteer", str(d / "gaz.txt"), "--templates", str(d / "tmpl.txt"),
                 "--n", "60", "--seed", "7", "--out", str(d / "corpus.jsonl")]) == 0
    assert main(["train", "--corpus", str(d / "corpus.jsonl"), "--config", str(d / "cfg.txt"),
                 "--out", str(d / "model.bin"), "--log", str(d / "log.csv"), "--seed", "1"]) == 0
    return d


def test_synth_is_reproducible(workdir, tmp_path):
    out = tmp_path / "again.jsonl"
    main(["synth", "--gazetteer", str(workdir / "gaz.txt"), "--templates", str(workdir / "tmpl.txt"),
          "--n", "60", "--seed", "7", "--out", str(out)])
    assert out.read_bytes() == (workdir / "corpus.jsonl").read_bytes()


def test_synth_builtin_lists(capsys):
    assert main(["synth", "--n", "5", "--seed", "3", "--max-prefix", "2"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 5 and all("mask" in json.loads(x) for x in lines)


def test_train_log(workdir):
    lines = (workdir / "log.csv").read_text().splitlines()
    assert lines[0] == "epoch,mean_loss,seconds" and len(lines) == 101


def test_predict_finds_the_place(workdir, tmp_path, capsys):
    src = tmp_path / "in.txt"
    src.write_text("strong earthquake in kathmandu nepal\n\n@someone http://x.y\n", encoding="utf-8")
    assert main(["predict", "--model", str(workdir / "model.bin"), "--input", str(src)]) == 0
    rows = [json.loads(x) for x in capsys.readouterr().out.splitlines()]
    assert rows[0]["tokens"] == ["strong", "earthquake", "in", "kathmandu", "nepal"]
    assert rows[0]["locations"] == [{"index": 3, "token": "kathmandu"}, {"index": 4, "token": "nepal"}]
    assert rows[1] == {"text": "@someone http://x.y", "tokens": [], "locations": []}


def test_eval_csv(workdir, capsys):
    assert main(["eval", "--model", str(workdir / "model.bin"), "--corpus", str(workdir / "corpus.jsonl")]) == 0
    header, row = capsys.readouterr().out.splitlines()
    assert header == "precision,recall,f1,hamming_loss,jaccard,exact_match,count"
    assert float(row.split(",")[2]) > 0.9


def test_cv_and_sweep(workdir, tmp_path):
    cfg = tmp_path / "fast.txt"
    cfg.write_text(SMALL.replace("epochs = 100", "epochs = 2"), encoding="utf-8")
    out = tmp_path / "cv.csv"
    assert main(["cv", "--corpus", str(workdir / "corpus.jsonl"), "--config", str(cfg), "--k", "3",
                 "--seed", "0", "--out", str(out)]) == 0
    assert [x.split(",")[0] for x in out.read_text().splitlines()] == ["name", "fold0", "fold1", "fold2", "mean"]
    spec = tmp_path / "sweep.txt"
    spec.write_text("filter_widths = 2 | 3\n", encoding="utf-8")
    out = tmp_path / "sweep.csv"
    assert main(["sweep", "--corpus", str(workdir / "corpus.jsonl"), "--config", str(cfg), "--spec", str(spec),
                 "--k", "2", "--seed", "0", "--out", str(out)]) == 0
    assert len(out.read_text().splitlines()) == 3


def test_gradcheck_exit_codes(capsys, tmp_path):
    assert main(["gradcheck", "--seed", "0"]) == 0
    assert "max relative error" in capsys.readouterr().out
    assert main(["gradcheck", "--seed", "0", "--tolerance", "1e-30"]) == 1


def test_usage_errors_exit_2(capsys):
    for argv in ([], ["train"], ["synth", "--n", "3"], ["bogus"], ["gradcheck", "--seed", "x"]):
        with pytest.raises(SystemExit) as exc:
            main(argv)
        assert exc.value.code == 2


def test_data_errors_exit_1(tmp_path, capsys):
    bad = tmp_path / "bad.jsonl"
    bad.write_text('{"tokens": ["a", "b"], "mask": [1]}\n', encoding="utf-8")
    assert main(["train", "--corpus", str(bad), "--out", str(tmp_path / "m"), "--seed", "0"]) == 1
    assert "line 1" in capsys.readouterr().err
    junk = tmp_path / "junk.bin"
    junk.write_bytes(b"nope")
    assert main(["eval", "--model", str(junk), "--corpus", str(bad)]) == 1
    cfg = tmp_path / "cfg.txt"
    cfg.write_text("dropout = 2\n", encoding="utf-8")
    assert main(["gradcheck", "--seed", "0", "--config", str(cfg)]) == 1


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "geotag", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "gradcheck" in proc.stdout
