"""End-to-end CLI flows (in-process)."""

from __future__ import annotations

import pytest

from retroengine.cli import main


@pytest.fixture(scope="module")
def checkpoint(tmp_path_factory, fixtures_dir):
    path = tmp_path_factory.mktemp("cli") / "model.ckpt"
    rc = main([
        "train",
        "--corpus", str(fixtures_dir / "grammar_corpus.csv"),
        "--out", str(path),
        "--steps", "400",
        "--batch-size", "3",
        "--lr", "3e-3",
        "--d", "32",
        "--n-layers", "2",
        "--seed", "3",
    ])
    assert rc == 0
    return path


class TestTrainCommand:
    def test_checkpoint_written(self, checkpoint):
        assert checkpoint.exists() and checkpoint.stat().st_size > 0


class TestPredictCommand:
    def test_tab_separated_ranking(self, checkpoint, capsys):
        rc = main([
            "predict", "--checkpoint", str(checkpoint),
            "--smiles", "CCOCCO", "--topk", "3",
        ])
        assert rc == 0
        lines = capsys.readouterr().out.strip().split("\n")
        assert 1 <= len(lines) <= 3
        first = lines[0].split("\t")
        assert first[0] == "1" and len(first) == 7
        totals = [float(l.split("\t")[1]) for l in lines]
        assert totals == sorted(totals)

    def test_bad_smiles_exit_code(self, checkpoint, capsys):
        rc = main([
            "predict", "--checkpoint", str(checkpoint), "--smiles", "C1CC",
        ])
        assert rc == 1
        assert "error:" in capsys.readouterr().err


class TestPlanCommand:
    def test_route_output(self, checkpoint, fixtures_dir, capsys):
        rc = main([
            "plan", "--checkpoint", str(checkpoint),
            "--target", "CCOCCOCCO",
            "--blocks", str(fixtures_dir / "building_blocks.txt"),
        ])
        assert rc == 0
        out = capsys.readouterr().out
        assert "route with 2 steps" in out

    def test_no_route_exit_code(self, checkpoint, fixtures_dir, capsys):
        rc = main([
            "plan", "--checkpoint", str(checkpoint),
            "--target", "CCOCCOCCO",
            "--blocks", str(fixtures_dir / "building_blocks.txt"),
            "--max-expansions", "0",
        ])
        assert rc == 2


class TestVocabCommand:
    def test_summary_line(self, fixtures_dir, capsys):
        rc = main(["vocab", "--corpus", str(fixtures_dir / "mini_corpus.csv")])
        assert rc == 0
        out = capsys.readouterr().out
        assert out.startswith("records=50 ")
        assert "<empty>" in out


class TestExplainCommand:
    def test_heads(self, checkpoint, capsys):
        rc = main([
            "explain", "heads", "--checkpoint", str(checkpoint), "--smiles", "CCOCC",
        ])
        assert rc == 0
        out = capsys.readouterr().out
        assert out.count("head ") == 4
