"""Shared fixtures: fixture paths and session-scoped trained models."""

from __future__ import annotations

from pathlib import Path

import pytest

import retroengine.data
from retroengine.data import build_vocab, load_corpus
from retroengine.model import ModelConfig
from retroengine.train import TrainConfig, build_model, prepare_samples, train_model

FIXTURES = Path(retroengine.data.__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


def _train(corpus, split, model_kwargs, train_kwargs):
    records = load_corpus(corpus, split=split)
    vocab = build_vocab(records)
    config = ModelConfig(vocab_size=len(vocab), **model_kwargs)
    samples = prepare_samples(records, vocab, config)
    tconfig = TrainConfig(**train_kwargs)
    model = build_model(config, vocab, tconfig)
    log = train_model(model, samples, tconfig)
    return {
        "model": model,
        "vocab": vocab,
        "config": config,
        "samples": samples,
        "log": log,
        "records": records,
    }


MINI_MODEL_KW = dict(d=64, d_k=16, n_head=4, n_layers=2, seed=0)
MINI_TRAIN_KW = dict(steps=2000, batch_size=8, learning_rate=3e-3, seed=0)
GRAMMAR_MODEL_KW = dict(d=32, d_k=8, n_head=4, n_layers=2, seed=3)
GRAMMAR_TRAIN_KW = dict(steps=400, batch_size=3, learning_rate=3e-3, seed=3)


@pytest.fixture(scope="session")
def mini_bundle():
    """Model memorizing the 40-reaction training corpus (minutes-scale)."""
    return _train(FIXTURES / "mini_corpus.csv", "train", MINI_MODEL_KW, MINI_TRAIN_KW)


@pytest.fixture(scope="session")
def mini_bundle_no_cl():
    """Same run without the contrastive matching term (ablation)."""
    return _train(
        FIXTURES / "mini_corpus.csv",
        "train",
        MINI_MODEL_KW,
        {**MINI_TRAIN_KW, "no_CL": True},
    )


@pytest.fixture(scope="session")
def grammar_bundle():
    """Small model memorizing the 3-rule chain grammar (seconds-scale)."""
    return _train(
        FIXTURES / "grammar_corpus.csv", "train", GRAMMAR_MODEL_KW, GRAMMAR_TRAIN_KW
    )
