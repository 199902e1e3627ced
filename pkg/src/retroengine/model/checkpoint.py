"""Self-describing binary checkpoint format.

Layout (little-endian):

    magic   8 bytes  b"RETROCKP"
    version u32
    hlen    u32      header length in bytes
    header  JSON     {"config": ..., "vocab": [[canonical, freq], ...],
                      "metadata": {...}}
    count   u32      number of tensors
    per tensor:
        nlen u16, name utf-8, ndim u8, dims u32 each, data f32
    digest  32 bytes sha256 of everything above
"""

from __future__ import annotations

import hashlib
import io
import json
import struct
from typing import Optional, Tuple

import numpy as np
import torch

from ..data import LeavingGroupVocab
from ..errors import ChecksumError, ConfigError, VersionError
from .config import ModelConfig

MAGIC = b"RETROCKP"
FORMAT_VERSION = 1

#: Config fields that must match for a checkpoint to load into a session.
STRUCTURAL_FIELDS = (
    "d",
    "d_k",
    "n_head",
    "n_layers",
    "max_hop",
    "k_hydrogen",
    "vocab_size",
    "count_clip",
    "max_degree",
    "n_reaction_types",
    "max_gates",
)


def save_checkpoint(
    path: str,
    model: "torch.nn.Module",
    config: ModelConfig,
    vocab: LeavingGroupVocab,
    metadata: Optional[dict] = None,
) -> None:
    buf = io.BytesIO()
    buf.write(MAGIC)
    buf.write(struct.pack("<I", FORMAT_VERSION))
    header = json.dumps(
        {
            "config": config.to_dict(),
            "vocab": [[e.canonical, e.frequency] for e in vocab.entries],
            "metadata": metadata or {},
        }
    ).encode("utf-8")
    buf.write(struct.pack("<I", len(header)))
    buf.write(header)
    state = model.state_dict()
    names = sorted(state)
    buf.write(struct.pack("<I", len(names)))
    for name in names:
        tensor = state[name].detach().cpu().to(torch.float32).numpy()
        encoded = name.encode("utf-8")
        buf.write(struct.pack("<H", len(encoded)))
        buf.write(encoded)
        buf.write(struct.pack("<B", tensor.ndim))
        for dim in tensor.shape:
            buf.write(struct.pack("<I", dim))
        buf.write(tensor.astype("<f4").tobytes())
    payload = buf.getvalue()
    with open(path, "wb") as fh:
        fh.write(payload)
        fh.write(hashlib.sha256(payload).digest())


def load_checkpoint(path: str) -> Tuple[ModelConfig, LeavingGroupVocab, dict, dict]:
    """Returns (config, vocab, state_dict, metadata); validates checksum."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < len(MAGIC) + 4 + 32 or blob[: len(MAGIC)] != MAGIC:
        raise VersionError(f"{path}: not a checkpoint file")
    payload, digest = blob[:-32], blob[-32:]
    if hashlib.sha256(payload).digest() != digest:
        raise ChecksumError(f"{path}: checksum mismatch (corrupt or truncated)")
    off = len(MAGIC)
    (version,) = struct.unpack_from("<I", payload, off)
    off += 4
    if version != FORMAT_VERSION:
        raise VersionError(f"{path}: format version {version}, expected {FORMAT_VERSION}")
    (hlen,) = struct.unpack_from("<I", payload, off)
    off += 4
    header = json.loads(payload[off : off + hlen].decode("utf-8"))
    off += hlen
    config = ModelConfig.from_dict(header["config"])
    vocab = LeavingGroupVocab()
    for canonical, freq in header["vocab"]:
        vocab.add(canonical, freq)
    (count,) = struct.unpack_from("<I", payload, off)
    off += 4
    state = {}
    for _ in range(count):
        (nlen,) = struct.unpack_from("<H", payload, off)
        off += 2
        name = payload[off : off + nlen].decode("utf-8")
        off += nlen
        (ndim,) = struct.unpack_from("<B", payload, off)
        off += 1
        dims = struct.unpack_from(f"<{ndim}I", payload, off) if ndim else ()
        off += 4 * ndim
        size = int(np.prod(dims, dtype=np.int64)) if ndim else 1
        arr = np.frombuffer(payload, dtype="<f4", count=size, offset=off).reshape(dims)
        off += 4 * size
        state[name] = torch.from_numpy(arr.copy())
    if off != len(payload):
        raise ChecksumError(f"{path}: {len(payload) - off} trailing bytes")
    return config, vocab, state, header["metadata"]


def check_compatible(loaded: ModelConfig, session: ModelConfig) -> None:
    for name in STRUCTURAL_FIELDS:
        if getattr(loaded, name) != getattr(session, name):
            raise ConfigError(
                f"checkpoint {name}={getattr(loaded, name)} incompatible with "
                f"session {name}={getattr(session, name)}"
            )


def load_model(path: str, expected: Optional[ModelConfig] = None):
    """Rebuild a RetroModel from a checkpoint file."""
    from .model import RetroModel

    config, vocab, state, metadata = load_checkpoint(path)
    if expected is not None:
        check_compatible(config, expected)
    model = RetroModel(config, vocab)
    model.load_state_dict(state)
    model.eval()
    return model, metadata
