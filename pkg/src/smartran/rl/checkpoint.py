"""Flat binary checkpoints for groups of networks.

Layout of ``<name>.bin`` (all integers little-endian uint32)::

    magic        8 bytes  b"SMRNCKPT"
    version      uint32   (1)
    n_networks   uint32
    per network: n_sizes uint32, then n_sizes x uint32 layer widths
    payload      float64 little-endian; networks in header order, each as
                 W0 (row-major), b0, W1, b1, ...

``<name>.json`` is the sidecar: network names in header order, output
activations and free-form metadata.
"""
from __future__ import annotations

import json
import struct
from pathlib import Path
from typing import Dict, Optional

import numpy as np

from .mlp import Mlp

MAGIC = b"SMRNCKPT"
VERSION = 1


class CheckpointError(ValueError):
    pass


def save_networks(path, networks: Dict[str, Mlp], metadata: Optional[dict] = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = [MAGIC, struct.pack("<II", VERSION, len(networks))]
    for net in networks.values():
        header.append(struct.pack(f"<I{len(net.layer_sizes)}I", len(net.layer_sizes), *net.layer_sizes))
    payload = np.concatenate([net.get_flat() for net in networks.values()]).astype("<f8")
    bin_path = path.with_suffix(".bin")
    bin_path.write_bytes(b"".join(header) + payload.tobytes())
    sidecar = {
        "format": "smartran-checkpoint",
        "version": VERSION,
        "networks": [{"name": name, "layer_sizes": net.layer_sizes, "out_activation": net.out_activation}
                     for name, net in networks.items()],
        "metadata": metadata or {},
    }
    path.with_suffix(".json").write_text(json.dumps(sidecar, indent=2, sort_keys=True))
    return bin_path


def load_networks(path) -> tuple:
    """Return ``({name: Mlp}, metadata)``."""
    path = Path(path)
    raw = path.with_suffix(".bin").read_bytes()
    sidecar = json.loads(path.with_suffix(".json").read_text())
    if raw[:8] != MAGIC:
        raise CheckpointError(f"{path}: bad magic {raw[:8]!r}")
    version, n_nets = struct.unpack_from("<II", raw, 8)
    if version != VERSION:
        raise CheckpointError(f"{path}: unsupported version {version}")
    offset = 16
    shapes = []
    for _ in range(n_nets):
        (n,) = struct.unpack_from("<I", raw, offset)
        shapes.append(list(struct.unpack_from(f"<{n}I", raw, offset + 4)))
        offset += 4 + 4 * n
    infos = sidecar["networks"]
    if len(infos) != n_nets or any(i["layer_sizes"] != s for i, s in zip(infos, shapes)):
        raise CheckpointError(f"{path}: sidecar does not match binary header")
    payload = np.frombuffer(raw, dtype="<f8", offset=offset)
    nets = {}
    i = 0
    for info, sizes in zip(infos, shapes):
        net = Mlp(sizes, 0, info["out_activation"])
        net.set_flat(payload[i:i + net.n_params])
        i += net.n_params
        nets[info["name"]] = net
    if i != payload.size:
        raise CheckpointError(f"{path}: payload length mismatch")
    return nets, sidecar["metadata"]


def save_agent(path, agent, metadata: Optional[dict] = None) -> Path:
    return save_networks(path, agent.networks(), metadata)


def load_agent(path, agent) -> dict:
    """Copy checkpointed parameters into an agent built with the same shapes."""
    nets, metadata = load_networks(path)
    own = agent.networks()
    if set(nets) != set(own):
        raise CheckpointError(f"{path}: networks {sorted(nets)} != agent's {sorted(own)}")
    for name, net in nets.items():
        if net.layer_sizes != own[name].layer_sizes:
            raise CheckpointError(f"{path}: {name} shape {net.layer_sizes} != {own[name].layer_sizes}")
        own[name].set_flat(net.get_flat())
    return metadata
