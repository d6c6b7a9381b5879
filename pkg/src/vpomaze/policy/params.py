"""Policy parameters and versioned checkpoint files.

Two architectures share one container: a linear softmax head over the
feature row (hidden = 0) and a one-hidden-layer tanh network.  Parameters
flatten to a single vector in a canonical order for the optimizer and for
finite-difference checks.

Checkpoints are JSON with a checksum over the canonical payload encoding;
loads verify the checksum, the format version, and the feature-layout
hash before accepting anything.
"""

import json
from dataclasses import dataclass, field
from hashlib import blake2s

import numpy as np

from ..maze_env import N_ACTIONS
from .features import FeatureSpec

__all__ = ["PolicyParams", "AdamState", "Checkpoint", "CheckpointError",
           "save_checkpoint", "load_checkpoint", "CHECKPOINT_VERSION"]

CHECKPOINT_VERSION = 1


def _param_shapes(spec: FeatureSpec, hidden: int) -> dict[str, tuple[int, ...]]:
    if hidden == 0:
        return {"w_out": (N_ACTIONS, spec.length)}
    return {
        "w_in": (hidden, spec.length),
        "w_out": (N_ACTIONS, hidden),
        "b_out": (N_ACTIONS,),
    }


@dataclass
class PolicyParams:
    spec: FeatureSpec
    hidden: int
    arrays: dict[str, np.ndarray]

    @classmethod
    def zeros(cls, spec: FeatureSpec, hidden: int = 0) -> "PolicyParams":
        if hidden < 0 or hidden > 128:
            raise ValueError("hidden width must be in 0..128")
        arrays = {k: np.zeros(sh) for k, sh in _param_shapes(spec, hidden).items()}
        return cls(spec=spec, hidden=hidden, arrays=arrays)

    def names(self) -> list[str]:
        return list(_param_shapes(self.spec, self.hidden))

    def flatten(self) -> np.ndarray:
        return np.concatenate([self.arrays[k].ravel() for k in self.names()])

    def with_flat(self, flat: np.ndarray) -> "PolicyParams":
        out = {}
        i = 0
        for k, sh in _param_shapes(self.spec, self.hidden).items():
            n = int(np.prod(sh))
            out[k] = flat[i:i + n].reshape(sh).copy()
            i += n
        if i != flat.size:
            raise ValueError(f"flat vector has {flat.size} entries, want {i}")
        return PolicyParams(spec=self.spec, hidden=self.hidden, arrays=out)

    def copy(self) -> "PolicyParams":
        return PolicyParams(self.spec, self.hidden,
                            {k: v.copy() for k, v in self.arrays.items()})

    @property
    def n_params(self) -> int:
        return sum(v.size for v in self.arrays.values())


@dataclass
class AdamState:
    m: np.ndarray
    v: np.ndarray
    t: int = 0

    @classmethod
    def zeros(cls, n: int) -> "AdamState":
        return cls(m=np.zeros(n), v=np.zeros(n), t=0)


class CheckpointError(Exception):
    """Unreadable, corrupt, or incompatible checkpoint."""


@dataclass
class Checkpoint:
    params: PolicyParams
    adam: AdamState | None
    step: int
    reference: PolicyParams | None
    train_config: dict | None = field(default=None)


def _arrays_to_json(arrays: dict[str, np.ndarray]) -> dict:
    return {k: v.tolist() for k, v in arrays.items()}


def _arrays_from_json(spec: FeatureSpec, hidden: int, data: dict) -> dict[str, np.ndarray]:
    shapes = _param_shapes(spec, hidden)
    if set(data) != set(shapes):
        raise CheckpointError(f"parameter names {sorted(data)} != {sorted(shapes)}")
    out = {}
    for k, sh in shapes.items():
        arr = np.asarray(data[k], dtype=np.float64)
        if arr.shape != sh:
            raise CheckpointError(f"array {k} has shape {arr.shape}, want {sh}")
        out[k] = arr
    return out


def _canonical(payload: dict) -> bytes:
    return json.dumps(payload, sort_keys=True, separators=(",", ":")).encode("ascii")


def save_checkpoint(path: str, params: PolicyParams, adam: AdamState | None = None,
                    step: int = 0, reference: PolicyParams | None = None,
                    train_config: dict | None = None) -> None:
    payload = {
        "version": CHECKPOINT_VERSION,
        "m": params.spec.m,
        "d": params.spec.d,
        "hidden": params.hidden,
        "feature_hash": params.spec.layout_hash(),
        "arrays": _arrays_to_json(params.arrays),
        "adam": None if adam is None else {"m": adam.m.tolist(), "v": adam.v.tolist(), "t": adam.t},
        "step": step,
        "reference": None if reference is None else _arrays_to_json(reference.arrays),
        "train_config": train_config,
    }
    body = _canonical(payload)
    doc = {"checksum": blake2s(body).hexdigest(), "payload": payload}
    with open(path, "w", encoding="ascii") as fh:
        fh.write(json.dumps(doc, sort_keys=True, separators=(",", ":")))
        fh.write("\n")


def load_checkpoint(path: str) -> Checkpoint:
    try:
        with open(path, encoding="ascii") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise CheckpointError(f"cannot read checkpoint {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise CheckpointError(f"checkpoint {path} is not valid JSON: {exc}") from None
    try:
        payload = doc["payload"]
        stated = doc["checksum"]
    except (KeyError, TypeError):
        raise CheckpointError(f"checkpoint {path} lacks payload/checksum") from None
    actual = blake2s(_canonical(payload)).hexdigest()
    if actual != stated:
        raise CheckpointError(
            f"checkpoint {path} corrupt: checksum {actual} != stated {stated}")
    version = payload.get("version")
    if version != CHECKPOINT_VERSION:
        raise CheckpointError(
            f"checkpoint {path} has format version {version}, want {CHECKPOINT_VERSION}")
    spec = FeatureSpec(m=int(payload["m"]), d=int(payload["d"]))
    if payload["feature_hash"] != spec.layout_hash():
        raise CheckpointError(
            f"checkpoint {path} feature layout {payload['feature_hash']} does not match "
            f"this build's {spec.layout_hash()}")
    hidden = int(payload["hidden"])
    params = PolicyParams(spec, hidden, _arrays_from_json(spec, hidden, payload["arrays"]))
    adam = None
    if payload["adam"] is not None:
        a = payload["adam"]
        adam = AdamState(m=np.asarray(a["m"], dtype=np.float64),
                         v=np.asarray(a["v"], dtype=np.float64), t=int(a["t"]))
        if adam.m.size != params.n_params or adam.v.size != params.n_params:
            raise CheckpointError("optimizer state size does not match parameters")
    reference = None
    if payload["reference"] is not None:
        reference = PolicyParams(spec, hidden,
                                 _arrays_from_json(spec, hidden, payload["reference"]))
    return Checkpoint(params=params, adam=adam, step=int(payload["step"]),
                      reference=reference, train_config=payload.get("train_config"))
