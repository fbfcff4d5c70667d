"""Converged density matrices on disk, for warm-starting nearby solves.

A checkpoint is an ``.npz`` archive with a JSON header array describing the
format version and the key ``(d, N, lam, gamma, basis)``.
"""
from __future__ import annotations

import json
from pathlib import Path
from typing import Optional

import numpy as np

from ..model import SystemSpec

FORMAT_VERSION = 1


def checkpoint_key(spec: SystemSpec, basis: str) -> dict:
    return {"d": spec.dimension, "N": spec.particles, "lam": spec.lam,
            "gamma": spec.trap_scale, "kappa": spec.kappa, "basis": basis}


def save_checkpoint(path, spec: SystemSpec, basis: str, arrays: dict) -> None:
    header = {"version": FORMAT_VERSION, "key": checkpoint_key(spec, basis),
              "arrays": sorted(arrays)}
    payload = {f"a_{name}": np.asarray(v) for name, v in arrays.items()}
    with open(path, "wb") as fh:
        np.savez(fh, header=np.array(json.dumps(header)), **payload)


def load_checkpoint(path, spec: Optional[SystemSpec] = None,
                    basis: Optional[str] = None) -> Optional[dict]:
    """Arrays stored at ``path``, or ``None`` if missing or keyed differently.

    With ``spec`` and ``basis`` the stored key must match exactly.
    """
    path = Path(path)
    if not path.exists():
        return None
    with np.load(path, allow_pickle=False) as data:
        header = json.loads(str(data["header"]))
        if header.get("version") != FORMAT_VERSION:
            return None
        if spec is not None and header["key"] != checkpoint_key(spec, basis):
            return None
        return {name: data[f"a_{name}"] for name in header["arrays"]}
