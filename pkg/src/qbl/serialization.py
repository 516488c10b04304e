"""JSON problem-spec encoding/decoding.

Complex matrices are encoded entrywise as [re, im] pairs; real matrices
(Gaussian covariance data) as plain numbers. Top-level problem specs carry
a "type" of bl_datum, gaussian, or channel_task.
"""

from __future__ import annotations

from typing import Any

import numpy as np

from .channels import Channel
from .engine import BLDatum
from .errors import SpecFormatError
from .gaussian import GaussianState, Subspace
from .operators import PSDOperator


def encode_matrix(m: np.ndarray) -> list:
    m = np.asarray(m)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m.astype(complex)]


def decode_matrix(data: Any, path: str = "matrix") -> np.ndarray:
    try:
        arr = np.asarray(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise SpecFormatError(path, f"not a numeric nested list: {exc}") from exc
    if arr.ndim == 3 and arr.shape[2] == 2:
        return arr[..., 0] + 1j * arr[..., 1]
    if arr.ndim == 2:
        return arr.astype(complex)
    raise SpecFormatError(path, f"expected a matrix of [re, im] pairs, got shape {arr.shape}")


def encode_channel(ch: Channel) -> dict:
    out = {
        "kraus": [encode_matrix(k) for k in ch.kraus],
        "dim_in": ch.dim_in,
        "dim_out": ch.dim_out,
        "label": ch.label,
        "allow_positive_only": ch.allow_positive_only,
    }
    if not np.all(ch.signs == 1.0):
        out["signs"] = [float(s) for s in ch.signs]
    return out


def decode_channel(data: Any, path: str = "channel") -> Channel:
    if not isinstance(data, dict) or "kraus" not in data:
        raise SpecFormatError(path, "expected an object with a 'kraus' field")
    kraus = [
        decode_matrix(k, f"{path}.kraus[{i}]") for i, k in enumerate(data["kraus"])
    ]
    return Channel(
        kraus,
        label=data.get("label", ""),
        allow_positive_only=bool(data.get("allow_positive_only", False)),
        signs=data.get("signs"),
    )


def encode_datum(d: BLDatum) -> dict:
    return {
        "type": "bl_datum",
        "q": [float(x) for x in d.q],
        "channels": [encode_channel(ch) for ch in d.channels],
        "sigma": encode_matrix(d.sigma.matrix),
        "sigmas": [encode_matrix(s.matrix) for s in d.sigmas],
        "c": d.c,
    }


def decode_datum(data: dict, path: str = "$") -> BLDatum:
    for key in ("q", "channels", "sigma", "sigmas"):
        if key not in data:
            raise SpecFormatError(f"{path}.{key}", "missing required field")
    channels = [
        decode_channel(c, f"{path}.channels[{i}]") for i, c in enumerate(data["channels"])
    ]
    try:
        sigma = PSDOperator(decode_matrix(data["sigma"], f"{path}.sigma"))
        sigmas = [
            PSDOperator(decode_matrix(s, f"{path}.sigmas[{i}]"))
            for i, s in enumerate(data["sigmas"])
        ]
    except ValueError as exc:
        raise SpecFormatError(f"{path}.sigma", str(exc)) from exc
    c = data.get("c")
    return BLDatum(data["q"], channels, sigma, sigmas, 0.0 if c is None else float(c))


def encode_gaussian_task(state: GaussianState, subspaces: list[Subspace], q: list[float]) -> dict:
    return {
        "type": "gaussian",
        "modes": state.modes,
        "cov": [[float(x) for x in row] for row in state.cov],
        "mean": [float(x) for x in state.mean],
        "subspaces": [[[float(x) for x in row] for row in s.basis] for s in subspaces],
        "q": [float(x) for x in q],
    }


def decode_gaussian_task(data: dict, path: str = "$") -> tuple[GaussianState, list[Subspace], list[float]]:
    for key in ("cov", "subspaces", "q"):
        if key not in data:
            raise SpecFormatError(f"{path}.{key}", "missing required field")
    cov = np.asarray(data["cov"], dtype=float)
    mean = np.asarray(data.get("mean", np.zeros(cov.shape[0])), dtype=float)
    state = GaussianState(cov, mean)
    subs = [Subspace(np.asarray(b, dtype=float)) for b in data["subspaces"]]
    return state, subs, [float(x) for x in data["q"]]
