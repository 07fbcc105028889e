"""Switching profiles theta(s): identically 0 for s <= 0 and 1 for s >= 1.

Everything time dependent in the package is driven through one of these
profiles, so the smoothness class at the endpoints is the single knob that
controls post-transition decay rates:

* ``linear``        -- C^0 ramp,
* ``smoothstep(k)`` -- polynomial with k vanishing endpoint derivatives (C^k),
* ``bump``          -- exp(-1/s)-based partition of unity, C-infinity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ConfigError

__all__ = ["SwitchingFunction"]


def _as_array(s):
    arr = np.asarray(s, dtype=float)
    return arr, arr.ndim == 0


def _bump_b(s: np.ndarray) -> np.ndarray:
    out = np.zeros_like(s)
    pos = s > 0
    out[pos] = np.exp(-1.0 / s[pos])
    return out


def _bump_db(s: np.ndarray) -> np.ndarray:
    out = np.zeros_like(s)
    pos = s > 0
    sp = s[pos]
    out[pos] = np.exp(-1.0 / sp) / sp**2
    return out


def _smoothstep_coeffs(order: int) -> np.ndarray:
    # S_k(x) = sum_j C(k+j,j) C(2k+1,k-j) (-x)^j x^(k+1); integer coefficients.
    if order < 1:
        raise ConfigError(f"smoothstep order must be >= 1, got {order}")
    coeffs = np.zeros(2 * order + 2)
    for j in range(order + 1):
        c = math.comb(order + j, j) * math.comb(2 * order + 1, order - j) * (-1) ** j
        coeffs[order + j + 1] = c
    return coeffs  # power-basis coefficients, ascending


@dataclass(frozen=True)
class SwitchingFunction:
    """Scalar transition profile with an explicit smoothness class.

    ``order`` is the number of derivatives vanishing at s=0 and s=1
    (0 for linear, k for smoothstep, None meaning all orders for bump).
    Instances are callable and vectorized; ``derivative`` gives d theta/ds.
    """

    kind: str
    order: int | None = None
    _poly: np.ndarray | None = field(default=None, repr=False)
    _dpoly: np.ndarray | None = field(default=None, repr=False)

    @staticmethod
    def linear() -> "SwitchingFunction":
        return SwitchingFunction(kind="linear", order=0)

    @staticmethod
    def smoothstep(order: int = 2) -> "SwitchingFunction":
        coeffs = _smoothstep_coeffs(order)
        dcoeffs = np.polynomial.polynomial.polyder(coeffs)
        return SwitchingFunction(
            kind="smoothstep", order=order, _poly=coeffs, _dpoly=dcoeffs
        )

    @staticmethod
    def bump() -> "SwitchingFunction":
        return SwitchingFunction(kind="bump", order=None)

    @staticmethod
    def from_config(cfg: dict) -> "SwitchingFunction":
        kind = cfg.get("kind", "bump")
        if kind == "bump":
            return SwitchingFunction.bump()
        if kind == "smoothstep":
            return SwitchingFunction.smoothstep(int(cfg.get("order", 2)))
        if kind == "linear":
            return SwitchingFunction.linear()
        raise ConfigError(f"unknown switching kind {kind!r}")

    def __call__(self, s):
        arr, scalar = _as_array(s)
        if self.kind == "linear":
            out = np.clip(arr, 0.0, 1.0)
        elif self.kind == "smoothstep":
            x = np.clip(arr, 0.0, 1.0)
            out = np.polynomial.polynomial.polyval(x, self._poly)
            out = np.clip(out, 0.0, 1.0)
        else:  # bump
            b = _bump_b(arr)
            bc = _bump_b(1.0 - arr)
            out = np.where(arr <= 0.0, 0.0, np.where(arr >= 1.0, 1.0, 0.0))
            inside = (arr > 0.0) & (arr < 1.0)
            out[inside] = b[inside] / (b[inside] + bc[inside])
        return float(out) if scalar else out

    def derivative(self, s):
        arr, scalar = _as_array(s)
        inside = (arr > 0.0) & (arr < 1.0)
        out = np.zeros_like(arr)
        if self.kind == "linear":
            out[inside] = 1.0
        elif self.kind == "smoothstep":
            out[inside] = np.polynomial.polynomial.polyval(arr[inside], self._dpoly)
        else:
            si = arr[inside]
            b, bc = _bump_b(si), _bump_b(1.0 - si)
            db, dbc = _bump_db(si), _bump_db(1.0 - si)
            out[inside] = (db * bc + b * dbc) / (b + bc) ** 2
        return float(out) if scalar else out

    def to_config(self) -> dict:
        cfg = {"kind": self.kind}
        if self.kind == "smoothstep":
            cfg["order"] = self.order
        return cfg
