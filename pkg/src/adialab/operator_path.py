"""Smooth families of Hermitian operators and their spectral data.

Two concrete path forms are provided:

* ``GenerativePath`` -- H(s) = V(s) diag(lambda(s)) V(s)^dag with the unitary
  frame V built from plane rotations driven by switching profiles.  The frame
  gives exact projection derivatives (P = V P0 V^dag, Pdot = [K, P] with
  K = Vdot V^dag) and stays smooth through eigenvalue crossings.
* ``CallablePath`` / ``AffinePath`` -- an arbitrary Hermitian sampler, with
  derivatives by 4th-order central differences or (affine case) in closed
  form.

Projection paths mirror the two forms: ``FrameProjectionPath`` follows a band
of eigencurves through the frame; ``TrackedProjectionPath`` follows a group of
eigenvectors by overlap continuity between neighbouring samples, which is what
threshold scenarios need when no frame is available.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from .errors import AmbiguousSelectorError, ConfigError, HermiticityError
from .switching import SwitchingFunction

__all__ = [
    "require_hermitian",
    "Curve",
    "PlaneRotation",
    "GenerativePath",
    "CallablePath",
    "AffinePath",
    "SpectralDecomposition",
    "eigendecompose",
    "FrameProjectionPath",
    "TrackedProjectionPath",
    "projection_at",
    "projection_derivative",
    "spectral_gap",
]

Array = np.ndarray

_FD4_STENCIL = ((-2, 1.0), (-1, -8.0), (1, 8.0), (2, -1.0))  # / 12h


def require_hermitian(H, tol: float = 1e-12, name: str = "operator") -> Array:
    """Validate Hermiticity in operator norm and return the symmetrized copy."""
    H = np.asarray(H, dtype=complex)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ConfigError(f"{name} must be a square matrix, got shape {H.shape}")
    defect = np.linalg.norm(H - H.conj().T, 2)
    if defect > tol:
        raise HermiticityError(
            f"{name} is not Hermitian: ||A - A^dag||_2 = {defect:.3e} > {tol:.1e}"
        )
    return 0.5 * (H + H.conj().T)


def _hermitize(stack: Array) -> Array:
    return 0.5 * (stack + np.conj(np.swapaxes(stack, -1, -2)))


def _atleast_1d_s(s):
    arr = np.atleast_1d(np.asarray(s, dtype=float))
    return arr, np.ndim(s) == 0


# ---------------------------------------------------------------------------
# scalar curves


@dataclass(frozen=True, eq=False)
class Curve:
    """Scalar function of s with a derivative (analytic or finite-difference)."""

    fn: Callable
    dfn: Callable | None = None
    h_fd: float = 1e-4

    def __call__(self, s):
        return self.fn(s)

    def derivative(self, s):
        if self.dfn is not None:
            return self.dfn(s)
        acc = 0.0
        for k, w in _FD4_STENCIL:
            acc = acc + w * np.asarray(self.fn(s + k * self.h_fd))
        return acc / (12.0 * self.h_fd)

    @staticmethod
    def constant(value: float) -> "Curve":
        return Curve(
            fn=lambda s, v=value: np.full_like(np.asarray(s, float), v)
            if np.ndim(s)
            else float(v),
            dfn=lambda s: np.zeros_like(np.asarray(s, float)) if np.ndim(s) else 0.0,
        )

    @staticmethod
    def ramp(switching: SwitchingFunction, start: float, stop: float) -> "Curve":
        span = stop - start
        return Curve(
            fn=lambda s: start + span * switching(s),
            dfn=lambda s: span * switching.derivative(s),
        )


# ---------------------------------------------------------------------------
# operator paths


@dataclass(frozen=True, eq=False)
class PlaneRotation:
    """Givens rotation exp(a(s) G) acting in coordinate plane (i, j)."""

    i: int
    j: int
    angle: Curve


@dataclass(frozen=True, eq=False)
class GenerativePath:
    """H(s) = V(s) diag(eigencurves(s)) V(s)^dag with a rotation-built frame."""

    dim: int
    eigencurves: tuple[Curve, ...]
    rotations: tuple[PlaneRotation, ...] = ()

    def __post_init__(self):
        if len(self.eigencurves) != self.dim:
            raise ConfigError(
                f"need {self.dim} eigencurves, got {len(self.eigencurves)}"
            )
        for rot in self.rotations:
            if not (0 <= rot.i < self.dim and 0 <= rot.j < self.dim and rot.i != rot.j):
                raise ConfigError(f"rotation plane ({rot.i},{rot.j}) out of range")

    # frame ----------------------------------------------------------------
    def _frame_pieces(self, s: Array, with_generator: bool) -> tuple[Array, Array | None]:
        k, n = len(s), self.dim
        eye = np.broadcast_to(np.eye(n, dtype=complex), (k, n, n))
        v = eye.copy()
        gen = np.zeros((k, n, n), dtype=complex) if with_generator else None
        for rot in self.rotations:
            a = np.asarray(rot.angle(s), dtype=float)
            c, sn = np.cos(a), np.sin(a)
            r = eye.copy()
            r[:, rot.i, rot.i] = c
            r[:, rot.j, rot.j] = c
            r[:, rot.i, rot.j] = -sn
            r[:, rot.j, rot.i] = sn
            if with_generator:
                da = np.asarray(rot.angle.derivative(s), dtype=float)
                g = np.zeros((n, n))
                g[rot.i, rot.j] = -1.0
                g[rot.j, rot.i] = 1.0
                # contribution of this rotation conjugated by the prefix frame
                gen += da[:, None, None] * (v @ g @ np.conj(np.swapaxes(v, 1, 2)))
            v = v @ r
        return v, gen

    def frame_many(self, s) -> Array:
        arr, scalar = _atleast_1d_s(s)
        v, _ = self._frame_pieces(arr, with_generator=False)
        return v[0] if scalar else v

    def frame_generator_many(self, s) -> tuple[Array, Array]:
        """Return (V(s), K(s)) with K = Vdot V^dag (anti-Hermitian)."""
        arr, scalar = _atleast_1d_s(s)
        v, k = self._frame_pieces(arr, with_generator=True)
        return (v[0], k[0]) if scalar else (v, k)

    def eigencurve_values(self, s) -> Array:
        arr, scalar = _atleast_1d_s(s)
        lam = np.stack([np.asarray(c(arr), dtype=float) for c in self.eigencurves], axis=-1)
        return lam[0] if scalar else lam

    # path protocol ----------------------------------------------------------
    def sample_many(self, s) -> Array:
        arr, scalar = _atleast_1d_s(s)
        v, _ = self._frame_pieces(arr, with_generator=False)
        lam = np.stack([np.asarray(c(arr), dtype=float) for c in self.eigencurves], axis=-1)
        h = (v * lam[:, None, :]) @ np.conj(np.swapaxes(v, 1, 2))
        h = _hermitize(h)
        return h[0] if scalar else h

    def sample(self, s) -> Array:
        return self.sample_many(float(s))

    def derivative_many(self, s) -> Array:
        arr, scalar = _atleast_1d_s(s)
        v, k = self._frame_pieces(arr, with_generator=True)
        lam = np.stack([np.asarray(c(arr), dtype=float) for c in self.eigencurves], axis=-1)
        dlam = np.stack(
            [np.asarray(c.derivative(arr), dtype=float) for c in self.eigencurves],
            axis=-1,
        )
        vh = np.conj(np.swapaxes(v, 1, 2))
        h = (v * lam[:, None, :]) @ vh
        dh = k @ h - h @ k + (v * dlam[:, None, :]) @ vh
        dh = _hermitize(dh)
        return dh[0] if scalar else dh

    def derivative(self, s) -> Array:
        return self.derivative_many(float(s))


@dataclass(frozen=True, eq=False)
class CallablePath:
    """Arbitrary Hermitian sampler; derivatives by 4th-order central differences."""

    fn: Callable
    dim: int
    h_fd: float = 1e-4
    dfn: Callable | None = None

    def __post_init__(self):
        probe = require_hermitian(self.fn(0.0), tol=1e-10, name="H(0)")
        if probe.shape != (self.dim, self.dim):
            raise ConfigError(
                f"sampler returned shape {probe.shape}, expected {(self.dim, self.dim)}"
            )

    def sample(self, s) -> Array:
        return _hermitize(np.asarray(self.fn(float(s)), dtype=complex))

    def sample_many(self, s) -> Array:
        arr, scalar = _atleast_1d_s(s)
        out = np.stack([self.sample(x) for x in arr])
        return out[0] if scalar else out

    def derivative(self, s) -> Array:
        if self.dfn is not None:
            return _hermitize(np.asarray(self.dfn(float(s)), dtype=complex))
        acc = np.zeros((self.dim, self.dim), dtype=complex)
        for k, w in _FD4_STENCIL:
            acc += w * self.sample(s + k * self.h_fd)
        return acc / (12.0 * self.h_fd)

    def derivative_many(self, s) -> Array:
        arr, scalar = _atleast_1d_s(s)
        out = np.stack([self.derivative(x) for x in arr])
        return out[0] if scalar else out


@dataclass(frozen=True, eq=False)
class AffinePath:
    """H(s) = H0 + theta(s) W: the switched-coupling form, derivative in closed form."""

    h0: Array
    w: Array
    switching: SwitchingFunction

    def __post_init__(self):
        object.__setattr__(self, "h0", require_hermitian(self.h0, name="H0"))
        object.__setattr__(self, "w", require_hermitian(self.w, name="W"))
        if self.h0.shape != self.w.shape:
            raise ConfigError("H0 and W must have matching shapes")

    @property
    def dim(self) -> int:
        return self.h0.shape[0]

    def sample(self, s) -> Array:
        return self.h0 + float(self.switching(float(s))) * self.w

    def sample_many(self, s) -> Array:
        arr, scalar = _atleast_1d_s(s)
        theta = np.asarray(self.switching(arr), dtype=float)
        out = self.h0[None, :, :] + theta[:, None, None] * self.w[None, :, :]
        return out[0] if scalar else out

    def derivative(self, s) -> Array:
        return float(self.switching.derivative(float(s))) * self.w

    def derivative_many(self, s) -> Array:
        arr, scalar = _atleast_1d_s(s)
        dtheta = np.asarray(self.switching.derivative(arr), dtype=float)
        out = dtheta[:, None, None] * self.w[None, :, :]
        return out[0] if scalar else out


# ---------------------------------------------------------------------------
# spectral decomposition


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """Eigendecomposition with eigenvalues grouped by a degeneracy tolerance."""

    eigenvalues: Array  # (n_groups,) group representatives, ascending
    projections: Array  # (n_groups, n, n)
    multiplicities: tuple[int, ...]
    raw_eigenvalues: Array  # (n,) ascending
    eigenvectors: Array  # (n, n), columns
    tol_deg: float

    @property
    def dim(self) -> int:
        return self.eigenvectors.shape[0]

    @property
    def n_groups(self) -> int:
        return len(self.multiplicities)

    def reconstruct(self) -> Array:
        return np.einsum("g,gij->ij", self.eigenvalues, self.projections)

    def identity_defect(self) -> float:
        total = self.projections.sum(axis=0)
        return float(np.linalg.norm(total - np.eye(self.dim), 2))


def eigendecompose(H, tol_deg: float | None = None) -> SpectralDecomposition:
    """Eigendecompose a Hermitian matrix, grouping eigenvalues within tol_deg.

    tol_deg defaults to 1e-9 * ||H||_2.  Non-Hermitian input (beyond 1e-12 in
    operator norm) is rejected with the measured defect.
    """
    H = require_hermitian(H, tol=1e-12, name="H")
    w, v = np.linalg.eigh(H)
    scale = float(np.max(np.abs(w))) if len(w) else 0.0
    if tol_deg is None:
        tol_deg = 1e-9 * scale
    # split where consecutive spacing exceeds the tolerance
    splits = np.nonzero(np.diff(w) > tol_deg)[0] + 1
    bounds = [0, *splits.tolist(), len(w)]
    groups, projections, mults = [], [], []
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        block = v[:, lo:hi]
        projections.append(block @ block.conj().T)
        groups.append(float(np.mean(w[lo:hi])))
        mults.append(hi - lo)
    return SpectralDecomposition(
        eigenvalues=np.asarray(groups),
        projections=np.stack(projections),
        multiplicities=tuple(mults),
        raw_eigenvalues=w,
        eigenvectors=v,
        tol_deg=float(tol_deg),
    )


# ---------------------------------------------------------------------------
# projection paths


def _group_gap(w: Array, members: Array) -> float:
    inside = w[members]
    outside = w[~members]
    if len(outside) == 0:
        return math.inf
    return float(np.min(np.abs(outside[:, None] - inside[None, :])))


@dataclass(frozen=True, eq=False)
class FrameProjectionPath:
    """Projection onto a band of eigencurves of a GenerativePath (exact frame)."""

    path: GenerativePath
    band: tuple[int, ...]

    def __post_init__(self):
        band = tuple(sorted(set(int(b) for b in self.band)))
        object.__setattr__(self, "band", band)
        if not band or band[-1] >= self.path.dim:
            raise ConfigError(f"band {band} out of range for dim {self.path.dim}")

    @property
    def rank(self) -> int:
        return len(self.band)

    @property
    def dim(self) -> int:
        return self.path.dim

    def value_many(self, s) -> Array:
        arr, scalar = _atleast_1d_s(s)
        v = self.path.frame_many(arr)
        cols = v[:, :, self.band]
        p = cols @ np.conj(np.swapaxes(cols, 1, 2))
        return p[0] if scalar else p

    def value(self, s) -> Array:
        return self.value_many(float(s))

    def derivative_many(self, s) -> Array:
        arr, scalar = _atleast_1d_s(s)
        v, k = self.path.frame_generator_many(arr)
        cols = v[:, :, self.band]
        p = cols @ np.conj(np.swapaxes(cols, 1, 2))
        dp = k @ p - p @ k
        return dp[0] if scalar else dp

    def derivative(self, s) -> Array:
        return self.derivative_many(float(s))

    def value_and_derivative_many(self, s) -> tuple[Array, Array]:
        arr, _ = _atleast_1d_s(s)
        v, k = self.path.frame_generator_many(arr)
        cols = v[:, :, self.band]
        p = cols @ np.conj(np.swapaxes(cols, 1, 2))
        return p, k @ p - p @ k

    def gap(self, s) -> float:
        lam = self.path.eigencurve_values(float(s))
        members = np.zeros(len(lam), dtype=bool)
        members[list(self.band)] = True
        return _group_gap(lam, members)

    def tracked_eigenvalue(self, s) -> float:
        lam = self.path.eigencurve_values(float(s))
        return float(np.mean(lam[list(self.band)]))


@dataclass(frozen=True, eq=False)
class TrackedProjectionPath:
    """Rank-m spectral projection followed by overlap continuity.

    The initial group is picked by ``select`` at the left end of ``span``
    (where the path is constant); later samples pick the m eigenvectors with
    the largest overlap onto the previously tracked subspace.  Derivative
    modes: 'resolvent' (perturbation formula, needs path.derivative) or 'fd'
    (central differences of the tracked projection).
    """

    path: object
    rank: int
    select: tuple = ("bottom",)
    span: tuple[float, float] = (-0.5, 2.0)
    n_anchors: int = 257
    deriv: str = "resolvent"
    h_fd: float = 1e-4
    chunk: int = 256

    def __post_init__(self):
        if self.rank < 1 or self.rank > self.path.dim:
            raise ConfigError(f"rank {self.rank} out of range")
        if self.deriv not in ("resolvent", "fd"):
            raise ConfigError(f"unknown derivative mode {self.deriv!r}")

    @property
    def dim(self) -> int:
        return self.path.dim

    # --- selection ---------------------------------------------------------
    def _initial_columns(self, w: Array, v: Array) -> Array:
        m = self.rank
        scale = max(float(np.max(np.abs(w))), 1.0)
        tol = 1e-9 * scale
        kind = self.select[0]
        if kind == "bottom":
            if len(w) > m and w[m] - w[m - 1] <= tol:
                raise AmbiguousSelectorError(
                    f"bottom-{m} selector cuts a degenerate pair: "
                    f"lambda_{m-1}={w[m-1]:.12g}, lambda_{m}={w[m]:.12g}"
                )
            idx = np.arange(m)
        elif kind == "window":
            lo, hi = float(self.select[1]), float(self.select[2])
            inside = np.nonzero((w >= lo) & (w <= hi))[0]
            near_edge = [
                x
                for x in w
                if min(abs(x - lo), abs(x - hi)) <= tol
            ]
            if near_edge:
                raise AmbiguousSelectorError(
                    f"window [{lo}, {hi}] boundary is ambiguous near eigenvalues {near_edge}"
                )
            if len(inside) != m:
                raise ConfigError(
                    f"window [{lo}, {hi}] holds {len(inside)} eigenvalues, expected {m}"
                )
            idx = inside
        elif kind == "indices":
            idx = np.asarray(self.select[1], dtype=int)
            if len(idx) != m:
                raise ConfigError("selector indices must match rank")
        else:
            raise ConfigError(f"unknown selector {kind!r}")
        return v[:, idx]

    @staticmethod
    def _continue_columns(q_ref: Array, w: Array, v: Array, m: int) -> tuple[Array, Array]:
        # score_i = || q_ref^dag v_i ||^2; greedy top-m, index-sorted for determinism
        overlap = q_ref.conj().T @ v  # (m, n)
        scores = np.sum(np.abs(overlap) ** 2, axis=0)
        idx = np.sort(np.argsort(-scores, kind="stable")[:m])
        return v[:, idx], idx

    @cached_property
    def _anchor_table(self) -> tuple[Array, Array]:
        s_grid = np.linspace(self.span[0], self.span[1], self.n_anchors)
        qs = np.empty((self.n_anchors, self.dim, self.rank), dtype=complex)
        q_ref = None
        for lo in range(0, self.n_anchors, self.chunk):
            hs = self.path.sample_many(s_grid[lo : lo + self.chunk])
            w, v = np.linalg.eigh(hs)
            for j in range(len(w)):
                if q_ref is None:
                    q_ref = self._initial_columns(w[j], v[j])
                else:
                    q_ref, _ = self._continue_columns(q_ref, w[j], v[j], self.rank)
                qs[lo + j] = q_ref
        return s_grid, qs

    def _reference_at(self, s: float) -> Array:
        s_grid, qs = self._anchor_table
        pos = int(round((s - s_grid[0]) / (s_grid[1] - s_grid[0])))
        pos = min(max(pos, 0), len(s_grid) - 1)
        return qs[pos]

    # --- evaluation ----------------------------------------------------------
    def _track(self, s_arr: Array, need_deriv: bool) -> tuple[Array, Array | None]:
        k, n, m = len(s_arr), self.dim, self.rank
        p_out = np.empty((k, n, n), dtype=complex)
        dp_out = np.empty((k, n, n), dtype=complex) if need_deriv else None
        q_ref = self._reference_at(float(s_arr[0]))
        for lo in range(0, k, self.chunk):
            sl = s_arr[lo : lo + self.chunk]
            hs = self.path.sample_many(sl)
            w, v = np.linalg.eigh(hs)
            dhs = self.path.derivative_many(sl) if need_deriv else None
            for j in range(len(sl)):
                cols, idx = self._continue_columns(q_ref, w[j], v[j], m)
                q_ref = cols
                p_out[lo + j] = cols @ cols.conj().T
                if need_deriv:
                    dp_out[lo + j] = self._resolvent_dp(w[j], v[j], idx, dhs[j])
        return p_out, dp_out

    @staticmethod
    def _resolvent_dp(w: Array, v: Array, idx: Array, hdot: Array) -> Array:
        # Pdot = sum_{a not in G, b in G} v_a <a|Hdot|b> / (w_b - w_a) v_b^dag + h.c.
        mcol = v.conj().T @ hdot @ v[:, idx]  # (n, m) columns in the group
        denom = w[idx][None, :] - w[:, None]  # (n, m)
        denom[idx, np.arange(len(idx))] = 1.0  # in-group rows are zeroed anyway
        z = mcol / denom
        z[idx, :] = 0.0
        a = v @ z @ v[:, idx].conj().T
        return a + a.conj().T

    def value_many(self, s) -> Array:
        arr, scalar = _atleast_1d_s(s)
        p, _ = self._track(arr, need_deriv=False)
        return p[0] if scalar else p

    def value(self, s) -> Array:
        return self.value_many(float(s))

    def derivative_many(self, s) -> Array:
        arr, scalar = _atleast_1d_s(s)
        if self.deriv == "fd":
            out = np.stack([self._fd_derivative(float(x)) for x in arr])
        else:
            _, out = self._track(arr, need_deriv=True)
        return out[0] if scalar else out

    def derivative(self, s) -> Array:
        return self.derivative_many(float(s))

    def value_and_derivative_many(self, s) -> tuple[Array, Array]:
        arr, _ = _atleast_1d_s(s)
        if self.deriv == "fd":
            return self.value_many(arr), self.derivative_many(arr)
        return self._track(arr, need_deriv=True)

    def _fd_derivative(self, s: float) -> Array:
        acc = np.zeros((self.dim, self.dim), dtype=complex)
        for k, wgt in _FD4_STENCIL:
            acc += wgt * self.value(s + k * self.h_fd)
        return acc / (12.0 * self.h_fd)

    def gap(self, s) -> float:
        h = self.path.sample(float(s))
        w, v = np.linalg.eigh(h)
        q_ref = self._reference_at(float(s))
        _, idx = self._continue_columns(q_ref, w, v, self.rank)
        members = np.zeros(len(w), dtype=bool)
        members[idx] = True
        return _group_gap(w, members)

    def tracked_eigenvalue(self, s) -> float:
        h = self.path.sample(float(s))
        w, v = np.linalg.eigh(h)
        q_ref = self._reference_at(float(s))
        _, idx = self._continue_columns(q_ref, w, v, self.rank)
        return float(np.mean(w[idx]))


# ---------------------------------------------------------------------------
# operation-level wrappers


def projection_at(proj_path, s) -> Array:
    """P(s) for any projection path."""
    return proj_path.value(s)


def projection_derivative(proj_path, s) -> Array:
    """Pdot(s) in the path's derivative mode."""
    return proj_path.derivative(s)


def spectral_gap(proj_path, s) -> float:
    """Distance from the tracked eigenvalue group to the rest of the spectrum."""
    return proj_path.gap(s)
