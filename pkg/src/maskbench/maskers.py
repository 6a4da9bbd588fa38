"""
Maskable disks and masking isometries.

A masker is stored as its isometry columns ``V`` (``out_dim x in_dim``), the
action of the full unitary on ``|psi>|0>``. Masking is ``rho -> V rho V^dagger``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, NonPhysicalStateError, NotInRangeError
from .qcore import (
    ATOL,
    PAULI,
    BlochVector,
    DensityMatrix,
    partial_trace_matrix,
)


@dataclass(frozen=True)
class Disk:
    """Plane ``normal . r = c`` intersected with the Bloch ball."""

    normal: tuple
    c: float

    def __post_init__(self):
        n = np.asarray(self.normal, dtype=float)
        if n.shape != (3,) or abs(np.linalg.norm(n) - 1) > 1e-12:
            raise ValueError("disk normal must be a unit 3-vector")
        object.__setattr__(self, "normal", tuple(float(v) for v in n))
        object.__setattr__(self, "c", float(self.c))
        if abs(self.c) > 1 + 1e-12:
            raise ValueError(f"offset |c| = {abs(self.c):.6g} > 1 misses the Bloch ball")

    @classmethod
    def from_angles(cls, alpha: float, theta: float, c: float) -> Disk:
        return cls(_normal(alpha, theta), c)

    @property
    def alpha(self) -> float:
        return float(np.arccos(np.clip(self.normal[2], -1.0, 1.0)))

    @property
    def theta(self) -> float:
        nx, ny, _ = self.normal
        if np.hypot(nx, ny) < 1e-12:
            return 0.0
        return float(np.arctan2(ny, nx) % (2 * np.pi))

    def canonical(self) -> Disk:
        """Same point set, with ``c >= 0`` and ``alpha <= pi/2`` when ``c == 0``."""
        if self.c < 0 or (self.c == 0 and self.normal[2] < 0):
            return Disk(tuple(-v for v in self.normal), -self.c)
        return self

    def to_json(self) -> dict:
        d = self.canonical()
        return {"alpha": d.alpha, "theta": d.theta, "c": d.c}

    @classmethod
    def from_json(cls, data: dict) -> Disk:
        return cls.from_angles(float(data["alpha"]), float(data["theta"]), float(data["c"]))


def _normal(alpha, theta):
    return (
        np.sin(alpha) * np.cos(theta),
        np.sin(alpha) * np.sin(theta),
        np.cos(alpha),
    )


def _bloch_array(v):
    return v.as_array() if isinstance(v, BlochVector) else np.asarray(v, dtype=float)


def disk_through(alpha: float, theta: float, rho0) -> Disk:
    """Disk with orientation ``(alpha, theta)`` passing through the Bloch point ``rho0``."""
    n = np.array(_normal(alpha, theta))
    c = float(n @ _bloch_array(rho0))
    assert abs(c) <= 1 + 1e-10
    return Disk(tuple(n), c)


def disk_contains(disk: Disk, rho, tol: float = 1e-10) -> bool:
    if tol < 0:
        raise ValueError("tol must be non-negative")
    r = _bloch_array(rho)
    return bool(abs(np.dot(disk.normal, r) - disk.c) <= tol and np.linalg.norm(r) <= 1 + tol)


@dataclass(frozen=True, eq=False)
class Masker:
    """
    Isometry columns plus a descriptor.

    ``label`` is a dict with a ``"kind"`` key (``"qubit"``, ``"vandermonde"``
    or ``"highdim"``) and the construction parameters.
    """

    columns: np.ndarray
    label: dict = field(default_factory=dict)
    dims: tuple = None

    def __post_init__(self):
        cols = np.array(self.columns, dtype=complex, copy=True)
        cols.setflags(write=False)
        out_dim, in_dim = cols.shape
        dims = self.dims if self.dims is not None else (in_dim, out_dim // in_dim)
        if dims[0] * dims[1] != out_dim:
            raise DimensionError(f"output dim {out_dim} != {dims[0]}*{dims[1]}")
        gram = cols.conj().T @ cols
        if np.max(np.abs(gram - np.eye(in_dim))) > ATOL:
            raise NonPhysicalStateError("masker columns are not orthonormal")
        object.__setattr__(self, "columns", cols)
        object.__setattr__(self, "dims", tuple(int(d) for d in dims))

    @property
    def in_dim(self) -> int:
        return self.columns.shape[1]

    @property
    def out_dim(self) -> int:
        return self.columns.shape[0]

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "dims": list(self.dims),
            "re": self.columns.real.tolist(),
            "im": self.columns.imag.tolist(),
        }

    @classmethod
    def from_json(cls, data: dict) -> Masker:
        cols = np.asarray(data["re"], dtype=float) + 1j * np.asarray(data["im"], dtype=float)
        return cls(cols, dict(data.get("label", {})), tuple(data["dims"]) if "dims" in data else None)


def _ket(d, *indices):
    v = np.zeros(d ** len(indices), dtype=complex)
    idx = 0
    for i in indices:
        idx = idx * d + i
    v[idx] = 1
    return v


def qubit_masker(alpha: float, theta: float) -> Masker:
    """Masker whose maskable sets are the disks with normal ``(alpha, theta)``.

    ``|0> -> cos(a/2)|00> + sin(a/2)|11>`` and
    ``|1> -> e^{-i theta}(sin(a/2)|00> - cos(a/2)|11>)``.
    """
    ca, sa = np.cos(alpha / 2), np.sin(alpha / 2)
    ph = np.exp(-1j * theta)
    cols = np.zeros((4, 2), dtype=complex)
    cols[0, 0], cols[3, 0] = ca, sa
    cols[0, 1], cols[3, 1] = ph * sa, -ph * ca
    label_theta = 0.0 if alpha == 0 else float(theta)
    return Masker(cols, {"kind": "qubit", "alpha": float(alpha), "theta": label_theta}, (2, 2))


def mask(m: Masker, rho: DensityMatrix) -> DensityMatrix:
    if rho.dim != m.in_dim:
        raise DimensionError(f"masker expects dim {m.in_dim}, state has dim {rho.dim}")
    v = m.columns
    out = v @ rho.mat @ v.conj().T
    return DensityMatrix((out + out.conj().T) / 2)


def unmask(m: Masker, rho_ab: DensityMatrix) -> DensityMatrix:
    """Pull a bipartite state back through the isometry and renormalize."""
    if rho_ab.dim != m.out_dim:
        raise DimensionError(f"masker output dim {m.out_dim}, state has dim {rho_ab.dim}")
    v = m.columns
    out = v.conj().T @ rho_ab.mat @ v
    tr = np.trace(out).real
    if tr < 1e-12:
        raise NotInRangeError("not in masker range")
    out = out / tr
    return DensityMatrix((out + out.conj().T) / 2)


def marginals(rho_ab: DensityMatrix, d_a: int, d_b: int):
    """``(Tr_B rho, Tr_A rho)``."""
    if rho_ab.dim != d_a * d_b:
        raise DimensionError(f"state of dim {rho_ab.dim} is not {d_a}x{d_b}")
    return (
        DensityMatrix(partial_trace_matrix(rho_ab.mat, (d_a, d_b), "A")),
        DensityMatrix(partial_trace_matrix(rho_ab.mat, (d_a, d_b), "B")),
    )


def masked_marginals(m: Masker, rho: DensityMatrix):
    return marginals(mask(m, rho), *m.dims)


def vandermonde_masker(d: int) -> Masker:
    """
    Masker for every state diagonal in the computational basis.

    ``|k> -> d^{-1/2} sum_l x_l^k |l>|l>`` with ``x_l = exp(2 pi i l / d)``,
    so the columns are the rows of the roots-of-unity Vandermonde matrix
    (a discrete Fourier matrix) placed on the ``|ll>`` diagonal.
    """
    if d < 2:
        raise DimensionError(f"Vandermonde masker needs d >= 2, got {d}")
    roots = np.exp(2j * np.pi * np.arange(d) / d)
    a = np.vander(roots, d, increasing=True).T  # a[k, l] = roots[l] ** k
    cols = np.zeros((d * d, d), dtype=complex)
    diag = np.arange(d) * (d + 1)
    cols[diag, :] = a.T / np.sqrt(d)
    return Masker(cols, {"kind": "vandermonde", "d": d}, (d, d))


def noncommuting_maskable_state(d: int) -> np.ndarray:
    """``((d-1)/d + i/d)|0> + sum_{k>0} (-1/d + i/d)|k>``, masked by the Vandermonde masker."""
    psi = np.full(d, (-1 + 1j) / d, dtype=complex)
    psi[0] = (d - 1) / d + 1j / d
    return psi


@dataclass(frozen=True)
class HighDimFamily:
    """Block parameters of the even-dimension masker and its maskable family."""

    p: tuple
    c: tuple
    alpha: tuple
    theta: tuple

    def __post_init__(self):
        for name in ("p", "c", "alpha", "theta"):
            object.__setattr__(self, name, tuple(float(v) for v in np.ravel(getattr(self, name))))
        n = len(self.p)
        if n < 1 or any(len(getattr(self, k)) != n for k in ("c", "alpha", "theta")):
            raise DimensionError("p, c, alpha, theta must have the same non-zero length")
        if min(self.p) < 0 or abs(sum(self.p) - 1) > 1e-12:
            raise ValueError("p must be a probability vector")
        if max(abs(v) for v in self.c) > 1:
            raise ValueError("every |c_i| must be <= 1")

    @property
    def n(self) -> int:
        return len(self.p)

    @property
    def d(self) -> int:
        return 2 * len(self.p)

    def block_disk(self, i: int) -> Disk:
        return Disk.from_angles(self.alpha[i], self.theta[i], self.c[i])


def highdim_masker(fam: HighDimFamily | int, alpha=None, theta=None) -> Masker:
    """
    Even-dimension masker acting as a qubit masker on each pair ``(2i, 2i+1)``.

    Accepts a :class:`HighDimFamily` or an even dimension with explicit
    per-block angle lists.
    """
    if isinstance(fam, HighDimFamily):
        d, alpha, theta = fam.d, fam.alpha, fam.theta
    else:
        d = int(fam)
        if d % 2 or d < 2:
            raise DimensionError(f"high-dimension masker needs even d >= 2, got {d}")
        n = d // 2
        alpha = np.zeros(n) if alpha is None else np.asarray(alpha, dtype=float)
        theta = np.zeros(n) if theta is None else np.asarray(theta, dtype=float)
        if len(alpha) != n or len(theta) != n:
            raise DimensionError(f"need {n} block angles for d={d}")
    cols = np.zeros((d * d, d), dtype=complex)
    for i, (a, t) in enumerate(zip(alpha, theta)):
        lo, hi = 2 * i, 2 * i + 1
        ca, sa, ph = np.cos(a / 2), np.sin(a / 2), np.exp(-1j * t)
        cols[lo * d + lo, lo], cols[hi * d + hi, lo] = ca, sa
        cols[lo * d + lo, hi], cols[hi * d + hi, hi] = ph * sa, -ph * ca
    label = {
        "kind": "highdim",
        "d": d,
        "alpha": [float(a) for a in alpha],
        "theta": [float(t) for t in theta],
    }
    return Masker(cols, label, (d, d))


def highdim_maskable_state(fam: HighDimFamily, bloch_per_block, offdiag=None) -> DensityMatrix:
    """
    Assemble ``rho(D, F)``: diagonal blocks ``p_i D_i``, upper blocks ``F_jk``.

    ``offdiag`` maps ``(j, k)`` with ``j < k`` to a 2x2 matrix, or is a list in
    ``(0,1), (0,2), ..., (1,2), ...`` order; missing blocks are zero.
    """
    n = fam.n
    if len(bloch_per_block) != n:
        raise DimensionError(f"need {n} block Bloch vectors, got {len(bloch_per_block)}")
    pairs = [(j, k) for j in range(n) for k in range(j + 1, n)]
    if offdiag is None:
        offdiag = {}
    elif not isinstance(offdiag, dict):
        offdiag = list(offdiag)
        if len(offdiag) != len(pairs):
            raise DimensionError(f"need {len(pairs)} off-diagonal blocks, got {len(offdiag)}")
        offdiag = dict(zip(pairs, offdiag))

    rho = np.zeros((fam.d, fam.d), dtype=complex)
    for i, v in enumerate(bloch_per_block):
        r = _bloch_array(v)
        if not disk_contains(fam.block_disk(i), r, tol=1e-10):
            raise NonPhysicalStateError(f"block {i} off its disk")
        block = 0.5 * (np.eye(2) + sum(ri * s for ri, s in zip(r, PAULI)))
        rho[2 * i:2 * i + 2, 2 * i:2 * i + 2] = fam.p[i] * block
    for (j, k), f in offdiag.items():
        f = np.asarray(f, dtype=complex)
        rho[2 * j:2 * j + 2, 2 * k:2 * k + 2] = f
        rho[2 * k:2 * k + 2, 2 * j:2 * j + 2] = f.conj().T
    if np.linalg.eigvalsh(rho)[0] < -ATOL:
        raise NonPhysicalStateError("invalid F choice: assembled matrix is not positive semidefinite")
    return DensityMatrix(rho)


def highdim_marginal(fam: HighDimFamily) -> np.ndarray:
    """Closed-form marginal ``1/2 diag_i p_i (I + c_i sigma_z)`` shared by the family."""
    diag = []
    for p, c in zip(fam.p, fam.c):
        diag += [p * (1 + c) / 2, p * (1 - c) / 2]
    return np.diag(diag).astype(complex)
