"""
Dense quantum-state primitives.

Density matrices, pure states and Bloch vectors are immutable values backed
by read-only numpy arrays. Bipartite spaces use the A-major convention: the
basis index of ``|i>_A |j>_B`` is ``i * d_B + j``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import DimensionError, NonPhysicalStateError

ATOL = 1e-10
MAX_DIM = 64

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = (SIGMA_X, SIGMA_Y, SIGMA_Z)


def _frozen(arr):
    arr = np.array(arr, dtype=complex, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, positive semidefinite, unit-trace ``d x d`` matrix.

    Validation happens at construction; an invalid matrix raises
    :class:`NonPhysicalStateError` naming the violated property.
    """

    mat: np.ndarray
    tol: float = field(default=ATOL, repr=False)

    def __post_init__(self):
        mat = _frozen(self.mat)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1] or mat.shape[0] < 1:
            raise DimensionError(f"density matrix must be square, got shape {mat.shape}")
        if not np.all(np.isfinite(mat)):
            raise NonPhysicalStateError("matrix has non-finite entries")
        if np.max(np.abs(mat - mat.conj().T)) > self.tol:
            raise NonPhysicalStateError("not Hermitian")
        if abs(np.trace(mat) - 1) > self.tol:
            raise NonPhysicalStateError(f"trace is {np.trace(mat).real:.12g}, not 1")
        if np.linalg.eigvalsh(_herm(mat))[0] < -self.tol:
            raise NonPhysicalStateError("not positive semidefinite")
        object.__setattr__(self, "mat", mat)

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    @classmethod
    def from_pure(cls, amplitudes) -> DensityMatrix:
        return PureState(amplitudes).density()

    @classmethod
    def maximally_mixed(cls, d: int) -> DensityMatrix:
        return cls(np.eye(d) / d)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.mat, dtype=dtype)

    def allclose(self, other, atol=1e-12) -> bool:
        other = other.mat if isinstance(other, DensityMatrix) else np.asarray(other)
        return self.mat.shape == other.shape and np.allclose(self.mat, other, rtol=0, atol=atol)

    def to_json(self) -> dict:
        return {"dim": self.dim, "re": self.mat.real.tolist(), "im": self.mat.imag.tolist()}

    @classmethod
    def from_json(cls, data: dict) -> DensityMatrix:
        try:
            re = np.asarray(data["re"], dtype=float)
            im = np.asarray(data["im"], dtype=float)
        except KeyError as exc:
            raise NonPhysicalStateError(f"missing field {exc.args[0]!r}") from None
        if re.shape != im.shape:
            raise DimensionError("fields 're' and 'im' differ in shape")
        rho = cls(re + 1j * im)
        if "dim" in data and int(data["dim"]) != rho.dim:
            raise DimensionError(f"field 'dim' is {data['dim']} but matrix is {rho.dim}x{rho.dim}")
        return rho


@dataclass(frozen=True, eq=False)
class PureState:
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = _frozen(np.ravel(self.amplitudes))
        if amps.size < 1 or not np.all(np.isfinite(amps)):
            raise NonPhysicalStateError("amplitudes must be finite and non-empty")
        if abs(np.vdot(amps, amps).real - 1) > ATOL:
            raise NonPhysicalStateError("state vector is not normalized")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    @classmethod
    def normalized(cls, amplitudes) -> PureState:
        amps = np.asarray(amplitudes, dtype=complex).ravel()
        return cls(amps / np.linalg.norm(amps))

    def density(self) -> DensityMatrix:
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()))


@dataclass(frozen=True)
class BlochVector:
    x: float
    y: float
    z: float

    def __post_init__(self):
        for name in ("x", "y", "z"):
            value = float(getattr(self, name))
            if not np.isfinite(value):
                raise NonPhysicalStateError(f"Bloch component {name} is not finite")
            object.__setattr__(self, name, value)
        if self.norm() > 1 + ATOL:
            raise NonPhysicalStateError(f"Bloch vector norm {self.norm():.12g} exceeds 1")

    @classmethod
    def from_array(cls, v) -> BlochVector:
        x, y, z = np.asarray(v, dtype=float)
        return cls(x, y, z)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    def norm(self) -> float:
        return float(np.linalg.norm([self.x, self.y, self.z]))

    def to_json(self) -> dict:
        return {"x": self.x, "y": self.y, "z": self.z}


@dataclass(frozen=True, eq=False)
class GellMannBasis:
    dim: int
    generators: tuple

    def __len__(self):
        return len(self.generators)

    def __getitem__(self, i):
        return self.generators[i]

    def stack(self) -> np.ndarray:
        return np.array(self.generators)


def _herm(m):
    return (m + m.conj().T) / 2


def _as_matrix(rho):
    return rho.mat if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)


def _check_same_dim(a, b):
    if a.dim != b.dim:
        raise DimensionError(f"dimension mismatch: {a.dim} vs {b.dim}")


def tensor(a: DensityMatrix, b: DensityMatrix, max_dim: int = MAX_DIM) -> DensityMatrix:
    """Kronecker product ``a (x) b`` with A-major index ordering."""
    if a.dim * b.dim > max_dim:
        raise DimensionError(f"tensor dimension {a.dim * b.dim} exceeds maximum {max_dim}")
    return DensityMatrix(np.kron(a.mat, b.mat))


def partial_trace_matrix(mat, dims, keep):
    """Array-level partial trace; ``keep`` is ``"A"`` or ``"B"``."""
    d_a, d_b = dims
    mat = np.asarray(mat)
    if mat.shape != (d_a * d_b, d_a * d_b):
        raise DimensionError(f"matrix of shape {mat.shape} does not split as {d_a}x{d_b}")
    t = mat.reshape(d_a, d_b, d_a, d_b)
    if keep == "A":
        return np.einsum("ijkj->ik", t)
    if keep == "B":
        return np.einsum("ijil->jl", t)
    raise ValueError(f"keep must be 'A' or 'B', got {keep!r}")


def partial_trace(rho: DensityMatrix, dims, keep: str = "A") -> DensityMatrix:
    """Reduced state of subsystem ``keep`` of a ``d_A x d_B`` bipartite state."""
    return DensityMatrix(partial_trace_matrix(rho.mat, dims, keep))


def trace_distance(a: DensityMatrix, b: DensityMatrix) -> float:
    """Half the trace norm of ``a - b``, from the eigenvalues of the Hermitian difference."""
    _check_same_dim(a, b)
    ev = np.linalg.eigvalsh(_herm(a.mat - b.mat))
    return float(min(1.0, 0.5 * np.sum(np.abs(ev))))


def _psd_sqrt(mat):
    w, v = np.linalg.eigh(_herm(mat))
    # eigenvalues at rounding level would otherwise enter as their square roots
    w = np.where(w > 1e-13 * max(w[-1], 1.0), w, 0.0)
    return (v * np.sqrt(w)) @ v.conj().T, w, v


def fidelity(a: DensityMatrix, b: DensityMatrix) -> float:
    """
    Uhlmann fidelity ``(Tr sqrt(sqrt(a) b sqrt(a)))**2``.

    Evaluated as the squared nuclear norm of ``sqrt(a) sqrt(b)``. When either
    argument has rank one the exact overlap ``<psi|rho|psi>`` is used instead.
    """
    _check_same_dim(a, b)
    sa, wa, va = _psd_sqrt(a.mat)
    sb, wb, vb = _psd_sqrt(b.mat)
    if np.count_nonzero(wa) == 1:
        psi = va[:, -1]
        f = np.vdot(psi, b.mat @ psi).real
    elif np.count_nonzero(wb) == 1:
        psi = vb[:, -1]
        f = np.vdot(psi, a.mat @ psi).real
    else:
        f = np.sum(np.linalg.svd(sa @ sb, compute_uv=False)) ** 2
    return float(np.clip(f, 0.0, 1.0))


def bloch_to_density(v: BlochVector) -> DensityMatrix:
    if not isinstance(v, BlochVector):
        v = BlochVector.from_array(v)
    x, y, z = v.x, v.y, v.z
    return DensityMatrix(0.5 * np.array([[1 + z, x - 1j * y], [x + 1j * y, 1 - z]]))


def density_to_bloch(rho: DensityMatrix) -> BlochVector:
    if rho.dim != 2:
        raise DimensionError(f"Bloch vectors need a qubit state, got dim {rho.dim}")
    return BlochVector(*(np.trace(rho.mat @ s).real for s in PAULI))


@lru_cache(maxsize=None)
def _gellmann_arrays(d):
    sym, anti, diag = [], [], []
    for j in range(d):
        for k in range(j + 1, d):
            m = np.zeros((d, d), dtype=complex)
            m[j, k] = m[k, j] = 1
            sym.append(m)
            m = np.zeros((d, d), dtype=complex)
            m[j, k], m[k, j] = -1j, 1j
            anti.append(m)
    for l in range(1, d):
        m = np.zeros((d, d), dtype=complex)
        m[np.arange(l), np.arange(l)] = 1
        m[l, l] = -l
        diag.append(np.sqrt(2 / (l * (l + 1))) * m)
    gens = []
    for m in sym + anti + diag:
        m.setflags(write=False)
        gens.append(m)
    return tuple(gens)


def gellmann(d: int) -> GellMannBasis:
    """Generalized Gell-Mann matrices of SU(d).

    Order: all symmetric ``(j, k)`` pairs, all antisymmetric pairs (both
    lexicographic in ``j < k``), then the ``d - 1`` diagonal generators. For
    ``d = 2`` this is ``(sigma_x, sigma_y, sigma_z)``.
    """
    if d < 2:
        raise DimensionError(f"Gell-Mann basis needs d >= 2, got {d}")
    return GellMannBasis(d, _gellmann_arrays(d))


def qudit_coords(rho: DensityMatrix) -> np.ndarray:
    """Coordinates ``x_i = Tr(rho Lambda_i)`` so that ``rho = I/d + sum_i x_i Lambda_i / 2``."""
    basis = gellmann(rho.dim)
    x = np.einsum("kij,ji->k", basis.stack(), rho.mat).real
    bound = 2 * (rho.dim - 1) / rho.dim
    if np.dot(x, x) > bound + ATOL:
        raise NonPhysicalStateError(f"coordinate norm^2 {np.dot(x, x):.12g} exceeds {bound:.12g}")
    return x


def density_from_coords(x, d: int) -> DensityMatrix:
    """Inverse of :func:`qudit_coords`; physical validity is decided by PSD, not by a radius."""
    basis = gellmann(d)
    x = np.asarray(x, dtype=float)
    if x.shape != (d * d - 1,):
        raise DimensionError(f"need {d * d - 1} coordinates for d={d}, got {x.shape}")
    return DensityMatrix(np.eye(d) / d + 0.5 * np.einsum("k,kij->ij", x, basis.stack()))


def random_pure(d: int, rng) -> PureState:
    """Haar-random pure state from a normalized complex Gaussian vector."""
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return PureState.normalized(v)


def random_density(d: int, rng, rank: int | None = None) -> DensityMatrix:
    """Ginibre-ensemble mixed state ``G G^dagger / Tr(G G^dagger)``."""
    k = d if rank is None else rank
    g = rng.normal(size=(d, k)) + 1j * rng.normal(size=(d, k))
    m = g @ g.conj().T
    return DensityMatrix(_herm(m / np.trace(m).real))
