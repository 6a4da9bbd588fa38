"""
Second-quantized model of the polarizing-beam-splitter fusion gate.

States are sparse Fock expansions over labelled modes ``(polarization, site,
index)``. The PBS transmits H and reflects V, so a V photon changes site and
picks up a factor ``i``. Coincidence post-selection keeps the terms with
exactly one photon at each site per photon pair.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from itertools import product
from typing import NamedTuple

import numpy as np

from .errors import DimensionError, NonPhysicalStateError, PostSelectionEmpty
from .qcore import DensityMatrix, PureState

PRUNE = 1e-14

_POL_ORDER = {"H": 0, "V": 1}
_SITE_ORDER = {"A": 0, "B": 1}


class Mode(NamedTuple):
    polarization: str
    site: str
    index: int = 0

    def sort_key(self):
        return (self.index, _SITE_ORDER[self.site], _POL_ORDER[self.polarization])


def _canon(occ: dict) -> tuple:
    return tuple(sorted(((m, n) for m, n in occ.items() if n > 0), key=lambda t: t[0].sort_key()))


class ModeState:
    """
    Immutable sparse Fock-space vector.

    ``terms`` maps a canonical occupation tuple ``((mode, count), ...)`` to the
    amplitude of the normalized Fock state with those occupations.
    """

    __slots__ = ("_terms",)

    def __init__(self, terms=None):
        clean = {}
        for occ, amp in (terms or {}).items():
            if any(n < 0 for _, n in occ):
                raise ValueError("occupation counts must be non-negative")
            key = _canon(dict(occ))
            clean[key] = clean.get(key, 0) + complex(amp)
        self._terms = {k: v for k, v in clean.items() if abs(v) >= PRUNE}

    @property
    def terms(self) -> dict:
        return dict(self._terms)

    @classmethod
    def vacuum(cls) -> ModeState:
        return cls({(): 1.0})

    def create(self, mode: Mode) -> ModeState:
        """Apply the creation operator of ``mode``."""
        out = {}
        for occ, amp in self._terms.items():
            d = dict(occ)
            n = d.get(mode, 0)
            d[mode] = n + 1
            key = _canon(d)
            out[key] = out.get(key, 0) + amp * math.sqrt(n + 1)
        return ModeState(out)

    def apply(self, poly) -> ModeState:
        """Apply a polynomial in creation operators: ``[(coef, (mode, ...)), ...]``."""
        total = {}
        for coef, modes in poly:
            s = self
            for m in modes:
                s = s.create(m)
            for k, v in s._terms.items():
                total[k] = total.get(k, 0) + coef * v
        return ModeState(total)

    def __add__(self, other):
        out = dict(self._terms)
        for k, v in other._terms.items():
            out[k] = out.get(k, 0) + v
        return ModeState(out)

    def __mul__(self, scalar):
        return ModeState({k: scalar * v for k, v in self._terms.items()})

    __rmul__ = __mul__

    def inner(self, other) -> complex:
        """``<self|other>``."""
        return sum(np.conj(v) * other._terms.get(k, 0) for k, v in self._terms.items())

    def norm_sq(self) -> float:
        return float(sum(abs(v) ** 2 for v in self._terms.values()))

    def __repr__(self):
        parts = []
        for occ, amp in self._terms.items():
            label = " ".join(f"{m.polarization}{m.site}{m.index}^{n}" for m, n in occ) or "vac"
            parts.append(f"({amp:.6g})|{label}>")
        return "ModeState(" + " + ".join(parts) + ")"


_PBS = {
    ("H", "A"): ("H", "A", 1),
    ("V", "A"): ("V", "B", 1j),
    ("H", "B"): ("H", "B", 1),
    ("V", "B"): ("V", "A", 1j),
}


def pbs_convert(s: ModeState) -> ModeState:
    """Send every input mode through the PBS: V photons swap site with a factor ``i``."""
    out = {}
    for occ, amp in s.terms.items():
        new = {}
        for mode, n in occ:
            pol, site, phase = _PBS[(mode.polarization, mode.site)]
            new[Mode(pol, site, mode.index)] = n
            amp = amp * phase ** n
        key = _canon(new)
        out[key] = out.get(key, 0) + amp
    return ModeState(out)


@dataclass(frozen=True, eq=False)
class FusionOutcome:
    """Post-selected two-party state and its heralding probability.

    ``amplitudes`` is set for pure inputs (A-major over ``dims``);
    ``noise_coefficient`` only for the coherent-source model.
    """

    state: DensityMatrix
    success_probability: float
    dims: tuple = (2, 2)
    amplitudes: np.ndarray | None = None
    noise_coefficient: complex | None = None

    def __post_init__(self):
        if not -1e-12 <= self.success_probability <= 1 + 1e-12:
            raise ValueError(f"success probability {self.success_probability} outside [0, 1]")

    def to_json(self) -> dict:
        out = {"state": self.state.to_json(), "success_probability": self.success_probability}
        if self.noise_coefficient is not None:
            z = complex(self.noise_coefficient)
            out["noise_coefficient"] = {"re": z.real, "im": z.imag}
        return out


def _site_pols(occ, n_pairs):
    """Per-site polarization lists, or None if the term is not a coincidence."""
    a = [None] * n_pairs
    b = [None] * n_pairs
    for mode, count in occ:
        if mode.index >= n_pairs or count != 1:
            return None
        slots = a if mode.site == "A" else b
        if slots[mode.index] is not None:
            return None
        slots[mode.index] = mode.polarization
    if None in a or None in b:
        return None
    return a, b


def _pols_to_index(pols):
    idx = 0
    for p in pols:  # first photon is the most significant bit
        idx = 2 * idx + _POL_ORDER[p]
    return idx


def postselected_vector(s: ModeState, n_pairs: int = 1) -> np.ndarray:
    """Unnormalized coincidence component as an A-major ``4**n_pairs`` vector."""
    d = 2 ** n_pairs
    vec = np.zeros(d * d, dtype=complex)
    for occ, amp in s.terms.items():
        sp = _site_pols(occ, n_pairs)
        if sp is None:
            continue
        vec[_pols_to_index(sp[0]) * d + _pols_to_index(sp[1])] += amp
    return vec


def coincidence_postselect(s: ModeState, n_pairs: int | None = None) -> FusionOutcome:
    """
    Keep the terms with one photon at A and one at B for every pair index.

    The success probability is the kept squared norm relative to the norm of
    ``s``.
    """
    if n_pairs is None:
        n_pairs = 1 + max((m.index for occ in s.terms for m, _ in occ), default=0)
    total = s.norm_sq()
    vec = postselected_vector(s, n_pairs)
    kept = float(np.vdot(vec, vec).real)
    if total == 0 or kept < PRUNE:
        raise PostSelectionEmpty("post-selection empty")
    psi = vec / math.sqrt(kept)
    d = 2 ** n_pairs
    return FusionOutcome(
        DensityMatrix(np.outer(psi, psi.conj())),
        min(kept / total, 1.0),
        (d, d),
        psi,
    )


def _qubit_poly(amps, site, index=0):
    return [
        (amps[0], (Mode("H", site, index),)),
        (amps[1], (Mode("V", site, index),)),
    ]


_DIAG = np.array([1, 1]) / math.sqrt(2)


def fuse_pure(amps) -> FusionOutcome:
    """Fusion of the polarization qubit ``amps`` with an ancilla photon in ``|D>``."""
    amps = np.asarray(amps, dtype=complex)
    state = ModeState.vacuum().apply(_qubit_poly(amps, "A")).apply(_qubit_poly(_DIAG, "B"))
    return coincidence_postselect(pbs_convert(state), 1)


def fuse_qubit(psi) -> FusionOutcome:
    """
    Fusion gate on a qubit (pure or mixed) with a ``|D>`` ancilla.

    Mixed inputs are decomposed into eigenvectors, each propagated through
    the mode algebra, and recombined with their heralding weights.
    """
    if isinstance(psi, PureState):
        psi = psi.amplitudes
    if not isinstance(psi, DensityMatrix):
        amps = np.asarray(psi, dtype=complex)
        if amps.shape != (2,):
            raise DimensionError("fuse_qubit needs a qubit")
        return fuse_pure(PureState.normalized(amps).amplitudes)
    if psi.dim != 2:
        raise DimensionError(f"fuse_qubit needs a qubit, got dim {psi.dim}")
    w, v = np.linalg.eigh(psi.mat)
    out = np.zeros((4, 4), dtype=complex)
    prob = 0.0
    for lam, vec in zip(w, v.T):
        if lam <= PRUNE:
            continue
        o = fuse_pure(vec)
        out += lam * o.success_probability * o.state.mat
        prob += lam * o.success_probability
    if prob < PRUNE:
        raise PostSelectionEmpty("post-selection empty")
    out /= prob
    return FusionOutcome(DensityMatrix((out + out.conj().T) / 2), prob)


def parity(k: int) -> int:
    return bin(k).count("1") % 2


def _qudit_mode_state(amps, n):
    carrier = []
    for k, ck in enumerate(amps):
        bits = format(k, f"0{n}b")
        carrier.append((ck, tuple(Mode("HV"[int(b)], "A", j) for j, b in enumerate(bits))))
    state = ModeState.vacuum().apply(carrier)
    for j in range(n):
        state = state.apply(_qubit_poly(_DIAG, "B", j))
    return pbs_convert(state)


def qudit_fusion_vector(amps, n: int) -> np.ndarray:
    """
    Unnormalized post-selected vector of digit-wise fusion (A-major, length
    ``4**n``), without the state-size limit of :func:`fuse_qudit`.
    """
    amps = np.asarray(amps, dtype=complex)
    if amps.size > 2 ** n:
        raise DimensionError(f"qudit of dim {amps.size} does not fit on {n} photons")
    return postselected_vector(_qudit_mode_state(amps, n), n)


def fuse_qudit(psi, n: int) -> FusionOutcome:
    """
    Digit-wise fusion of a ``d <= 2**n`` qudit encoded on ``n`` photons.

    Photon ``j`` carries bit ``n-1-j`` of the basis index (photon 0 most
    significant); each carrier is fused with its own ``|D>`` ancilla.
    """
    amps = psi.amplitudes if isinstance(psi, PureState) else np.asarray(psi, dtype=complex)
    d = amps.size
    if d > 2 ** n:
        raise DimensionError(f"qudit of dim {d} does not fit on {n} photons")
    if 4 ** n > 64:
        raise DimensionError(f"{n} photon pairs exceed the 64-dim state limit")
    amps = PureState.normalized(amps).amplitudes
    return coincidence_postselect(_qudit_mode_state(amps, n), n)


def _coherent_poly(amp, order, index=0):
    """Truncated ``sum_k amp^k/k! (a_D^dagger)^k`` on the B input."""
    poly = []
    h, v = Mode("H", "B", index), Mode("V", "B", index)
    for k in range(order + 1):
        pref = amp ** k / math.factorial(k) / math.sqrt(2) ** k
        for pols in product((h, v), repeat=k):
            poly.append((pref, pols))
    return poly


def fuse_coherent(psi, p: float, amp: complex, order: int = 2) -> FusionOutcome:
    """
    Fusion of a heralded-with-efficiency-``p`` single photon and a weak
    coherent pulse of amplitude ``amp`` in ``|D>``.

    Parameters
    ----------
    psi : PureState or array_like
        Polarization qubit of the carrier photon.
    p : float
        Probability that the source emits the carrier photon, in (0, 1].
    amp : complex
        Coherent amplitude of the ancilla pulse.
    order : int
        Photon-number truncation of the coherent state (2 suffices: every
        coincidence term has exactly two photons).

    Returns
    -------
    FusionOutcome
        ``amplitudes`` is the kept vector rescaled so its ideal part is
        exactly ``beta|HH> - gamma e^{i phi}|VV>``; ``noise_coefficient`` is
        the remaining amplitude, on the term with Alice's photon V and Bob's H.
        ``success_probability`` is the coincidence probability of the
        normalized coherent input.
    """
    if not 0 < p <= 1:
        raise ValueError(f"source efficiency p must lie in (0, 1], got {p}")
    amps = psi.amplitudes if isinstance(psi, PureState) else np.asarray(psi, dtype=complex)
    if amps.shape != (2,):
        raise DimensionError("fuse_coherent needs a qubit")
    amps = PureState.normalized(amps).amplitudes
    if abs(amp) > 0.3:
        warnings.warn(f"|amp| = {abs(amp):.3g} is outside the weak-pulse regime", stacklevel=2)
    ideal = np.array([amps[0], 0, 0, -amps[1]], dtype=complex)
    if amp == 0:
        return FusionOutcome(DensityMatrix(np.outer(ideal, ideal.conj())), 0.0, (2, 2), ideal, 0j)

    carrier = [(math.sqrt(1 - p), ())] + [(math.sqrt(p) * a, m) for a, m in _qubit_poly(amps, "A")]
    state = ModeState.vacuum().apply(carrier).apply(_coherent_poly(amp, order))
    kept = postselected_vector(pbs_convert(state), 1) * math.exp(-abs(amp) ** 2 / 2)
    scale = np.vdot(ideal, kept)
    if abs(scale) < PRUNE:
        raise PostSelectionEmpty("post-selection empty")
    rescaled = kept / scale
    noise = complex(rescaled[2])
    psi_out = rescaled / np.linalg.norm(rescaled)
    return FusionOutcome(
        DensityMatrix(np.outer(psi_out, psi_out.conj())),
        float(np.vdot(kept, kept).real),
        (2, 2),
        rescaled,
        noise,
    )


def coherent_noise_coefficient(p: float, amp: complex) -> complex:
    """Closed form ``i sqrt((1-p)/(2p)) amp`` of the multi-photon noise term."""
    return 1j * math.sqrt((1 - p) / (2 * p)) * amp
