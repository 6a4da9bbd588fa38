"""Drivers for the disk-masking demo, the zero-measure sweep and channel protection."""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass

import numpy as np

from . import maskers
from .qcore import (
    PAULI,
    SIGMA_X,
    BlochVector,
    DensityMatrix,
    PureState,
    bloch_to_density,
    density_to_bloch,
    fidelity,
    trace_distance,
)

DEMO_ALPHA = math.atan(math.sqrt(2))
DEMO_THETA = math.pi / 4
DEMO_STATES = {
    "rho1": (0.0, 0.0, 1.0),
    "rho2": (1.0, 0.0, 0.0),
    "rho3": (0.0, 1.0, 0.0),
    "rho4": (2 / 3, 2 / 3, -1 / 3),
    "rho5": (0.5, 0.5, 0.0),
}


class Direction(str, enum.Enum):
    PARALLEL = "parallel"
    MERIDIAN = "meridian"


@dataclass(frozen=True)
class SweepConfig:
    phi_list: tuple
    shift_list: tuple
    direction: Direction = Direction.MERIDIAN
    shots: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "phi_list", tuple(float(v) for v in self.phi_list))
        object.__setattr__(self, "shift_list", tuple(float(v) for v in self.shift_list))
        object.__setattr__(self, "direction", Direction(self.direction))
        if any(not -math.pi < s < math.pi for s in self.shift_list):
            raise ValueError("shifts must lie in (-pi, pi)")
        if self.shots is not None and self.shots < 100:
            raise ValueError("shots must be >= 100 when given")


@dataclass(frozen=True)
class SweepRecord:
    phi: float
    shift: float
    direction: Direction
    trace_distance: float
    std_error: float | None = None


def shift_grid(shift_max_deg: float = 40.0, step_deg: float = 2.0) -> np.ndarray:
    """Symmetric grid ``[-max, max]`` in degrees (endpoints included)."""
    n = int(round(2 * shift_max_deg / step_deg))
    return np.linspace(-shift_max_deg, shift_max_deg, n + 1)


def fig3_config(direction=Direction.MERIDIAN, shots=None) -> SweepConfig:
    """The default grid: latitudes 0, 30, 60 degrees and shifts -40..40 in 2 degree steps."""
    return SweepConfig(
        np.radians([0.0, 30.0, 60.0]),
        np.radians(shift_grid(40.0, 2.0)),
        direction,
        shots,
    )


def run_demo_fig2() -> dict:
    """Mask the five reference states on the plane ``x + y + z = 1``.

    Returns a JSON-ready report with per-state round-trip fidelities,
    marginals, the pairwise marginal trace distances for each party, and the
    bipartite states of ``rho1`` and ``rho2``.
    """
    m = maskers.qubit_masker(DEMO_ALPHA, DEMO_THETA)
    disk = maskers.disk_through(DEMO_ALPHA, DEMO_THETA, DEMO_STATES["rho1"])
    names = list(DEMO_STATES)
    per_state, alice, bob, bipartite = {}, [], [], {}
    for name in names:
        rho = bloch_to_density(BlochVector(*DEMO_STATES[name]))
        rho_ab = maskers.mask(m, rho)
        ra, rb = maskers.marginals(rho_ab, 2, 2)
        alice.append(ra)
        bob.append(rb)
        rec = maskers.unmask(m, rho_ab)
        per_state[name] = {
            "bloch": list(DEMO_STATES[name]),
            "on_disk": maskers.disk_contains(disk, DEMO_STATES[name]),
            "round_trip_fidelity": fidelity(rho, rec),
            "recovered_bloch": density_to_bloch(rec).to_json(),
            "marginal_A": ra.to_json(),
            "marginal_B": rb.to_json(),
        }
        if name in ("rho1", "rho2"):
            bipartite[name] = rho_ab.to_json()

    def pairwise(states):
        return [[trace_distance(a, b) for b in states] for a in states]

    td_a, td_b = pairwise(alice), pairwise(bob)
    expected = np.diag([(1 + disk.c) / 2, (1 - disk.c) / 2])
    return {
        "masker": m.to_json(),
        "disk": disk.to_json(),
        "states": per_state,
        "pairwise_trace_distance_A": td_a,
        "pairwise_trace_distance_B": td_b,
        "max_marginal_trace_distance": max(max(map(max, td_a)), max(map(max, td_b))),
        "min_round_trip_fidelity": min(s["round_trip_fidelity"] for s in per_state.values()),
        "max_marginal_error": max(
            float(np.max(np.abs(r.mat - expected))) for r in alice + bob
        ),
        "expected_marginal_diag": [(1 + disk.c) / 2, (1 - disk.c) / 2],
        "bipartite": bipartite,
    }


def reference_state(phi: float) -> np.ndarray:
    """``sin(phi/2)|H> + cos(phi/2)|V>``."""
    return np.array([math.sin(phi / 2), math.cos(phi / 2)], dtype=complex)


def shifted_state(phi: float, shift: float, direction) -> np.ndarray:
    direction = Direction(direction)
    if direction is Direction.PARALLEL:
        return np.array([math.sin(phi / 2), np.exp(1j * shift) * math.cos(phi / 2)])
    return reference_state(phi + shift)


def meridian_trace_distance(phi, shift):
    """Closed form ``|cos(phi) - cos(phi + shift)| / 2`` for the meridian shift."""
    return 0.5 * np.abs(np.cos(phi) - np.cos(phi + shift))


def bob_marginal(psi, m=None) -> DensityMatrix:
    m = maskers.qubit_masker(0.0, 0.0) if m is None else m
    return maskers.masked_marginals(m, PureState.normalized(psi).density())[1]


def sample_counts(rho: DensityMatrix, basis: str, shots: int, seed) -> tuple:
    """Binomial counts of the ``+1`` and ``-1`` outcomes of a Pauli measurement."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    axis = "xyz".index(basis.lower())
    p_plus = float(np.trace(rho.mat @ (np.eye(2) + PAULI[axis])).real / 2)
    rng = np.random.default_rng(seed)
    plus = int(rng.binomial(shots, min(max(p_plus, 0.0), 1.0)))
    return plus, shots - plus


def run_sweep_fig3(cfg: SweepConfig, seed: int = 0) -> list:
    """
    Trace distance between Bob's marginal for the shifted and reference states.

    With ``cfg.shots`` set, Bob's marginal is estimated from z-basis counts
    (it is diagonal for this masker) and ``std_error`` is the binomial
    normal-approximation error. Each grid point draws from its own generator
    seeded by ``(seed, point index)``.
    """
    m = maskers.qubit_masker(0.0, 0.0)
    records = []
    idx = 0
    for phi in cfg.phi_list:
        ref = bob_marginal(reference_state(phi), m)
        for shift in cfg.shift_list:
            rb = bob_marginal(shifted_state(phi, shift, cfg.direction), m)
            if cfg.shots is None:
                records.append(SweepRecord(phi, shift, cfg.direction, trace_distance(rb, ref)))
            else:
                plus, _ = sample_counts(rb, "z", cfg.shots, (seed, idx))
                p_hat = plus / cfg.shots
                est = DensityMatrix(np.diag([p_hat, 1 - p_hat]))
                se = math.sqrt(p_hat * (1 - p_hat) / cfg.shots)
                records.append(SweepRecord(phi, shift, cfg.direction, trace_distance(est, ref), se))
            idx += 1
    return records


SWEEP_COMMENT = (
    "# phi_deg [deg], shift_deg [deg], direction [-], trace_distance [dimensionless], "
    "std_error [dimensionless, empty when exact]"
)


def sweep_csv(records, metadata: str | None = None) -> str:
    buf = io.StringIO()
    buf.write(SWEEP_COMMENT + "\n")
    if metadata:
        buf.write(f"# {metadata}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["phi_deg", "shift_deg", "direction", "trace_distance", "std_error"])
    for r in records:
        w.writerow([
            repr(round(math.degrees(r.phi), 10)),
            repr(round(math.degrees(r.shift), 10)),
            r.direction.value,
            repr(r.trace_distance),
            "" if r.std_error is None else repr(r.std_error),
        ])
    return buf.getvalue()


def _phase_channel(t):
    return np.diag([np.exp(-1j * t), np.exp(1j * t)])


def _evolve(rho, u):
    out = u @ rho @ u.conj().T
    return DensityMatrix((out + out.conj().T) / 2)


def run_channel_protection(rho: DensityMatrix, t: float) -> dict:
    """
    Send a qubit through two identical phase channels ``exp(-i sigma_z t)``.

    Protected route: mask, flip Bob's qubit, both qubits through a channel,
    flip Bob's qubit again, unmask. The bare route sends ``rho`` through one
    channel.
    """
    m = maskers.qubit_masker(0.0, 0.0)
    flip_b = np.kron(np.eye(2), SIGMA_X)
    u = _phase_channel(t)
    sent = _evolve(maskers.mask(m, rho).mat, flip_b)
    received = _evolve(sent.mat, np.kron(u, u))
    recovered = maskers.unmask(m, _evolve(received.mat, flip_b))
    bare = _evolve(rho.mat, u)
    return {
        "t": float(t),
        "recovered_fidelity": fidelity(rho, recovered),
        "unprotected_fidelity": fidelity(rho, bare),
        "recovered_state": recovered.to_json(),
    }


def channel_curve(rho: DensityMatrix, ts) -> list:
    return [run_channel_protection(rho, t) for t in ts]
